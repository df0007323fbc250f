// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "pickpoint/eval.hpp"
#include "pickpoint/network.hpp"

namespace pickpoint {

/// Decodes head outputs into world-frame boxes: center =
/// (coord + 0.5) * stride * voxel_size + regressed offsets, size =
/// exp(size params) * stride * voxel_size, score = class_prob * centerness.
/// Boxes under score_threshold are dropped, then greedy NMS by descending
/// score suppresses IoU >= nms_iou (per batch, batches in ascending order).
std::vector<BoundingBox3D> decode_detections(std::span<const HeadLevelOutput> levels,
                                             double voxel_size, double score_threshold,
                                             double nms_iou);

}  // namespace pickpoint
