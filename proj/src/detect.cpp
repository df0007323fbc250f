// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pickpoint/error.hpp"

namespace pickpoint {

std::vector<BoundingBox3D> decode_detections(std::span<const HeadLevelOutput> levels,
                                             double voxel_size, double score_threshold,
                                             double nms_iou) {
    if (score_threshold < 0.0 || score_threshold > 1.0 || nms_iou < 0.0 || nms_iou > 1.0) {
        throw Error("decode thresholds must lie in [0, 1]");
    }
    if (!(voxel_size > 0.0)) throw Error("voxel size must be positive");
    struct Candidate {
        int32_t batch;
        BoundingBox3D box;
    };
    std::vector<Candidate> candidates;
    for (const auto& level : levels) {
        const double cell = level.stride * voxel_size;
        for (const auto& site : level.sites) {
            const double score = site.class_prob * site.centerness;
            if (score < score_threshold) continue;
            BoundingBox3D box;
            box.center = {(site.coord.x + 0.5) * cell + site.box_params[0],
                          (site.coord.y + 0.5) * cell + site.box_params[1],
                          (site.coord.z + 0.5) * cell + site.box_params[2]};
            box.size = {std::exp(site.box_params[3]) * cell, std::exp(site.box_params[4]) * cell,
                        std::exp(site.box_params[5]) * cell};
            box.score = score;
            candidates.push_back({site.coord.b, std::move(box)});
        }
    }

    std::map<int32_t, std::vector<BoundingBox3D>> by_batch;
    for (auto& c : candidates) by_batch[c.batch].push_back(std::move(c.box));

    std::vector<BoundingBox3D> out;
    for (auto& [batch, boxes] : by_batch) {
        std::stable_sort(boxes.begin(), boxes.end(), [](const BoundingBox3D& a,
                                                        const BoundingBox3D& b) {
            return *a.score > *b.score;
        });
        std::vector<BoundingBox3D> kept;
        for (const auto& box : boxes) {
            const bool suppressed =
                std::any_of(kept.begin(), kept.end(),
                            [&](const BoundingBox3D& k) { return iou3d(box, k) >= nms_iou; });
            if (!suppressed) kept.push_back(box);
        }
        out.insert(out.end(), kept.begin(), kept.end());
    }
    return out;
}

}  // namespace pickpoint
