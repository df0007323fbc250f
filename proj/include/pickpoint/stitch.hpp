// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pickpoint/geometry.hpp"
#include "pickpoint/point_cloud.hpp"

namespace pickpoint {

/// One depth-camera capture: camera-frame cloud plus the arm flange pose
/// (base frame) at capture time.
struct ViewCapture {
    ColoredPointCloud cloud;
    RigidTransform flange_in_base;
    std::string view_label;
};

/// Maps every view into the robot base frame through
/// camera_to_base(i) = flange_in_base(i) * hand_eye and concatenates in
/// input order. No refinement, no deduplication; overlap is resolved by
/// downstream voxel downsampling. Throws "no views" on an empty list.
ColoredPointCloud stitch_views(std::span<const ViewCapture> views, const RigidTransform& hand_eye);

/// View-set manifest: {"hand_eye": [16] | "hand_eye_path": "calib.json",
/// "views": [{"label": "A", "cloud": "view_a.ply", "flange_in_base": [16]}]}.
/// Cloud paths are resolved relative to the manifest's directory.
struct ViewSet {
    std::vector<ViewCapture> views;
    RigidTransform hand_eye;
};

ViewSet read_view_set(const std::filesystem::path& manifest_path);

}  // namespace pickpoint
