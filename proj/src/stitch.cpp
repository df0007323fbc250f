// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/stitch.hpp"

#include <fstream>

#include "json.hpp"
#include "pickpoint/cloud_io.hpp"
#include "pickpoint/error.hpp"

namespace pickpoint {

ColoredPointCloud stitch_views(std::span<const ViewCapture> views,
                               const RigidTransform& hand_eye) {
    if (views.empty()) throw Error("no views");
    std::vector<ColoredPointCloud> transformed;
    transformed.reserve(views.size());
    for (const auto& view : views) {
        const RigidTransform camera_to_base = compose(view.flange_in_base, hand_eye);
        transformed.push_back(apply(camera_to_base, view.cloud));
    }
    ColoredPointCloud out = concat(transformed);
    out.frame_label = "base";
    return out;
}

ViewSet read_view_set(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot open " + manifest_path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("invalid JSON in " + manifest_path.string());

    const auto base_dir = manifest_path.parent_path();
    auto matrix_from = [&](const nlohmann::json& arr, const std::string& what) {
        if (!arr.is_array() || arr.size() != 16) {
            throw Error(manifest_path.string() + ": " + what + " must be 16 row-major numbers");
        }
        Eigen::Matrix4d m;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) m(r, c) = arr[4 * r + c].get<double>();
        return RigidTransform::from_matrix(m);
    };

    ViewSet set;
    if (j.contains("hand_eye")) {
        set.hand_eye = matrix_from(j.at("hand_eye"), "hand_eye");
    } else if (j.contains("hand_eye_path")) {
        const std::filesystem::path p = j.at("hand_eye_path").get<std::string>();
        set.hand_eye = read_hand_eye(p.is_relative() ? base_dir / p : p);
    } else {
        throw Error(manifest_path.string() + ": missing hand_eye or hand_eye_path");
    }

    if (!j.contains("views") || !j.at("views").is_array()) {
        throw Error(manifest_path.string() + ": missing views array");
    }
    for (const auto& v : j.at("views")) {
        ViewCapture capture;
        capture.view_label = v.value("label", "");
        capture.flange_in_base = matrix_from(v.at("flange_in_base"), "flange_in_base");
        const std::filesystem::path cloud_path = v.at("cloud").get<std::string>();
        capture.cloud =
            read_cloud(cloud_path.is_relative() ? base_dir / cloud_path : cloud_path);
        set.views.push_back(std::move(capture));
    }
    return set;
}

}  // namespace pickpoint
