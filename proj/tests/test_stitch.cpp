// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "pickpoint/cloud_io.hpp"
#include "pickpoint/error.hpp"
#include "pickpoint/rng.hpp"
#include "pickpoint/stitch.hpp"
#include "pickpoint/synth.hpp"

using namespace pickpoint;

namespace {

constexpr double kPi = 3.14159265358979323846;

RigidTransform random_transform(Rng& rng) {
    Eigen::Vector3d axis;
    do {
        axis = {rng.normal(), rng.normal(), rng.normal()};
    } while (axis.norm() < 1e-9);
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(rng.uniform(0.0, kPi), axis.normalized()).toRotationMatrix();
    return RigidTransform::from_parts(r,
                                      {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
}

}  // namespace

TEST_CASE("identity stitch relabels the frame") {
    ViewCapture view;
    view.cloud.points = {{1, 2, 3, 9, 9, 9}};
    view.cloud.frame_label = "camera:A";
    const ViewCapture views[1] = {view};
    const ColoredPointCloud out = stitch_views(views, RigidTransform::identity());
    REQUIRE(out.size() == 1);
    CHECK(out.points[0].x == 1.0);
    CHECK(out.frame_label == "base");
}

TEST_CASE("empty view list is an error") {
    CHECK_THROWS_WITH_AS(stitch_views(std::span<const ViewCapture>{}, RigidTransform::identity()),
                         "no views", Error);
}

TEST_CASE("block order and exact size, A then B then C") {
    Rng rng(41);
    std::vector<ViewCapture> views(3);
    const size_t sizes[3] = {5, 7, 3};
    for (int v = 0; v < 3; ++v) {
        views[static_cast<size_t>(v)].view_label = std::string(1, static_cast<char>('A' + v));
        views[static_cast<size_t>(v)].flange_in_base = random_transform(rng);
        for (size_t i = 0; i < sizes[v]; ++i) {
            views[static_cast<size_t>(v)].cloud.points.push_back(
                {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                 static_cast<uint8_t>(v), 0, 0});
        }
    }
    const RigidTransform hand_eye = random_transform(rng);
    const ColoredPointCloud out = stitch_views(views, hand_eye);
    REQUIRE(out.size() == 15);
    CHECK(out.points[0].r == 0);
    CHECK(out.points[5].r == 1);
    CHECK(out.points[12].r == 2);
}

TEST_CASE("stitched noise-free views land on the ground-truth surface") {
    SceneSpec spec;
    spec.seed = 5;
    spec.sampling_pitch = 0.005;  // coarse for speed
    const SyntheticScene scene = generate_scene(spec);
    const auto poses = canonical_view_poses(scene);

    // A hand-eye and flange poses consistent with the camera poses.
    Rng rng(42);
    const RigidTransform hand_eye = random_transform(rng);
    std::vector<ViewCapture> views;
    for (int v = 0; v < 3; ++v) {
        ViewCapture capture;
        capture.cloud = render_view(scene, poses[static_cast<size_t>(v)], NoiseModel{}, 1);
        capture.flange_in_base = compose(poses[static_cast<size_t>(v)], invert(hand_eye));
        views.push_back(std::move(capture));
    }
    const ColoredPointCloud stitched = stitch_views(views, hand_eye);
    REQUIRE(stitched.size() > 0);

    // Nearest ground-truth sample within 1e-9 for every stitched point.
    // Rendered points are scene samples, so an exact-match hash works.
    std::map<std::tuple<int64_t, int64_t, int64_t>, std::vector<size_t>> grid;
    const double cell = 1e-6;
    for (size_t i = 0; i < scene.surface_samples.size(); ++i) {
        const auto& s = scene.surface_samples[i];
        grid[{static_cast<int64_t>(std::floor(s[0] / cell)),
              static_cast<int64_t>(std::floor(s[1] / cell)),
              static_cast<int64_t>(std::floor(s[2] / cell))}]
            .push_back(i);
    }
    size_t checked = 0;
    for (const auto& p : stitched.points) {
        const int64_t cx = static_cast<int64_t>(std::floor(p.x / cell));
        const int64_t cy = static_cast<int64_t>(std::floor(p.y / cell));
        const int64_t cz = static_cast<int64_t>(std::floor(p.z / cell));
        double best = 1e9;
        for (int64_t dx = -1; dx <= 1; ++dx)
            for (int64_t dy = -1; dy <= 1; ++dy)
                for (int64_t dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({cx + dx, cy + dy, cz + dz});
                    if (it == grid.end()) continue;
                    for (size_t i : it->second) {
                        const auto& s = scene.surface_samples[i];
                        const double d = std::sqrt((p.x - s[0]) * (p.x - s[0]) +
                                                   (p.y - s[1]) * (p.y - s[1]) +
                                                   (p.z - s[2]) * (p.z - s[2]));
                        best = std::min(best, d);
                    }
                }
        CHECK(best <= 1e-9);
        ++checked;
    }
    CHECK(checked == stitched.size());
}

TEST_CASE("base-frame change equivariance") {
    Rng rng(43);
    std::vector<ViewCapture> views(2);
    for (auto& view : views) {
        view.flange_in_base = random_transform(rng);
        for (int i = 0; i < 40; ++i) {
            view.cloud.points.push_back(
                {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), 0, 0, 0});
        }
    }
    const RigidTransform hand_eye = random_transform(rng);
    const RigidTransform g = random_transform(rng);

    const ColoredPointCloud moved_after = apply(g, stitch_views(views, hand_eye));
    std::vector<ViewCapture> premoved = views;
    for (auto& view : premoved) view.flange_in_base = compose(g, view.flange_in_base);
    const ColoredPointCloud moved_before = stitch_views(premoved, hand_eye);

    REQUIRE(moved_after.size() == moved_before.size());
    for (size_t i = 0; i < moved_after.size(); ++i) {
        CHECK(std::abs(moved_after.points[i].x - moved_before.points[i].x) <= 1e-10);
        CHECK(std::abs(moved_after.points[i].y - moved_before.points[i].y) <= 1e-10);
        CHECK(std::abs(moved_after.points[i].z - moved_before.points[i].z) <= 1e-10);
    }
}

TEST_CASE("stitching preserves within-view pairwise distances") {
    Rng rng(44);
    ViewCapture view;
    view.flange_in_base = random_transform(rng);
    for (int i = 0; i < 30; ++i) {
        view.cloud.points.push_back(
            {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), 0, 0, 0});
    }
    const ViewCapture views[1] = {view};
    const ColoredPointCloud out = stitch_views(views, random_transform(rng));
    for (size_t i = 0; i + 1 < out.size(); ++i) {
        const auto& a0 = view.cloud.points[i];
        const auto& b0 = view.cloud.points[i + 1];
        const auto& a1 = out.points[i];
        const auto& b1 = out.points[i + 1];
        const double d0 = std::sqrt((a0.x - b0.x) * (a0.x - b0.x) + (a0.y - b0.y) * (a0.y - b0.y) +
                                    (a0.z - b0.z) * (a0.z - b0.z));
        const double d1 = std::sqrt((a1.x - b1.x) * (a1.x - b1.x) + (a1.y - b1.y) * (a1.y - b1.y) +
                                    (a1.z - b1.z) * (a1.z - b1.z));
        CHECK(std::abs(d0 - d1) <= 1e-10);
    }
}

TEST_CASE("view-set manifest round-trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pickpoint_manifest_test";
    fs::create_directories(dir);

    Rng rng(45);
    ColoredPointCloud cloud;
    cloud.points = {{0.25, -0.5, 1.0, 3, 4, 5}};
    write_cloud(cloud, dir / "view_a.ply", CloudWriteFormat::PlyBinaryLe);

    const RigidTransform flange = random_transform(rng);
    std::ofstream manifest(dir / "views.json");
    manifest << "{\n  \"hand_eye\": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1],\n  \"views\": [\n";
    manifest << "    {\"label\": \"A\", \"cloud\": \"view_a.ply\", \"flange_in_base\": [";
    const Eigen::Matrix4d& m = flange.matrix();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            manifest << buf << ((r == 3 && c == 3) ? "" : ",");
        }
    manifest << "]}\n  ]\n}\n";
    manifest.close();

    const ViewSet set = read_view_set(dir / "views.json");
    REQUIRE(set.views.size() == 1);
    CHECK(set.views[0].view_label == "A");
    CHECK(set.views[0].cloud.size() == 1);
    CHECK((set.views[0].flange_in_base.matrix() - flange.matrix()).cwiseAbs().maxCoeff() == 0.0);
    fs::remove_all(dir);
}
