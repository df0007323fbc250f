// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pickpoint/error.hpp"
#include "pickpoint/preprocess.hpp"
#include "pickpoint/rng.hpp"

using namespace pickpoint;

TEST_CASE("color filter keep condition") {
    ColorFilterParams p;
    p.sigma1 = 100;
    p.sigma2 = 150;
    ColoredPointCloud cloud;
    cloud.points.push_back({0, 0, 0, 200, 50, 0});   // kept
    cloud.points.push_back({1, 0, 0, 50, 200, 0});   // removed (fails both)
    cloud.points.push_back({2, 0, 0, 100, 50, 0});   // removed (r not > sigma1)
    cloud.points.push_back({3, 0, 0, 101, 150, 0});  // kept (g == sigma2 passes)
    const ColoredPointCloud out = color_filter(cloud, p);
    REQUIRE(out.size() == 2);
    CHECK(out.points[0].x == 0.0);
    CHECK(out.points[1].x == 3.0);
}

TEST_CASE("color filter equals the brute-force predicate on 10k random points") {
    Rng rng(31);
    const ColoredPointCloud cloud = oracles::random_cloud(rng, 10000, 1.0);
    ColorFilterParams p;
    const auto keep = oracles::color_filter_keep(cloud, p.sigma1, p.sigma2);
    ColoredPointCloud expected;
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (keep[i]) expected.points.push_back(cloud.points[i]);
    }
    CHECK(oracles::same_cloud(color_filter(cloud, p), expected));
}

TEST_CASE("statistical filter on a regular grid keeps everything") {
    // k = 2: every grid point, corners included, has its two nearest
    // neighbors at distance exactly 1, so all d_i coincide and sigma = 0.
    ColoredPointCloud cloud;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) cloud.points.push_back({double(i), double(j), 0, 0, 0, 0});
    StatFilterParams p;
    p.k = 2;
    p.alpha_v = 2.9;
    CHECK(statistical_filter(cloud, p).size() == cloud.size());
}

TEST_CASE("statistical filter removes a single far outlier") {
    ColoredPointCloud cloud;
    for (int x = 0; x < 5; ++x)
        for (int y = 0; y < 5; ++y)
            for (int z = 0; z < 5; ++z) cloud.points.push_back({double(x), double(y), double(z), 0, 0, 0});
    cloud.points.push_back({100.0, 0.0, 0.0, 0, 0, 0});
    StatFilterParams p;
    p.k = 5;
    p.alpha_v = 1.0;
    const ColoredPointCloud out = statistical_filter(cloud, p);
    // exactly the far point is removed; order of the rest preserved
    const auto keep = oracles::statistical_filter_keep(cloud, p.k, p.alpha_v);
    CHECK(std::count(keep.begin(), keep.end(), false) == 1);
    CHECK_FALSE(keep.back());
    CHECK(out.size() == cloud.size() - 1);
    for (size_t i = 0; i < out.size(); ++i) {
        CHECK(out.points[i].x == cloud.points[i].x);
    }
}

TEST_CASE("statistical filter equals the exhaustive O(n^2) oracle exactly") {
    Rng rng(32);
    for (int round = 0; round < 5; ++round) {
        ColoredPointCloud cloud = oracles::random_cloud(rng, 600, 1.0);
        // inject a few outliers
        for (int i = 0; i < 5; ++i) {
            cloud.points.push_back({rng.uniform(8, 12), rng.uniform(8, 12), rng.uniform(8, 12),
                                    0, 0, 0});
        }
        StatFilterParams p;
        p.k = 10;
        p.alpha_v = 1.5;
        const auto keep = oracles::statistical_filter_keep(cloud, p.k, p.alpha_v);
        ColoredPointCloud expected;
        for (size_t i = 0; i < cloud.size(); ++i) {
            if (keep[i]) expected.points.push_back(cloud.points[i]);
        }
        CHECK(oracles::same_cloud(statistical_filter(cloud, p), expected));
    }
}

TEST_CASE("statistical filter demands k+1 points") {
    ColoredPointCloud cloud;
    for (int i = 0; i < 5; ++i) cloud.points.push_back({double(i), 0, 0, 0, 0, 0});
    StatFilterParams p;
    p.k = 5;
    CHECK_THROWS_WITH_AS(statistical_filter(cloud, p),
                         "insufficient points for k-NN statistics", Error);
}

TEST_CASE("statistical filter near the alpha limit keeps a homogeneous cloud") {
    // 3D unit grid with k = 3: even a corner has three axis neighbors at
    // distance exactly 1, so every d_i is 1 and sigma is 0.
    ColoredPointCloud cloud;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            for (int l = 0; l < 8; ++l) {
                cloud.points.push_back({double(i), double(j), double(l), 0, 0, 0});
            }
    StatFilterParams p;
    p.k = 3;
    p.alpha_v = 2.999;
    CHECK(statistical_filter(cloud, p).size() == cloud.size());
}

TEST_CASE("voxel downsample single voxel centroid") {
    Rng rng(34);
    ColoredPointCloud cloud;
    double sx = 0, sy = 0, sz = 0;
    for (int i = 0; i < 100; ++i) {
        ColoredPoint pt{rng.uniform(0, 0.009), rng.uniform(0, 0.009), rng.uniform(0, 0.009),
                        100, 100, 100};
        sx += pt.x;
        sy += pt.y;
        sz += pt.z;
        cloud.points.push_back(pt);
    }
    VoxelParams p;
    p.voxel_size = 0.01;
    const ColoredPointCloud out = voxel_downsample(cloud, p);
    REQUIRE(out.size() == 1);
    CHECK(out.points[0].x == doctest::Approx(sx / 100).epsilon(1e-12));
    CHECK(out.points[0].y == doctest::Approx(sy / 100).epsilon(1e-12));
}

TEST_CASE("voxel downsample keeps isolated points unchanged") {
    ColoredPointCloud cloud;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) {
                cloud.points.push_back({x + 0.5, y + 0.5, z + 0.5, 9, 9, 9});
            }
    VoxelParams p;
    p.voxel_size = 1.0;
    const ColoredPointCloud out = voxel_downsample(cloud, p);
    REQUIRE(out.size() == 8);
    // one point per voxel is its own centroid; output is sorted by voxel index
    CHECK(out.points[0].x == 0.5);
    CHECK(out.points[7].z == 1.5);
}

TEST_CASE("voxel downsample rejects empty input") {
    CHECK_THROWS_WITH_AS(voxel_downsample(ColoredPointCloud{}, VoxelParams{}), "empty cloud",
                         Error);
}

TEST_CASE("voxel downsample equals the hash-bucket oracle bit for bit") {
    Rng rng(35);
    for (int round = 0; round < 5; ++round) {
        const ColoredPointCloud cloud = oracles::random_cloud(rng, 5000, 0.2);
        VoxelParams p;
        p.voxel_size = 0.01;
        CHECK(oracles::same_cloud(voxel_downsample(cloud, p),
                                  oracles::voxel_downsample_oracle(cloud, p.voxel_size, {})));
    }
}

TEST_CASE("voxel downsample output points stay inside their voxel cube") {
    Rng rng(36);
    const ColoredPointCloud cloud = oracles::random_cloud(rng, 3000, 0.3);
    VoxelParams p;
    p.voxel_size = 0.02;
    double origin[3] = {cloud.points[0].x, cloud.points[0].y, cloud.points[0].z};
    for (const auto& pt : cloud.points) {
        origin[0] = std::min(origin[0], pt.x);
        origin[1] = std::min(origin[1], pt.y);
        origin[2] = std::min(origin[2], pt.z);
    }
    const ColoredPointCloud out = voxel_downsample(cloud, p);
    CHECK(out.size() <= cloud.size());
    for (const auto& pt : out.points) {
        const double fx = (pt.x - origin[0]) / p.voxel_size;
        const double fy = (pt.y - origin[1]) / p.voxel_size;
        const double fz = (pt.z - origin[2]) / p.voxel_size;
        // centroid lies in the closed cube of its voxel
        CHECK(fx >= std::floor(fx) - 1e-12);
        CHECK(fx <= std::floor(fx) + 1.0 + 1e-12);
        CHECK(fy >= std::floor(fy) - 1e-12);
        CHECK(fz >= std::floor(fz) - 1e-12);
    }
}

TEST_CASE("voxel downsample is idempotent with a fixed origin") {
    Rng rng(37);
    const ColoredPointCloud cloud = oracles::random_cloud(rng, 4000, 0.3);
    VoxelParams p;
    p.voxel_size = 0.02;
    p.origin = {{-0.3, -0.3, -0.3}};
    const ColoredPointCloud once = voxel_downsample(cloud, p);
    const ColoredPointCloud twice = voxel_downsample(once, p);
    CHECK(oracles::same_cloud(once, twice));
}

TEST_CASE("filters preserve order as pure selections") {
    Rng rng(38);
    const ColoredPointCloud cloud = oracles::random_cloud(rng, 2000, 1.0);
    const ColoredPointCloud filtered = color_filter(cloud, ColorFilterParams{});
    size_t cursor = 0;
    for (const auto& pt : filtered.points) {
        while (cursor < cloud.size() &&
               (cloud.points[cursor].x != pt.x || cloud.points[cursor].y != pt.y)) {
            ++cursor;
        }
        CHECK(cursor < cloud.size());
    }
}
