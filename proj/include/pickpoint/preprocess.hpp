// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>

#include "pickpoint/point_cloud.hpp"

namespace pickpoint {

/// Red/green channel thresholds of the keep-condition R > sigma1 && G <= sigma2.
/// Defaults separate red fruit and purple-brown stems from green leaves on
/// 8-bit channels; both are ordinary tunables, not calibrated constants.
struct ColorFilterParams {
    int sigma1 = 100;  // red threshold, 0..255
    int sigma2 = 150;  // green threshold, 0..255
};

struct StatFilterParams {
    int k = 20;            // neighbor count, >= 1
    double alpha_v = 2.0;  // interval width multiplier, 0 < alpha_v < 3
};

struct VoxelParams {
    double voxel_size = 0.01;  // meters, > 0
    // Grid anchor; defaults to the cloud's per-axis minimum. Pass an
    // explicit origin to keep the grid fixed across repeated runs.
    std::optional<std::array<double, 3>> origin;
};

/// Keeps exactly the points with r > sigma1 and g <= sigma2, order preserved.
ColoredPointCloud color_filter(const ColoredPointCloud& cloud, const ColorFilterParams& p);

/// Statistical outlier removal: d_i = mean Euclidean distance to the k
/// nearest neighbors (self excluded); keeps points with d_i inside
/// [mu - alpha_v*sigma, mu + alpha_v*sigma], where mu/sigma are the mean and
/// population standard deviation of {d_i}. Order preserved.
/// Throws "insufficient points for k-NN statistics" when size < k+1.
ColoredPointCloud statistical_filter(const ColoredPointCloud& cloud, const StatFilterParams& p);

/// Voxel-grid centroid downsampling: one point per non-empty voxel at the
/// centroid of member positions with integer-rounded mean color, output
/// sorted by (ix, iy, iz). Boundary points go to the higher-index voxel
/// (floor semantics). Throws "empty cloud" on empty input.
ColoredPointCloud voxel_downsample(const ColoredPointCloud& cloud, const VoxelParams& p);

}  // namespace pickpoint
