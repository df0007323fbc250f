// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pickpoint/point_cloud.hpp"

namespace pickpoint {

/// Batch-indexed integer site coordinate of a COO sparse tensor.
struct SiteCoord {
    int32_t b = 0;
    int32_t x = 0;
    int32_t y = 0;
    int32_t z = 0;

    friend bool operator==(const SiteCoord&, const SiteCoord&) = default;
    friend auto operator<=>(const SiteCoord&, const SiteCoord&) = default;
};

struct SiteCoordHash {
    size_t operator()(const SiteCoord& c) const {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (int64_t v : {int64_t(c.b), int64_t(c.x), int64_t(c.y), int64_t(c.z)}) {
            h ^= static_cast<uint64_t>(v);
            h *= 0x100000001b3ULL;
        }
        return static_cast<size_t>(h);
    }
};

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// COO sparse tensor: unique per-batch integer coordinates with row-aligned
/// feature vectors. `stride` is the voxel stride of this resolution level;
/// coordinates are level-local (world voxel index = coord * stride).
/// All operations emit coordinates canonically sorted by (b, x, y, z).
struct SparseTensor {
    std::vector<SiteCoord> coords;
    FeatureMatrix feats;  // rows align with coords
    int stride = 1;

    size_t size() const { return coords.size(); }
    int channels() const { return static_cast<int>(feats.cols()); }
    bool empty() const { return coords.empty(); }
};

/// Sorts rows by (b, x, y, z); coordinates must already be unique.
SparseTensor canonicalize(SparseTensor t);

/// Quantizes a cloud onto a world-anchored voxel grid: one site per
/// occupied voxel index floor(position / voxel_size), feature = mean RGB
/// normalized to [0, 1], batch index 0. Throws on an empty cloud.
SparseTensor build_sparse_tensor(const ColoredPointCloud& cloud, double voxel_size);

/// Keeps exactly the sites with keep_scores[i] >= threshold, order preserved.
SparseTensor prune(const SparseTensor& input, std::span<const double> keep_scores,
                   double threshold);

/// Per-batch arithmetic mean of feature rows over active sites.
/// Throws "empty batch" when the tensor has no sites.
std::map<int32_t, Eigen::VectorXd> global_avg_pool(const SparseTensor& input);

/// Coordinate-set union; features added where both tensors are active.
SparseTensor sparse_add(const SparseTensor& a, const SparseTensor& b);

}  // namespace pickpoint
