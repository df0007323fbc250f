// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "pickpoint/error.hpp"

namespace pickpoint {

namespace {

struct CellKey {
    int64_t x, y, z;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
    size_t operator()(const CellKey& k) const {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (int64_t v : {k.x, k.y, k.z}) {
            h ^= static_cast<uint64_t>(v);
            h *= 0x100000001b3ULL;
        }
        return static_cast<size_t>(h);
    }
};

int64_t floor_index(double v, double origin, double cell) {
    return static_cast<int64_t>(std::floor((v - origin) / cell));
}

}  // namespace

ColoredPointCloud color_filter(const ColoredPointCloud& cloud, const ColorFilterParams& p) {
    if (p.sigma1 < 0 || p.sigma1 > 255 || p.sigma2 < 0 || p.sigma2 > 255) {
        throw Error("color thresholds must lie in [0, 255]");
    }
    ColoredPointCloud out;
    out.frame_label = cloud.frame_label;
    for (const auto& pt : cloud.points) {
        if (pt.r > p.sigma1 && pt.g <= p.sigma2) out.points.push_back(pt);
    }
    return out;
}

ColoredPointCloud statistical_filter(const ColoredPointCloud& cloud, const StatFilterParams& p) {
    if (p.k < 1) throw Error("neighbor count must be >= 1");
    if (!(p.alpha_v > 0.0) || !(p.alpha_v < 3.0)) {
        throw Error("alpha_v must lie strictly between 0 and 3");
    }
    const size_t n = cloud.size();
    const size_t k = static_cast<size_t>(p.k);
    if (n < k + 1) {
        throw Error("insufficient points for k-NN statistics");
    }

    // Uniform grid sized so a cell holds roughly k points on average.
    double lo[3] = {cloud.points[0].x, cloud.points[0].y, cloud.points[0].z};
    double hi[3] = {lo[0], lo[1], lo[2]};
    for (const auto& pt : cloud.points) {
        const double c[3] = {pt.x, pt.y, pt.z};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
        }
    }
    const double ex = hi[0] - lo[0], ey = hi[1] - lo[1], ez = hi[2] - lo[2];
    const double volume = ex * ey * ez;
    double cell;
    if (volume > 0.0) {
        cell = std::cbrt(volume * static_cast<double>(k) / static_cast<double>(n));
    } else {
        const double span = std::max({ex, ey, ez});
        cell = span > 0.0 ? span * std::cbrt(static_cast<double>(k) / static_cast<double>(n))
                          : 1.0;
    }
    if (!(cell > 0.0)) cell = 1.0;

    // The bounding-box estimate degrades when outliers inflate the box;
    // shrink the cell until the mean occupancy of non-empty cells is sane.
    // The grid only accelerates the search, so the result is unchanged.
    std::unordered_map<CellKey, std::vector<uint32_t>, CellKeyHash> grid;
    std::vector<CellKey> keys(n);
    for (int attempt = 0; attempt < 4; ++attempt) {
        grid.clear();
        grid.reserve(n / std::max<size_t>(k, 1) + 16);
        for (size_t i = 0; i < n; ++i) {
            const auto& pt = cloud.points[i];
            keys[i] = {floor_index(pt.x, lo[0], cell), floor_index(pt.y, lo[1], cell),
                       floor_index(pt.z, lo[2], cell)};
            grid[keys[i]].push_back(static_cast<uint32_t>(i));
        }
        const double mean_occupancy = static_cast<double>(n) / static_cast<double>(grid.size());
        if (mean_occupancy <= 8.0 * static_cast<double>(k)) break;
        cell /= std::cbrt(mean_occupancy / static_cast<double>(k));
    }

    // Mean distance to the k nearest neighbors per point. The k smallest
    // distances are summed in ascending order so the result is bit-identical
    // to an exhaustive pairwise evaluation.
    std::vector<double> mean_dist(n);
    std::vector<double> cand;
    for (size_t i = 0; i < n; ++i) {
        const auto& pt = cloud.points[i];
        cand.clear();
        const CellKey c = keys[i];
        for (int64_t ring = 0;; ++ring) {
            for (int64_t dx = -ring; dx <= ring; ++dx) {
                for (int64_t dy = -ring; dy <= ring; ++dy) {
                    for (int64_t dz = -ring; dz <= ring; ++dz) {
                        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                        auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
                        if (it == grid.end()) continue;
                        for (uint32_t j : it->second) {
                            if (j == static_cast<uint32_t>(i)) continue;
                            const auto& q = cloud.points[j];
                            const double ddx = pt.x - q.x;
                            const double ddy = pt.y - q.y;
                            const double ddz = pt.z - q.z;
                            cand.push_back(std::sqrt(ddx * ddx + ddy * ddy + ddz * ddz));
                        }
                    }
                }
            }
            // Any point in an unscanned cell is farther than ring*cell, so
            // once k candidates sit within that bound the k nearest are here.
            if (cand.size() >= k) {
                const double bound = static_cast<double>(ring) * cell;
                size_t within = 0;
                for (double d : cand) {
                    if (d <= bound) ++within;
                }
                if (within >= k) break;
            }
            // Safety stop once the whole bounding box has been scanned.
            if (static_cast<double>(ring) * cell > std::max({ex, ey, ez}) + cell) break;
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k), cand.end());
        double sum = 0.0;
        for (size_t j = 0; j < k; ++j) sum += cand[j];
        mean_dist[i] = sum / static_cast<double>(k);
    }

    double mu = 0.0;
    for (double d : mean_dist) mu += d;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double d : mean_dist) var += (d - mu) * (d - mu);
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(var);

    const double lo_bound = mu - p.alpha_v * sigma;
    const double hi_bound = mu + p.alpha_v * sigma;
    ColoredPointCloud out;
    out.frame_label = cloud.frame_label;
    for (size_t i = 0; i < n; ++i) {
        if (mean_dist[i] >= lo_bound && mean_dist[i] <= hi_bound) {
            out.points.push_back(cloud.points[i]);
        }
    }
    return out;
}

ColoredPointCloud voxel_downsample(const ColoredPointCloud& cloud, const VoxelParams& p) {
    if (!(p.voxel_size > 0.0)) throw Error("voxel size must be positive");
    if (cloud.empty()) throw Error("empty cloud");

    double origin[3];
    if (p.origin) {
        origin[0] = (*p.origin)[0];
        origin[1] = (*p.origin)[1];
        origin[2] = (*p.origin)[2];
    } else {
        origin[0] = cloud.points[0].x;
        origin[1] = cloud.points[0].y;
        origin[2] = cloud.points[0].z;
        for (const auto& pt : cloud.points) {
            origin[0] = std::min(origin[0], pt.x);
            origin[1] = std::min(origin[1], pt.y);
            origin[2] = std::min(origin[2], pt.z);
        }
    }

    struct Accum {
        int64_t ix, iy, iz;
        double sx = 0, sy = 0, sz = 0;
        int64_t sr = 0, sg = 0, sb = 0;
        int64_t count = 0;
    };
    std::unordered_map<CellKey, size_t, CellKeyHash> index;
    std::vector<Accum> voxels;
    for (const auto& pt : cloud.points) {
        const CellKey key = {floor_index(pt.x, origin[0], p.voxel_size),
                             floor_index(pt.y, origin[1], p.voxel_size),
                             floor_index(pt.z, origin[2], p.voxel_size)};
        auto [it, inserted] = index.try_emplace(key, voxels.size());
        if (inserted) voxels.push_back({key.x, key.y, key.z});
        Accum& a = voxels[it->second];
        a.sx += pt.x;
        a.sy += pt.y;
        a.sz += pt.z;
        a.sr += pt.r;
        a.sg += pt.g;
        a.sb += pt.b;
        a.count += 1;
    }

    std::sort(voxels.begin(), voxels.end(), [](const Accum& a, const Accum& b) {
        return std::tie(a.ix, a.iy, a.iz) < std::tie(b.ix, b.iy, b.iz);
    });

    ColoredPointCloud out;
    out.frame_label = cloud.frame_label;
    out.points.reserve(voxels.size());
    for (const auto& v : voxels) {
        const double count = static_cast<double>(v.count);
        ColoredPoint pt;
        pt.x = v.sx / count;
        pt.y = v.sy / count;
        pt.z = v.sz / count;
        pt.r = static_cast<uint8_t>(std::llround(static_cast<double>(v.sr) / count));
        pt.g = static_cast<uint8_t>(std::llround(static_cast<double>(v.sg) / count));
        pt.b = static_cast<uint8_t>(std::llround(static_cast<double>(v.sb) / count));
        out.points.push_back(pt);
    }
    return out;
}

}  // namespace pickpoint
