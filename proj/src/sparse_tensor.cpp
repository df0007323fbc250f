// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/sparse_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "pickpoint/error.hpp"

namespace pickpoint {

SparseTensor canonicalize(SparseTensor t) {
    std::vector<size_t> order(t.coords.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return t.coords[a] < t.coords[b]; });
    SparseTensor out;
    out.stride = t.stride;
    out.coords.resize(t.coords.size());
    out.feats.resize(t.feats.rows(), t.feats.cols());
    for (size_t i = 0; i < order.size(); ++i) {
        out.coords[i] = t.coords[order[i]];
        out.feats.row(static_cast<Eigen::Index>(i)) =
            t.feats.row(static_cast<Eigen::Index>(order[i]));
    }
    return out;
}

SparseTensor build_sparse_tensor(const ColoredPointCloud& cloud, double voxel_size) {
    if (cloud.empty()) throw Error("empty cloud");
    if (!(voxel_size > 0.0)) throw Error("voxel size must be positive");

    struct Accum {
        SiteCoord coord;
        double r = 0, g = 0, b = 0;
        int64_t count = 0;
    };
    std::unordered_map<SiteCoord, size_t, SiteCoordHash> index;
    std::vector<Accum> sites;
    for (const auto& pt : cloud.points) {
        const SiteCoord key = {0, static_cast<int32_t>(std::floor(pt.x / voxel_size)),
                               static_cast<int32_t>(std::floor(pt.y / voxel_size)),
                               static_cast<int32_t>(std::floor(pt.z / voxel_size))};
        auto [it, inserted] = index.try_emplace(key, sites.size());
        if (inserted) sites.push_back({key});
        Accum& a = sites[it->second];
        a.r += pt.r;
        a.g += pt.g;
        a.b += pt.b;
        a.count += 1;
    }
    std::sort(sites.begin(), sites.end(),
              [](const Accum& a, const Accum& b) { return a.coord < b.coord; });

    SparseTensor t;
    t.stride = 1;
    t.coords.reserve(sites.size());
    t.feats.resize(static_cast<Eigen::Index>(sites.size()), 3);
    for (size_t i = 0; i < sites.size(); ++i) {
        const Accum& a = sites[i];
        t.coords.push_back(a.coord);
        const double count = static_cast<double>(a.count);
        t.feats(static_cast<Eigen::Index>(i), 0) = a.r / count / 255.0;
        t.feats(static_cast<Eigen::Index>(i), 1) = a.g / count / 255.0;
        t.feats(static_cast<Eigen::Index>(i), 2) = a.b / count / 255.0;
    }
    return t;
}

SparseTensor prune(const SparseTensor& input, std::span<const double> keep_scores,
                   double threshold) {
    if (keep_scores.size() != input.size()) {
        throw Error("prune: score count does not match site count");
    }
    std::vector<size_t> keep;
    for (size_t i = 0; i < input.size(); ++i) {
        if (keep_scores[i] >= threshold) keep.push_back(i);
    }
    SparseTensor out;
    out.stride = input.stride;
    out.coords.reserve(keep.size());
    out.feats.resize(static_cast<Eigen::Index>(keep.size()), input.feats.cols());
    for (size_t i = 0; i < keep.size(); ++i) {
        out.coords.push_back(input.coords[keep[i]]);
        out.feats.row(static_cast<Eigen::Index>(i)) =
            input.feats.row(static_cast<Eigen::Index>(keep[i]));
    }
    return out;
}

std::map<int32_t, Eigen::VectorXd> global_avg_pool(const SparseTensor& input) {
    if (input.empty()) throw Error("empty batch");
    std::map<int32_t, std::pair<Eigen::VectorXd, int64_t>> acc;
    for (size_t i = 0; i < input.size(); ++i) {
        auto [it, inserted] = acc.try_emplace(
            input.coords[i].b,
            std::make_pair(Eigen::VectorXd::Zero(input.feats.cols()).eval(), int64_t{0}));
        it->second.first += input.feats.row(static_cast<Eigen::Index>(i)).transpose();
        it->second.second += 1;
    }
    std::map<int32_t, Eigen::VectorXd> out;
    for (auto& [batch, sum_count] : acc) {
        out.emplace(batch, sum_count.first / static_cast<double>(sum_count.second));
    }
    return out;
}

SparseTensor sparse_add(const SparseTensor& a, const SparseTensor& b) {
    if (a.channels() != b.channels()) {
        throw Error("sparse_add: channel mismatch");
    }
    if (a.stride != b.stride) {
        throw Error("sparse_add: stride mismatch");
    }
    std::unordered_map<SiteCoord, size_t, SiteCoordHash> index;
    std::vector<SiteCoord> coords;
    for (const auto& t : {std::cref(a), std::cref(b)}) {
        for (const auto& c : t.get().coords) {
            if (index.try_emplace(c, coords.size()).second) coords.push_back(c);
        }
    }
    std::sort(coords.begin(), coords.end());
    for (size_t i = 0; i < coords.size(); ++i) index[coords[i]] = i;

    SparseTensor out;
    out.stride = a.stride;
    out.coords = std::move(coords);
    out.feats = FeatureMatrix::Zero(static_cast<Eigen::Index>(out.coords.size()), a.channels());
    for (const auto& t : {std::cref(a), std::cref(b)}) {
        const SparseTensor& s = t.get();
        for (size_t i = 0; i < s.size(); ++i) {
            out.feats.row(static_cast<Eigen::Index>(index[s.coords[i]])) +=
                s.feats.row(static_cast<Eigen::Index>(i));
        }
    }
    return out;
}

}  // namespace pickpoint
