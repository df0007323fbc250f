// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/sparse_conv.hpp"

#include <algorithm>
#include <unordered_map>

#include "pickpoint/error.hpp"

namespace pickpoint {

namespace {

int32_t floor_div2(int32_t v) { return v >= 0 ? v / 2 : (v - 1) / 2; }

void check_kernel(const SparseKernel& kernel, const SparseTensor& input) {
    if (kernel.offsets.size() != kernel.weights.size() || kernel.offsets.empty()) {
        throw Error("sparse conv '" + kernel.name + "': malformed kernel");
    }
    const Eigen::Index rows = kernel.weights.front().rows();
    const Eigen::Index cols = kernel.weights.front().cols();
    for (const auto& w : kernel.weights) {
        if (w.rows() != rows || w.cols() != cols) {
            throw Error("sparse conv '" + kernel.name + "': inconsistent weight shapes");
        }
    }
    if (kernel.bias && kernel.bias->size() != cols) {
        throw Error("sparse conv '" + kernel.name + "': bias size mismatch");
    }
    if (!input.empty() && rows != input.feats.cols()) {
        throw Error("sparse conv '" + kernel.name + "': feature width " +
                    std::to_string(input.feats.cols()) + " does not match kernel input width " +
                    std::to_string(rows));
    }
}

std::unordered_map<SiteCoord, size_t, SiteCoordHash> index_of(const SparseTensor& t) {
    std::unordered_map<SiteCoord, size_t, SiteCoordHash> map;
    map.reserve(t.size() * 2);
    for (size_t i = 0; i < t.size(); ++i) map.emplace(t.coords[i], i);
    return map;
}

}  // namespace

std::vector<KernelOffset> cube3_offsets() {
    std::vector<KernelOffset> out;
    out.reserve(27);
    for (int32_t x = -1; x <= 1; ++x)
        for (int32_t y = -1; y <= 1; ++y)
            for (int32_t z = -1; z <= 1; ++z) out.push_back({x, y, z});
    return out;
}

std::vector<KernelOffset> cube2_offsets() {
    std::vector<KernelOffset> out;
    out.reserve(8);
    for (int32_t x = 0; x <= 1; ++x)
        for (int32_t y = 0; y <= 1; ++y)
            for (int32_t z = 0; z <= 1; ++z) out.push_back({x, y, z});
    return out;
}

std::vector<KernelOffset> point_offset() { return {{0, 0, 0}}; }

SparseTensor sparse_conv(const SparseTensor& input, const SparseKernel& kernel,
                         std::vector<SiteCoord> out_coords, int coord_stride) {
    check_kernel(kernel, input);
    const auto in_index = index_of(input);
    const int n_out = kernel.n_out();

    SparseTensor out;
    out.stride = input.stride;
    out.coords = std::move(out_coords);
    out.feats = FeatureMatrix::Zero(static_cast<Eigen::Index>(out.coords.size()), n_out);

    for (size_t o = 0; o < out.coords.size(); ++o) {
        const SiteCoord& u = out.coords[o];
        auto row = out.feats.row(static_cast<Eigen::Index>(o));
        for (size_t ki = 0; ki < kernel.offsets.size(); ++ki) {
            const KernelOffset& off = kernel.offsets[ki];
            const SiteCoord probe = {u.b, coord_stride * u.x + off[0],
                                     coord_stride * u.y + off[1], coord_stride * u.z + off[2]};
            auto it = in_index.find(probe);
            if (it == in_index.end()) continue;
            row += input.feats.row(static_cast<Eigen::Index>(it->second)) * kernel.weights[ki];
        }
        if (kernel.bias) row += kernel.bias->transpose();
    }
    return out;
}

SparseTensor submanifold_conv(const SparseTensor& input, const SparseKernel& kernel) {
    return sparse_conv(input, kernel, input.coords, 1);
}

SparseTensor downsample_conv(const SparseTensor& input, const SparseKernel& kernel) {
    std::vector<SiteCoord> out_coords;
    out_coords.reserve(input.size());
    for (const auto& c : input.coords) {
        out_coords.push_back({c.b, floor_div2(c.x), floor_div2(c.y), floor_div2(c.z)});
    }
    std::sort(out_coords.begin(), out_coords.end());
    out_coords.erase(std::unique(out_coords.begin(), out_coords.end()), out_coords.end());

    SparseTensor out = sparse_conv(input, kernel, std::move(out_coords), 2);
    out.stride = input.stride * 2;
    return out;
}

SparseTensor transposed_conv(const SparseTensor& input, const SparseKernel& kernel) {
    check_kernel(kernel, input);
    if (input.stride < 2) {
        throw Error("transposed conv '" + kernel.name + "': input stride must be >= 2");
    }

    std::vector<SiteCoord> out_coords;
    out_coords.reserve(input.size() * kernel.offsets.size());
    for (const auto& u : input.coords) {
        for (const auto& off : kernel.offsets) {
            out_coords.push_back({u.b, 2 * u.x + off[0], 2 * u.y + off[1], 2 * u.z + off[2]});
        }
    }
    std::sort(out_coords.begin(), out_coords.end());
    out_coords.erase(std::unique(out_coords.begin(), out_coords.end()), out_coords.end());

    std::unordered_map<SiteCoord, size_t, SiteCoordHash> out_index;
    out_index.reserve(out_coords.size() * 2);
    for (size_t i = 0; i < out_coords.size(); ++i) out_index.emplace(out_coords[i], i);

    SparseTensor out;
    out.stride = input.stride / 2;
    out.feats =
        FeatureMatrix::Zero(static_cast<Eigen::Index>(out_coords.size()), kernel.n_out());
    for (size_t i = 0; i < input.size(); ++i) {
        const SiteCoord& u = input.coords[i];
        for (size_t ki = 0; ki < kernel.offsets.size(); ++ki) {
            const KernelOffset& off = kernel.offsets[ki];
            const SiteCoord target = {u.b, 2 * u.x + off[0], 2 * u.y + off[1],
                                      2 * u.z + off[2]};
            out.feats.row(static_cast<Eigen::Index>(out_index.at(target))) +=
                input.feats.row(static_cast<Eigen::Index>(i)) * kernel.weights[ki];
        }
    }
    if (kernel.bias) out.feats.rowwise() += kernel.bias->transpose();
    out.coords = std::move(out_coords);
    return out;
}

}  // namespace pickpoint
