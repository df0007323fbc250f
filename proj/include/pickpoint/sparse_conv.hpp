// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pickpoint/sparse_tensor.hpp"

namespace pickpoint {

using KernelOffset = std::array<int32_t, 3>;

/// 3x3x3 offsets in sorted lexicographic order; also the fixed weight and
/// accumulation enumeration order.
std::vector<KernelOffset> cube3_offsets();
/// {0,1}^3 offsets, used by stride-2 down/up convolutions.
std::vector<KernelOffset> cube2_offsets();
/// The single zero offset (1x1x1 convolution).
std::vector<KernelOffset> point_offset();

/// One N_in x N_out weight matrix per offset, optional shared bias.
struct SparseKernel {
    std::vector<KernelOffset> offsets;
    std::vector<Eigen::MatrixXd> weights;  // aligned with offsets
    std::optional<Eigen::VectorXd> bias;
    std::string name;  // used in error messages

    int n_in() const { return weights.empty() ? 0 : static_cast<int>(weights.front().rows()); }
    int n_out() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
};

/// Generalized sparse convolution: for each requested output site u,
/// out(u) = sum over kernel offsets i of in(coord_stride*u + i) * W_i,
/// summing only offsets that land on active input sites; sites with no
/// contributing offset receive the bias (or zero). Output tensor keeps the
/// input's stride; level bookkeeping is the caller's.
SparseTensor sparse_conv(const SparseTensor& input, const SparseKernel& kernel,
                         std::vector<SiteCoord> out_coords, int coord_stride = 1);

/// Convenience: sparse_conv with out_coords = input coordinates.
SparseTensor submanifold_conv(const SparseTensor& input, const SparseKernel& kernel);

/// Stride-2 convolution: output coordinates are the unique floor(u/2) of
/// the input coordinates, features evaluated at stride-1 inputs under the
/// stride-2 coordinate map; stride doubles.
SparseTensor downsample_conv(const SparseTensor& input, const SparseKernel& kernel);

/// Generative transposed convolution: candidate outputs {2u + i} for every
/// input site u and generative offset i; contributions accumulate on
/// collisions; stride halves. Requires input stride >= 2.
SparseTensor transposed_conv(const SparseTensor& input, const SparseKernel& kernel);

}  // namespace pickpoint
