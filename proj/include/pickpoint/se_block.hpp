// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "pickpoint/sparse_conv.hpp"
#include "pickpoint/sparse_tensor.hpp"

namespace pickpoint {

/// Squeeze-and-excitation bottleneck: two fully connected maps C -> C/r -> C.
struct SeWeights {
    Eigen::MatrixXd w1;  // C x C/r
    Eigen::VectorXd b1;  // C/r
    Eigen::MatrixXd w2;  // C/r x C
    Eigen::VectorXd b2;  // C
    std::string name;

    int channels() const { return static_cast<int>(w1.rows()); }
    int ratio() const { return w1.cols() > 0 ? static_cast<int>(w1.rows() / w1.cols()) : 0; }
};

/// Channel attention over occupied sites: s = sigmoid(L2(ReLU(L1(mean))))
/// computed once per batch, every feature row scaled elementwise by its
/// batch's s. Coordinates unchanged; empty input passes through.
SparseTensor se_forward(const SparseTensor& input, const SeWeights& se);

/// Residual unit with channel attention on the residual branch:
/// out = ReLU(shortcut(x) + SE(conv2(ReLU(conv1(x))))). conv1/conv2 are
/// submanifold 3x3x3 convolutions; the shortcut is the identity when
/// channel counts match, else the 1x1x1 projection (required then).
struct SeResBlockWeights {
    SparseKernel conv1;
    SparseKernel conv2;
    SeWeights se;
    std::optional<SparseKernel> projection;
    std::string name;
};

SparseTensor se_res_block(const SparseTensor& input, const SeResBlockWeights& w);

}  // namespace pickpoint
