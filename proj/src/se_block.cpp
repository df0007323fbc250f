// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/se_block.hpp"

#include <cmath>

#include "pickpoint/error.hpp"

namespace pickpoint {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SparseTensor se_forward(const SparseTensor& input, const SeWeights& se) {
    if (input.empty()) return input;
    if (se.w1.rows() != input.feats.cols() || se.w2.cols() != input.feats.cols() ||
        se.w1.cols() != se.w2.rows() || se.b1.size() != se.w1.cols() ||
        se.b2.size() != se.w2.cols()) {
        throw Error("se block '" + se.name + "': weight shape mismatch for " +
                    std::to_string(input.feats.cols()) + " channels");
    }

    const auto pooled = global_avg_pool(input);
    std::map<int32_t, Eigen::VectorXd> scale;
    for (const auto& [batch, avg] : pooled) {
        Eigen::VectorXd hidden = (avg.transpose() * se.w1).transpose() + se.b1;
        hidden = hidden.cwiseMax(0.0);
        Eigen::VectorXd logits = (hidden.transpose() * se.w2).transpose() + se.b2;
        scale.emplace(batch, logits.unaryExpr([](double v) { return sigmoid(v); }));
    }

    SparseTensor out;
    out.stride = input.stride;
    out.coords = input.coords;
    out.feats = input.feats;
    for (size_t i = 0; i < out.size(); ++i) {
        out.feats.row(static_cast<Eigen::Index>(i)) = out.feats.row(static_cast<Eigen::Index>(i))
                                                          .cwiseProduct(
                                                              scale.at(out.coords[i].b).transpose());
    }
    return out;
}

SparseTensor se_res_block(const SparseTensor& input, const SeResBlockWeights& w) {
    SparseTensor branch = submanifold_conv(input, w.conv1);
    branch.feats = branch.feats.cwiseMax(0.0);
    branch = submanifold_conv(branch, w.conv2);
    branch = se_forward(branch, w.se);

    SparseTensor shortcut;
    if (w.conv2.n_out() == input.channels()) {
        shortcut = input;
    } else if (w.projection) {
        shortcut = submanifold_conv(input, *w.projection);
    } else {
        throw Error("se-res block '" + w.name +
                    "': channel count changes but projection layer is missing");
    }

    SparseTensor out = std::move(shortcut);
    out.feats += branch.feats;
    out.feats = out.feats.cwiseMax(0.0);
    return out;
}

}  // namespace pickpoint
