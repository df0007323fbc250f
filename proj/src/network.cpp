// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/network.hpp"

#include <cmath>

#include "pickpoint/error.hpp"
#include "pickpoint/rng.hpp"

namespace pickpoint {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const TensorBlob& require_tensor(const NetworkWeights& w, const std::string& name) {
    auto it = w.tensors.find(name);
    if (it == w.tensors.end()) throw Error("missing weight tensor '" + name + "'");
    return it->second;
}

void require_dims(const TensorBlob& blob, const std::string& name,
                  std::initializer_list<uint32_t> dims) {
    if (blob.dims.size() != dims.size() ||
        !std::equal(blob.dims.begin(), blob.dims.end(), dims.begin())) {
        std::string want, got;
        for (uint32_t d : dims) want += std::to_string(d) + " ";
        for (uint32_t d : blob.dims) got += std::to_string(d) + " ";
        throw Error("weight tensor '" + name + "': expected shape [ " + want + "], got [ " +
                    got + "]");
    }
}

// Kernel tensors are [K, N_in, N_out] with the offset set implied by K:
// 27 -> 3x3x3, 8 -> {0,1}^3, 1 -> single zero offset.
std::vector<KernelOffset> offsets_for(uint32_t k, const std::string& name) {
    if (k == 27) return cube3_offsets();
    if (k == 8) return cube2_offsets();
    if (k == 1) return point_offset();
    throw Error("weight tensor '" + name + "': unsupported kernel size " + std::to_string(k));
}

SparseKernel kernel_from(const NetworkWeights& w, const std::string& name, uint32_t k,
                         uint32_t n_in, uint32_t n_out) {
    const TensorBlob& blob = require_tensor(w, name + ".w");
    require_dims(blob, name + ".w", {k, n_in, n_out});

    SparseKernel kernel;
    kernel.name = name;
    kernel.offsets = offsets_for(k, name);
    kernel.weights.reserve(k);
    const size_t mat = static_cast<size_t>(n_in) * n_out;
    for (uint32_t i = 0; i < k; ++i) {
        Eigen::MatrixXd m(n_in, n_out);
        for (uint32_t r = 0; r < n_in; ++r)
            for (uint32_t c = 0; c < n_out; ++c)
                m(r, c) = blob.values[i * mat + r * n_out + c];
        kernel.weights.push_back(std::move(m));
    }
    const TensorBlob& bias = require_tensor(w, name + ".b");
    require_dims(bias, name + ".b", {n_out});
    kernel.bias = Eigen::Map<const Eigen::VectorXd>(bias.values.data(), n_out);
    return kernel;
}

SeWeights se_from(const NetworkWeights& w, const std::string& name, uint32_t channels) {
    const uint32_t hidden = channels / kSeRatio;
    SeWeights se;
    se.name = name;
    const TensorBlob& w1 = require_tensor(w, name + ".fc1.w");
    require_dims(w1, name + ".fc1.w", {channels, hidden});
    se.w1 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(w1.values.data(), channels, hidden);
    const TensorBlob& b1 = require_tensor(w, name + ".fc1.b");
    require_dims(b1, name + ".fc1.b", {hidden});
    se.b1 = Eigen::Map<const Eigen::VectorXd>(b1.values.data(), hidden);
    const TensorBlob& w2 = require_tensor(w, name + ".fc2.w");
    require_dims(w2, name + ".fc2.w", {hidden, channels});
    se.w2 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(w2.values.data(), hidden, channels);
    const TensorBlob& b2 = require_tensor(w, name + ".fc2.b");
    require_dims(b2, name + ".fc2.b", {channels});
    se.b2 = Eigen::Map<const Eigen::VectorXd>(b2.values.data(), channels);
    return se;
}

SeResBlockWeights block_from(const NetworkWeights& w, const std::string& name,
                             uint32_t channels) {
    SeResBlockWeights block;
    block.name = name;
    block.conv1 = kernel_from(w, name + ".conv1", 27, channels, channels);
    block.conv2 = kernel_from(w, name + ".conv2", 27, channels, channels);
    block.se = se_from(w, name + ".se", channels);
    return block;
}

void check_fingerprint(const NetworkWeights& w) {
    if (w.fingerprint != kArchFingerprint) {
        throw Error("weights architecture fingerprint mismatch: expected '" +
                    std::string(kArchFingerprint) + "', got '" + w.fingerprint + "'");
    }
}

}  // namespace

std::array<SparseTensor, 4> backbone_forward(const SparseTensor& input,
                                             const NetworkWeights& weights) {
    check_fingerprint(weights);
    if (input.stride != 1) throw Error("backbone: input must be a stride-1 tensor");
    if (!input.empty() && input.channels() != kInputChannels) {
        throw Error("backbone: input must have " + std::to_string(kInputChannels) +
                    " channels");
    }

    SparseTensor x = submanifold_conv(
        input, kernel_from(weights, "stem", 27, kInputChannels, kBackboneChannels[0]));

    std::array<SparseTensor, 4> levels;
    int in_ch = kBackboneChannels[0];
    for (int stage = 0; stage < 4; ++stage) {
        const std::string name = "stage" + std::to_string(stage + 1);
        const int out_ch = kBackboneChannels[stage];
        x = downsample_conv(x, kernel_from(weights, name + ".down", 8, in_ch, out_ch));
        x = se_res_block(x, block_from(weights, name, out_ch));
        levels[stage] = x;
        in_ch = out_ch;
    }
    return levels;
}

std::array<SparseTensor, 4> neck_forward(const std::array<SparseTensor, 4>& levels,
                                         const NetworkWeights& weights) {
    check_fingerprint(weights);
    std::array<SparseTensor, 4> out;

    auto project = [&](const SparseTensor& x, int level_index, uint32_t in_ch) {
        const std::string name = "neck.out" + std::to_string(level_index + 1);
        return submanifold_conv(x, kernel_from(weights, name, 1, in_ch, kNeckChannels));
    };
    auto maybe_prune = [&](SparseTensor x, int level_index, uint32_t in_ch) {
        const std::string name = "neck.prune" + std::to_string(level_index + 1);
        if (!weights.tensors.contains(name + ".w")) return x;  // pass-through
        const SparseTensor scores =
            submanifold_conv(x, kernel_from(weights, name, 1, in_ch, 1));
        std::vector<double> probs(scores.size());
        for (size_t i = 0; i < scores.size(); ++i) {
            probs[i] = sigmoid(scores.feats(static_cast<Eigen::Index>(i), 0));
        }
        return prune(x, probs, 0.5);
    };

    SparseTensor x = levels[3];
    out[3] = project(x, 3, kBackboneChannels[3]);
    for (int level = 2; level >= 0; --level) {
        const uint32_t deeper_ch = static_cast<uint32_t>(x.channels());
        const uint32_t lateral_ch = static_cast<uint32_t>(kBackboneChannels[level]);
        const std::string up_name = "neck.up" + std::to_string(level + 2);
        SparseTensor up =
            transposed_conv(x, kernel_from(weights, up_name, 8, deeper_ch, lateral_ch));
        x = sparse_add(up, levels[level]);
        x = maybe_prune(std::move(x), level, lateral_ch);
        out[level] = project(x, level, lateral_ch);
    }
    return out;
}

std::array<HeadLevelOutput, 4> head_forward(const std::array<SparseTensor, 4>& levels,
                                            const NetworkWeights& weights) {
    check_fingerprint(weights);
    const SparseKernel cls = kernel_from(weights, "head.cls", 1, kNeckChannels, 1);
    const SparseKernel reg = kernel_from(weights, "head.reg", 1, kNeckChannels, 6);
    const SparseKernel cnt = kernel_from(weights, "head.cnt", 1, kNeckChannels, 1);

    std::array<HeadLevelOutput, 4> out;
    for (int level = 0; level < 4; ++level) {
        const SparseTensor& x = levels[level];
        const SparseTensor cls_out = submanifold_conv(x, cls);
        const SparseTensor reg_out = submanifold_conv(x, reg);
        const SparseTensor cnt_out = submanifold_conv(x, cnt);
        out[level].stride = x.stride;
        out[level].sites.reserve(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            HeadSite site;
            site.coord = x.coords[i];
            site.class_prob = sigmoid(cls_out.feats(static_cast<Eigen::Index>(i), 0));
            for (int c = 0; c < 6; ++c) {
                site.box_params[static_cast<size_t>(c)] =
                    reg_out.feats(static_cast<Eigen::Index>(i), c);
            }
            site.centerness = sigmoid(cnt_out.feats(static_cast<Eigen::Index>(i), 0));
            out[level].sites.push_back(site);
        }
    }
    return out;
}

namespace {

struct WeightBuilder {
    NetworkWeights w;

    void tensor(const std::string& name, std::vector<uint32_t> dims,
                std::vector<double> values) {
        TensorBlob blob;
        blob.dims = std::move(dims);
        // Snap to float32 so the on-disk round-trip is bit-exact.
        for (double& v : values) v = static_cast<double>(static_cast<float>(v));
        blob.values = std::move(values);
        w.tensors.emplace(name, std::move(blob));
    }

    void zeros(const std::string& name, std::vector<uint32_t> dims) {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        tensor(name, std::move(dims), std::vector<double>(n, 0.0));
    }

    void conv_zero(const std::string& name, uint32_t k, uint32_t n_in, uint32_t n_out) {
        zeros(name + ".w", {k, n_in, n_out});
        zeros(name + ".b", {n_out});
    }

    void se_zero(const std::string& name, uint32_t channels) {
        const uint32_t hidden = channels / kSeRatio;
        zeros(name + ".fc1.w", {channels, hidden});
        zeros(name + ".fc1.b", {hidden});
        zeros(name + ".fc2.w", {hidden, channels});
        zeros(name + ".fc2.b", {channels});
    }
};

std::vector<double> random_values(Rng& rng, size_t n, double scale) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal(0.0, scale);
    return v;
}

}  // namespace

NetworkWeights make_random_weights(uint64_t seed) {
    Rng rng(seed);
    WeightBuilder b;
    b.w.version = kWeightFormatVersion;
    b.w.fingerprint = kArchFingerprint;

    auto conv = [&](const std::string& name, uint32_t k, uint32_t n_in, uint32_t n_out) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(k * n_in));
        b.tensor(name + ".w", {k, n_in, n_out},
                 random_values(rng, static_cast<size_t>(k) * n_in * n_out, scale));
        b.tensor(name + ".b", {n_out}, random_values(rng, n_out, 0.1));
    };
    auto se = [&](const std::string& name, uint32_t channels) {
        const uint32_t hidden = channels / kSeRatio;
        b.tensor(name + ".fc1.w", {channels, hidden},
                 random_values(rng, static_cast<size_t>(channels) * hidden,
                               1.0 / std::sqrt(channels)));
        b.tensor(name + ".fc1.b", {hidden}, random_values(rng, hidden, 0.1));
        b.tensor(name + ".fc2.w", {hidden, channels},
                 random_values(rng, static_cast<size_t>(hidden) * channels,
                               1.0 / std::sqrt(hidden)));
        b.tensor(name + ".fc2.b", {channels}, random_values(rng, channels, 0.1));
    };

    conv("stem", 27, kInputChannels, kBackboneChannels[0]);
    uint32_t in_ch = kBackboneChannels[0];
    for (int stage = 0; stage < 4; ++stage) {
        const std::string name = "stage" + std::to_string(stage + 1);
        const uint32_t ch = kBackboneChannels[stage];
        conv(name + ".down", 8, in_ch, ch);
        conv(name + ".conv1", 27, ch, ch);
        conv(name + ".conv2", 27, ch, ch);
        se(name + ".se", ch);
        in_ch = ch;
    }
    conv("neck.up4", 8, 256, 256);
    conv("neck.up3", 8, 256, 128);
    conv("neck.up2", 8, 128, 64);
    conv("neck.out1", 1, 64, kNeckChannels);
    conv("neck.out2", 1, 128, kNeckChannels);
    conv("neck.out3", 1, 256, kNeckChannels);
    conv("neck.out4", 1, 256, kNeckChannels);
    conv("head.cls", 1, kNeckChannels, 1);
    conv("head.reg", 1, kNeckChannels, 6);
    conv("head.cnt", 1, kNeckChannels, 1);
    return b.w;
}

NetworkWeights make_demo_weights() {
    WeightBuilder b;
    b.w.version = kWeightFormatVersion;
    b.w.fingerprint = kArchFingerprint;

    // Stem: pass RGB through channels 0..2, put the stem-color discriminant
    // in channel 3. Weights act on normalized [0,1] channels.
    {
        const uint32_t k = 27, n_in = 3, n_out = 64;
        std::vector<double> v(static_cast<size_t>(k) * n_in * n_out, 0.0);
        const uint32_t center = 13;  // (0,0,0) in lexicographic 3x3x3 order
        auto at = [&](uint32_t off, uint32_t r, uint32_t c) -> double& {
            return v[static_cast<size_t>(off) * n_in * n_out + r * n_out + c];
        };
        at(center, 0, 0) = 1.0;
        at(center, 1, 1) = 1.0;
        at(center, 2, 2) = 1.0;
        // discriminant: -0.84*r - 1.92*g + 5.28*b - 2.04, positive only for
        // the purple-brown stem color of the synthetic scenes
        at(center, 0, 3) = -0.84;
        at(center, 1, 3) = -1.92;
        at(center, 2, 3) = 5.28;
        b.tensor("stem.w", {k, n_in, n_out}, std::move(v));
        std::vector<double> bias(n_out, 0.0);
        bias[3] = -2.04;
        b.tensor("stem.b", {n_out}, std::move(bias));
    }

    // Stage 1 pools the discriminant over each 2x2x2 child block.
    {
        const uint32_t k = 8, ch = 64;
        std::vector<double> v(static_cast<size_t>(k) * ch * ch, 0.0);
        for (uint32_t off = 0; off < k; ++off)
            for (uint32_t c = 0; c < ch; ++c)
                v[static_cast<size_t>(off) * ch * ch + c * ch + c] = 1.0;
        b.tensor("stage1.down.w", {k, ch, ch}, std::move(v));
        b.zeros("stage1.down.b", {ch});
    }
    b.conv_zero("stage1.conv1", 27, 64, 64);
    b.conv_zero("stage1.conv2", 27, 64, 64);
    b.se_zero("stage1.se", 64);

    b.conv_zero("stage2.down", 8, 64, 128);
    b.conv_zero("stage2.conv1", 27, 128, 128);
    b.conv_zero("stage2.conv2", 27, 128, 128);
    b.se_zero("stage2.se", 128);
    b.conv_zero("stage3.down", 8, 128, 256);
    b.conv_zero("stage3.conv1", 27, 256, 256);
    b.conv_zero("stage3.conv2", 27, 256, 256);
    b.se_zero("stage3.se", 256);
    b.conv_zero("stage4.down", 8, 256, 256);
    b.conv_zero("stage4.conv1", 27, 256, 256);
    b.conv_zero("stage4.conv2", 27, 256, 256);
    b.se_zero("stage4.se", 256);

    b.conv_zero("neck.up4", 8, 256, 256);
    b.conv_zero("neck.up3", 8, 256, 128);
    b.conv_zero("neck.up2", 8, 128, 64);

    // Level-1 projection forwards the pooled discriminant to head channel 0.
    {
        std::vector<double> v(static_cast<size_t>(64) * kNeckChannels, 0.0);
        v[3 * kNeckChannels + 0] = 1.0;
        b.tensor("neck.out1.w", {1, 64, static_cast<uint32_t>(kNeckChannels)}, std::move(v));
        b.zeros("neck.out1.b", {static_cast<uint32_t>(kNeckChannels)});
    }
    b.conv_zero("neck.out2", 1, 128, kNeckChannels);
    b.conv_zero("neck.out3", 1, 256, kNeckChannels);
    b.conv_zero("neck.out4", 1, 256, kNeckChannels);

    // Classifier: logit = 6 * pooled discriminant - 2.5. Sites without stem
    // evidence stay far below the 0.3 score threshold on every level.
    {
        std::vector<double> v(static_cast<size_t>(kNeckChannels), 0.0);
        v[0] = 6.0;
        b.tensor("head.cls.w", {1, static_cast<uint32_t>(kNeckChannels), 1}, std::move(v));
        b.tensor("head.cls.b", {1}, {-2.5});
    }
    // Regression: zero offsets, fixed box edge 2.5 cm at stride 2
    // (exp(log 1.25) * 2 * 0.01 m).
    {
        b.zeros("head.reg.w", {1, static_cast<uint32_t>(kNeckChannels), 6});
        const double log_size = std::log(1.25);
        b.tensor("head.reg.b", {6}, {0.0, 0.0, 0.0, log_size, log_size, log_size});
    }
    b.conv_zero("head.cnt", 1, kNeckChannels, 1);
    return b.w;
}

}  // namespace pickpoint
