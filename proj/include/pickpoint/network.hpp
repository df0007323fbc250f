// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pickpoint/se_block.hpp"
#include "pickpoint/sparse_conv.hpp"
#include "pickpoint/sparse_tensor.hpp"

namespace pickpoint {

/// Dense tensor record of a weight file: row-major values with shape.
struct TensorBlob {
    std::vector<uint32_t> dims;
    std::vector<double> values;  // stored as float32 on disk

    size_t element_count() const;
};

/// Named weight map plus format metadata. The architecture fingerprint
/// pins the channel plan the forward pass expects.
struct NetworkWeights {
    uint32_t version = 1;
    std::string fingerprint;
    std::map<std::string, TensorBlob> tensors;
};

inline constexpr uint32_t kWeightFormatVersion = 1;
inline constexpr const char* kArchFingerprint =
    "sparse-se-det/v1/in3/stages64-128-256-256/neck128/se16/head1-6-1";

inline constexpr std::array<int, 4> kBackboneChannels = {64, 128, 256, 256};
inline constexpr std::array<int, 4> kBackboneStrides = {2, 4, 8, 16};
inline constexpr int kNeckChannels = 128;
inline constexpr int kSeRatio = 16;
inline constexpr int kInputChannels = 3;

/// Binary weight file, little-endian: magic "SPNW", u32 format version,
/// fingerprint string, then repeated records (name, rank, dims, float32
/// payload). Bit-exact round-trip.
NetworkWeights load_weights(const std::filesystem::path& path);
void save_weights(const NetworkWeights& w, const std::filesystem::path& path);

/// Four-level backbone: 3x3x3 stem to 64 channels at stride 1, then per
/// stage a 2x2x2 stride-2 convolution followed by an SE-Res block, emitting
/// levels with channel widths (64, 128, 256, 256) at strides (2, 4, 8, 16).
/// Input must be a stride-1 3-channel tensor.
std::array<SparseTensor, 4> backbone_forward(const SparseTensor& input,
                                             const NetworkWeights& weights);

/// Top-down neck: generative transposed convolution of the deeper level,
/// feature addition with the lateral level, optional learned score pruning
/// (sigmoid >= 0.5; pass-through when the prune tensors are absent), and a
/// per-level 1x1x1 projection to the shared 128-channel head width.
std::array<SparseTensor, 4> neck_forward(const std::array<SparseTensor, 4>& levels,
                                         const NetworkWeights& weights);

struct HeadSite {
    SiteCoord coord;
    double class_prob = 0.0;             // sigmoid of the class logit
    std::array<double, 6> box_params{};  // dx, dy, dz, log w, log h, log l
    double centerness = 0.0;             // sigmoid of the centerness logit
};

struct HeadLevelOutput {
    int stride = 1;
    std::vector<HeadSite> sites;
};

/// Parallel 1x1x1 classification / box-regression / centerness branches,
/// weights shared across levels.
std::array<HeadLevelOutput, 4> head_forward(const std::array<SparseTensor, 4>& levels,
                                            const NetworkWeights& weights);

/// Seeded random initialization of the full layer map (float32-snapped so
/// save/load round-trips are bit-exact).
NetworkWeights make_random_weights(uint64_t seed);

/// Hand-constructed detector: a linear color discriminant tuned to the
/// synthetic stem color fires the level-1 classification branch; the
/// regression bias emits fixed 2.5 cm boxes at stride-2 cell centers.
NetworkWeights make_demo_weights();

}  // namespace pickpoint
