// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "pickpoint/detect.hpp"
#include "pickpoint/error.hpp"
#include "pickpoint/network.hpp"
#include "pickpoint/rng.hpp"

using namespace pickpoint;

namespace {

int32_t floor_div_pow2(int32_t v, int exp) {
    for (int i = 0; i < exp; ++i) v = v >= 0 ? v / 2 : (v - 1) / 2;
    return v;
}

}  // namespace

TEST_CASE("backbone emits the contracted channel plan and strides") {
    Rng rng(71);
    const NetworkWeights w = make_random_weights(1);
    const SparseTensor input = oracles::random_tensor(rng, 6, 3, 0.3);
    const auto levels = backbone_forward(input, w);
    for (int i = 0; i < 4; ++i) {
        CHECK(levels[static_cast<size_t>(i)].channels() == kBackboneChannels[static_cast<size_t>(i)]);
        CHECK(levels[static_cast<size_t>(i)].stride == kBackboneStrides[static_cast<size_t>(i)]);
    }
}

TEST_CASE("single-site input walks down the coordinate pyramid") {
    const NetworkWeights w = make_random_weights(2);
    SparseTensor input;
    input.stride = 1;
    input.coords = {{0, 11, 6, 9}};
    input.feats = FeatureMatrix::Ones(1, 3);
    const auto levels = backbone_forward(input, w);
    for (int level = 0; level < 4; ++level) {
        REQUIRE(levels[static_cast<size_t>(level)].size() == 1);
        const SiteCoord& c = levels[static_cast<size_t>(level)].coords[0];
        CHECK(c.x == floor_div_pow2(11, level + 1));
        CHECK(c.y == floor_div_pow2(6, level + 1));
        CHECK(c.z == floor_div_pow2(9, level + 1));
    }
}

TEST_CASE("backbone matches the staged dense oracle") {
    Rng rng(72);
    const NetworkWeights w = make_random_weights(3);
    const SparseTensor input = oracles::random_tensor(rng, 5, 3, 0.4);
    const auto levels = backbone_forward(input, w);
    const auto expected = oracles::dense_backbone(input, w);
    for (int stage = 0; stage < 4; ++stage) {
        const SparseTensor& level = levels[static_cast<size_t>(stage)];
        const oracles::DenseGrid& x = expected[static_cast<size_t>(stage)];
        REQUIRE(level.size() == x.cells.size());
        for (size_t i = 0; i < level.size(); ++i) {
            const SiteCoord& c = level.coords[i];
            const Eigen::VectorXd* cell = x.at(c.b, c.x, c.y, c.z);
            REQUIRE(cell != nullptr);
            CHECK((level.feats.row(static_cast<Eigen::Index>(i)).transpose() - *cell)
                      .cwiseAbs()
                      .maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("backbone rejects bad inputs and names missing layers") {
    NetworkWeights w = make_random_weights(4);
    Rng rng(73);
    SparseTensor bad_stride = oracles::random_tensor(rng, 3, 3, 0.5);
    bad_stride.stride = 2;
    CHECK_THROWS_AS(backbone_forward(bad_stride, w), Error);

    SparseTensor bad_channels = oracles::random_tensor(rng, 3, 5, 0.5);
    CHECK_THROWS_AS(backbone_forward(bad_channels, w), Error);

    w.tensors.erase("stage2.conv1.w");
    SparseTensor ok = oracles::random_tensor(rng, 3, 3, 0.5);
    try {
        backbone_forward(ok, w);
        FAIL("expected missing-layer error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage2.conv1.w") != std::string::npos);
    }
}

TEST_CASE("neck produces shared-width levels at unchanged strides") {
    Rng rng(74);
    const NetworkWeights w = make_random_weights(5);
    const SparseTensor input = oracles::random_tensor(rng, 6, 3, 0.4);
    const auto levels = backbone_forward(input, w);
    const auto neck = neck_forward(levels, w);
    for (int i = 0; i < 4; ++i) {
        CHECK(neck[static_cast<size_t>(i)].channels() == kNeckChannels);
        CHECK(neck[static_cast<size_t>(i)].stride == kBackboneStrides[static_cast<size_t>(i)]);
        // jump-joining only adds upsampled sites: every lateral site survives
        std::set<SiteCoord> sites(neck[static_cast<size_t>(i)].coords.begin(),
                                  neck[static_cast<size_t>(i)].coords.end());
        for (const auto& c : levels[static_cast<size_t>(i)].coords) {
            CHECK(sites.contains(c));
        }
    }
}

TEST_CASE("neck pruning drops sites below the probability threshold") {
    Rng rng(75);
    NetworkWeights w = make_random_weights(6);
    const SparseTensor input = oracles::random_tensor(rng, 6, 3, 0.4);
    const auto levels = backbone_forward(input, w);
    const auto baseline = neck_forward(levels, w);

    // a strongly negative prune bias kills every level-1 site
    TensorBlob prune_w;
    prune_w.dims = {1, 64, 1};
    prune_w.values.assign(64, 0.0);
    TensorBlob prune_b;
    prune_b.dims = {1};
    prune_b.values = {-10.0};
    w.tensors["neck.prune1.w"] = prune_w;
    w.tensors["neck.prune1.b"] = prune_b;
    const auto pruned = neck_forward(levels, w);
    CHECK(baseline[0].size() > 0);
    CHECK(pruned[0].size() == 0);

    // neutral scores (sigmoid(0) = 0.5) keep everything
    w.tensors["neck.prune1.b"].values = {0.0};
    const auto kept = neck_forward(levels, w);
    CHECK(kept[0].size() == baseline[0].size());
}

TEST_CASE("head closed form under zero weights") {
    NetworkWeights w = make_random_weights(7);
    for (const std::string branch : {"head.cls", "head.reg", "head.cnt"}) {
        auto& blob = w.tensors.at(branch + ".w");
        std::fill(blob.values.begin(), blob.values.end(), 0.0);
        auto& bias = w.tensors.at(branch + ".b");
        std::fill(bias.values.begin(), bias.values.end(), 0.0);
    }
    Rng rng(76);
    const SparseTensor input = oracles::random_tensor(rng, 5, 3, 0.4);
    const auto neck = neck_forward(backbone_forward(input, w), w);
    const auto head = head_forward(neck, w);
    size_t sites = 0;
    for (const auto& level : head) {
        for (const auto& site : level.sites) {
            CHECK(site.class_prob == 0.5);
            CHECK(site.centerness == 0.5);
            for (double v : site.box_params) CHECK(v == 0.0);
            ++sites;
        }
    }
    CHECK(sites > 0);
}

TEST_CASE("head matches a dense 1x1 evaluation") {
    Rng rng(77);
    const NetworkWeights w = make_random_weights(8);
    const SparseTensor input = oracles::random_tensor(rng, 5, 3, 0.4);
    const auto neck = neck_forward(backbone_forward(input, w), w);
    const auto head = head_forward(neck, w);

    const auto& cls_w = w.tensors.at("head.cls.w");
    const auto& cls_b = w.tensors.at("head.cls.b");
    for (int level = 0; level < 4; ++level) {
        const SparseTensor& x = neck[static_cast<size_t>(level)];
        REQUIRE(head[static_cast<size_t>(level)].sites.size() == x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            double logit = cls_b.values[0];
            for (int c = 0; c < kNeckChannels; ++c) {
                logit += x.feats(static_cast<Eigen::Index>(i), c) *
                         cls_w.values[static_cast<size_t>(c)];
            }
            const double expected = 1.0 / (1.0 + std::exp(-logit));
            CHECK(std::abs(head[static_cast<size_t>(level)].sites[i].class_prob - expected) <=
                  1e-10);
        }
    }
}

TEST_CASE("weights save/load round-trip is exact and checked") {
    const NetworkWeights w = make_random_weights(9);
    const auto path = std::filesystem::temp_directory_path() / "pickpoint_weights_test.bin";
    save_weights(w, path);
    const NetworkWeights loaded = load_weights(path);
    CHECK(loaded.version == w.version);
    CHECK(loaded.fingerprint == w.fingerprint);
    REQUIRE(loaded.tensors.size() == w.tensors.size());
    for (const auto& [name, blob] : w.tensors) {
        const auto& other = loaded.tensors.at(name);
        REQUIRE(other.dims == blob.dims);
        REQUIRE(other.values.size() == blob.values.size());
        for (size_t i = 0; i < blob.values.size(); ++i) {
            CHECK(other.values[i] == blob.values[i]);
        }
    }

    // forward pass identical before/after the round-trip
    Rng rng(78);
    const SparseTensor input = oracles::random_tensor(rng, 4, 3, 0.5);
    const auto before = head_forward(neck_forward(backbone_forward(input, w), w), w);
    const auto after =
        head_forward(neck_forward(backbone_forward(input, loaded), loaded), loaded);
    for (int level = 0; level < 4; ++level) {
        REQUIRE(before[static_cast<size_t>(level)].sites.size() ==
                after[static_cast<size_t>(level)].sites.size());
        for (size_t i = 0; i < before[static_cast<size_t>(level)].sites.size(); ++i) {
            CHECK(before[static_cast<size_t>(level)].sites[i].class_prob ==
                  after[static_cast<size_t>(level)].sites[i].class_prob);
        }
    }
    std::filesystem::remove(path);
}

TEST_CASE("weight loader rejects truncated and foreign files") {
    const NetworkWeights w = make_demo_weights();
    const auto path = std::filesystem::temp_directory_path() / "pickpoint_weights_trunc.bin";
    save_weights(w, path);
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(load_weights(path), Error);

    std::ofstream bad(path, std::ios::binary);
    bad << "PLYX garbage";
    bad.close();
    CHECK_THROWS_AS(load_weights(path), Error);
    std::filesystem::remove(path);
}

TEST_CASE("golden weight file parses exactly and re-saves byte-identically") {
    // tests/data/golden_weights.spnw comes from an independent writer.
    const std::filesystem::path golden =
        std::filesystem::path(TEST_DATA_DIR) / "golden_weights.spnw";
    const NetworkWeights w = load_weights(golden);
    CHECK(w.version == 1);
    CHECK(w.fingerprint == "golden/fingerprint");
    REQUIRE(w.tensors.size() == 2);
    const TensorBlob& alpha = w.tensors.at("alpha");
    REQUIRE(alpha.dims == std::vector<uint32_t>{2, 3});
    const double alpha_expected[6] = {0.5, -1.25, 2.0, 3.5, -0.75, 0.125};
    for (int i = 0; i < 6; ++i) CHECK(alpha.values[static_cast<size_t>(i)] == alpha_expected[i]);
    const TensorBlob& beta = w.tensors.at("beta");
    REQUIRE(beta.dims == std::vector<uint32_t>{4});
    CHECK(beta.values == std::vector<double>{1.0, 2.0, 3.0, 4.0});

    const auto copy = std::filesystem::temp_directory_path() / "pickpoint_golden_copy.spnw";
    save_weights(w, copy);
    std::ifstream a(golden, std::ios::binary), b(copy, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                              std::istreambuf_iterator<char>());
    CHECK(bytes_a == bytes_b);
    std::filesystem::remove(copy);
}

TEST_CASE("weight loader rejects unknown format versions") {
    NetworkWeights w = make_demo_weights();
    w.version = 99;
    const auto path = std::filesystem::temp_directory_path() / "pickpoint_weights_v99.bin";
    save_weights(w, path);
    try {
        load_weights(path);
        FAIL("expected version error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("unsupported weight format version") == 0);
    }
    std::filesystem::remove(path);
}

TEST_CASE("fingerprint mismatch is rejected at forward time") {
    NetworkWeights w = make_random_weights(10);
    w.fingerprint = "something-else";
    Rng rng(79);
    const SparseTensor input = oracles::random_tensor(rng, 3, 3, 0.5);
    CHECK_THROWS_AS(backbone_forward(input, w), Error);
}

TEST_CASE("decode: empty below threshold, NMS keeps the best of overlaps") {
    // no site above threshold -> empty
    HeadLevelOutput level;
    level.stride = 2;
    HeadSite site;
    site.coord = {0, 3, 3, 3};
    site.class_prob = 0.2;
    site.centerness = 0.5;
    site.box_params = {0, 0, 0, 0, 0, 0};
    level.sites.push_back(site);
    const HeadLevelOutput levels[1] = {level};
    CHECK(decode_detections(levels, 0.01, 0.3, 0.5).empty());

    // two identical boxes, scores 0.9/0.8 -> only the stronger survives
    HeadLevelOutput dup;
    dup.stride = 2;
    HeadSite strong = site, weak = site;
    strong.class_prob = 0.9;
    strong.centerness = 1.0;
    weak.class_prob = 0.8;
    weak.centerness = 1.0;
    dup.sites = {strong, weak};
    const HeadLevelOutput dup_levels[1] = {dup};
    const auto boxes = decode_detections(dup_levels, 0.01, 0.3, 0.5);
    REQUIRE(boxes.size() == 1);
    CHECK(*boxes[0].score == doctest::Approx(0.9));
}

TEST_CASE("decode geometry: center and size recovery") {
    HeadLevelOutput level;
    level.stride = 4;
    HeadSite site;
    site.coord = {0, 2, -1, 0};
    site.class_prob = 1.0;
    site.centerness = 1.0;
    site.box_params = {0.005, -0.002, 0.0, std::log(0.5), 0.0, std::log(2.0)};
    level.sites.push_back(site);
    const HeadLevelOutput levels[1] = {level};
    const auto boxes = decode_detections(levels, 0.01, 0.1, 0.5);
    REQUIRE(boxes.size() == 1);
    const double cell = 4 * 0.01;
    CHECK(boxes[0].center[0] == doctest::Approx(2.5 * cell + 0.005));
    CHECK(boxes[0].center[1] == doctest::Approx(-0.5 * cell - 0.002));
    CHECK(boxes[0].center[2] == doctest::Approx(0.5 * cell));
    CHECK(boxes[0].size[0] == doctest::Approx(0.5 * cell));
    CHECK(boxes[0].size[1] == doctest::Approx(cell));
    CHECK(boxes[0].size[2] == doctest::Approx(2.0 * cell));
    CHECK(boxes[0].size[2] > 0.0);
}

TEST_CASE("constructed demo weights fire on a stem-colored cluster") {
    // A 4 cm column of stem-colored points, planted at a known location,
    // surrounded by fruit-colored points that must stay silent.
    ColoredPointCloud cloud;
    Rng rng(80);
    const double stem_x = 0.105, stem_y = 0.105, stem_z0 = 0.10;
    for (int i = 0; i < 300; ++i) {
        cloud.points.push_back({stem_x + rng.uniform(-0.004, 0.004),
                                stem_y + rng.uniform(-0.004, 0.004),
                                stem_z0 + rng.uniform(0.0, 0.04), 140, 64, 191});
    }
    for (int i = 0; i < 300; ++i) {
        cloud.points.push_back({stem_x + rng.uniform(-0.05, 0.05),
                                stem_y + rng.uniform(-0.05, 0.05),
                                stem_z0 - 0.06 + rng.uniform(0.0, 0.03), 204, 38, 38});
    }
    const SparseTensor input = build_sparse_tensor(cloud, 0.01);
    const NetworkWeights w = make_demo_weights();
    const auto detections =
        decode_detections(head_forward(neck_forward(backbone_forward(input, w), w), w), 0.01,
                          0.3, 0.5);
    REQUIRE(!detections.empty());
    // decoded center within one stride-2 voxel (2 cm) of the planted stem mid
    const double mid[3] = {stem_x, stem_y, stem_z0 + 0.02};
    bool found = false;
    for (const auto& box : detections) {
        const bool near = std::abs(box.center[0] - mid[0]) <= 0.02 &&
                          std::abs(box.center[1] - mid[1]) <= 0.02 &&
                          std::abs(box.center[2] - mid[2]) <= 0.02;
        found = found || near;
        // nothing fires over the fruit region
        CHECK(box.center[2] > stem_z0 - 0.03);
    }
    CHECK(found);
}
