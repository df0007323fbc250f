// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pickpoint {

struct ColoredPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    uint8_t r = 255;
    uint8_t g = 255;
    uint8_t b = 255;
};

/// Ordered colored point set. Order is semantically meaningful: stitching
/// and filtering preserve it.
struct ColoredPointCloud {
    std::vector<ColoredPoint> points;
    std::string frame_label;  // e.g. "camera:A", "base"; empty = untagged

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Block concatenation: output holds all inputs' points in input order.
ColoredPointCloud concat(std::span<const ColoredPointCloud> clouds);

}  // namespace pickpoint
