// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/point_cloud.hpp"

namespace pickpoint {

ColoredPointCloud concat(std::span<const ColoredPointCloud> clouds) {
    ColoredPointCloud out;
    size_t total = 0;
    for (const auto& c : clouds) total += c.size();
    out.points.reserve(total);
    for (const auto& c : clouds) {
        out.points.insert(out.points.end(), c.points.begin(), c.points.end());
    }
    return out;
}

}  // namespace pickpoint
