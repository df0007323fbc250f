// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "pickpoint/point_cloud.hpp"

namespace pickpoint {

enum class CloudFormat { Ply, Pcd };
enum class CloudWriteFormat { PlyAscii, PlyBinaryLe };

/// Reads a colored cloud. PLY: ascii / binary_little_endian, float or
/// double x y z, integer red green blue. PCD: version 0.7, fields
/// x y z [rgb], ascii or binary, packed-float rgb decoded bitwise.
/// Missing color defaults to white (255,255,255) with a warning.
ColoredPointCloud read_cloud(const std::filesystem::path& path, CloudFormat format);

/// Infers the format from the file extension (.ply / .pcd).
ColoredPointCloud read_cloud(const std::filesystem::path& path);

/// Positions are stored as 32-bit floats, colors as 8-bit channels; the
/// file re-reads to an identical cloud after one float32 round-trip.
void write_cloud(const ColoredPointCloud& cloud, const std::filesystem::path& path,
                 CloudWriteFormat format);

}  // namespace pickpoint
