// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_PLY_IO_HPP
#define CLOUDGAUGE_PLY_IO_HPP

#include <filesystem>
#include <optional>
#include <string_view>

#include "cloudgauge/point_cloud.hpp"

namespace cloudgauge {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// Reads the vertex element of a PLY 1.0 file (ascii or binary_little_endian).
///
/// x,y,z and nx,ny,nz must be float or double, red,green,blue uchar. Other
/// vertex properties and other elements are skipped; unknown vertex
/// properties produce a warning on std::clog. When `precision` is not given
/// it is inferred for integral clouds and left unset otherwise.
///
/// Throws DataError naming the line (ascii) or byte offset (binary) of the
/// first problem.
PointCloud read_ply(const std::filesystem::path& path,
                    std::optional<int> precision = std::nullopt);

/// Parses PLY content already held in memory. `source` names it in errors.
PointCloud parse_ply(std::string_view bytes, std::optional<int> precision = std::nullopt,
                     std::string_view source = "<memory>");

/// Writes points plus colors and normals when present. Binary output stores
/// coordinates and normals as double; ascii output uses 9 significant digits.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

std::string serialize_ply(const PointCloud& cloud, PlyFormat format);

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_PLY_IO_HPP
