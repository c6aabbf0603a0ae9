#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "raylign/geometry.hpp"

namespace raylign::io {

/// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

/// Writes contents to a temp file in the same directory, then renames.
void atomic_write(const std::filesystem::path& path,
                  const std::string& contents);

/// Dispatches on extension: .xyz / .ply (case-insensitive).
PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path,
                       const PointCloud& cloud);

/// ASCII `x y z [nx ny nz]` per line; `#` starts a comment.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

/// PLY vertices (ascii or binary_little_endian), positions plus optional
/// normals; other elements and properties are skipped. Writes ASCII.
PointCloud read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// 4x4 row-major whitespace-separated text. Readers check the last row.
RigidTransform read_transform(const std::filesystem::path& path);
void write_transform(const std::filesystem::path& path,
                     const RigidTransform& t);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace raylign::io
