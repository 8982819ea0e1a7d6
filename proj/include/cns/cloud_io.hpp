#pragma once

#include <filesystem>

#include "cns/point_cloud.hpp"

namespace cns {

// XyzBinary: little-endian float32 records x,y,z,intensity (16 bytes/point),
// KITTI-style. XyzAscii: whitespace-separated "x y z [i]" lines, '#' comments.
enum class CloudFormat { XyzBinary, XyzAscii };

// Picks XyzAscii for .xyz/.txt/.asc, XyzBinary otherwise.
CloudFormat format_for_path(const std::filesystem::path& path);

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);

// One pose per line: "t tx ty tz qx qy qz qw", '#' comments.
Trajectory load_poses(const std::filesystem::path& path);
void save_poses(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace cns
