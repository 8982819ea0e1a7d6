#pragma once

#include <cstdint>

#include "cns/point_cloud.hpp"

namespace cns {

// Cubic voxel grid anchored at `origin`. Two sessions that are compared
// against each other must share the same origin so that cell boundaries
// align.
struct VoxelParams {
  double resolution = 5.0;
  Vec3 origin{};
};

// Per-axis cell id with the floor convention: a point exactly on a boundary
// belongs to the higher-index cell.
struct VoxelId {
  std::int64_t ix, iy, iz;
  bool operator==(const VoxelId&) const = default;
  bool operator<(const VoxelId& o) const {
    if (ix != o.ix) return ix < o.ix;
    if (iy != o.iy) return iy < o.iy;
    return iz < o.iz;
  }
};

VoxelId voxel_id_of(const Vec3& p, const VoxelParams& params);

// One point per occupied voxel: the arithmetic centroid of the voxel's
// points (mean intensity when present). Output is ordered by lexicographic
// voxel id. Within a voxel the sum runs in coordinate-sorted order, so the
// result is bitwise identical under input permutation and any thread count.
PointCloud voxel_downsample(const PointCloud& cloud, const VoxelParams& params);

}  // namespace cns
