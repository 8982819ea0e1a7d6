#include "cns/voxel.hpp"

#include <algorithm>
#include <omp.h>

namespace cns {

VoxelId voxel_id_of(const Vec3& p, const VoxelParams& params) {
  const double inv = 1.0 / params.resolution;
  return {static_cast<std::int64_t>(std::floor((p.x - params.origin.x) * inv)),
          static_cast<std::int64_t>(std::floor((p.y - params.origin.y) * inv)),
          static_cast<std::int64_t>(std::floor((p.z - params.origin.z) * inv))};
}

namespace {

struct Entry {
  VoxelId id;
  std::uint32_t index;
};

// Total order on (voxel id, coordinates, input index). The coordinate keys
// pin the per-voxel accumulation order independently of input order.
bool entry_less(const Entry& a, const Entry& b, const PointCloud& cloud) {
  if (!(a.id == b.id)) return a.id < b.id;
  const Vec3& pa = cloud.points[a.index];
  const Vec3& pb = cloud.points[b.index];
  if (pa.x != pb.x) return pa.x < pb.x;
  if (pa.y != pb.y) return pa.y < pb.y;
  if (pa.z != pb.z) return pa.z < pb.z;
  return a.index < b.index;
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, const VoxelParams& params) {
  if (!(params.resolution > 0.0)) throw Error("voxel_downsample requires resolution > 0");

  const std::int64_t n = static_cast<std::int64_t>(cloud.size());
  std::vector<Entry> entries(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    entries[i] = {voxel_id_of(cloud.points[i], params), static_cast<std::uint32_t>(i)};

  const auto less = [&cloud](const Entry& a, const Entry& b) { return entry_less(a, b, cloud); };

  // Parallel chunk sort + pairwise merges; the comparator is a strict total
  // order, so the sorted sequence is unique regardless of schedule.
  const int chunks = std::max(1, std::min(omp_get_max_threads(), 8));
  if (n > 1 << 16 && chunks > 1) {
    std::vector<std::int64_t> cuts(chunks + 1);
    for (int c = 0; c <= chunks; ++c) cuts[c] = n * c / chunks;
#pragma omp parallel for schedule(dynamic, 1)
    for (int c = 0; c < chunks; ++c)
      std::sort(entries.begin() + cuts[c], entries.begin() + cuts[c + 1], less);
    for (int width = 1; width < chunks; width *= 2) {
#pragma omp parallel for schedule(dynamic, 1)
      for (int c = 0; c < chunks; c += 2 * width) {
        const int mid = c + width;
        const int last = std::min(c + 2 * width, chunks);
        if (mid < last)
          std::inplace_merge(entries.begin() + cuts[c], entries.begin() + cuts[mid],
                             entries.begin() + cuts[last], less);
      }
    }
  } else {
    std::sort(entries.begin(), entries.end(), less);
  }

  // Group boundaries.
  std::vector<std::int64_t> starts;
  for (std::int64_t i = 0; i < n; ++i)
    if (i == 0 || !(entries[i].id == entries[i - 1].id)) starts.push_back(i);
  starts.push_back(n);

  const std::int64_t groups = static_cast<std::int64_t>(starts.size()) - 1;
  PointCloud out;
  out.points.resize(groups >= 0 ? groups : 0);
  if (cloud.has_intensity()) out.intensity.resize(out.points.size());

#pragma omp parallel for schedule(static)
  for (std::int64_t g = 0; g < groups; ++g) {
    Vec3 sum{};
    double isum = 0.0;
    for (std::int64_t i = starts[g]; i < starts[g + 1]; ++i) {
      sum += cloud.points[entries[i].index];
      if (cloud.has_intensity()) isum += cloud.intensity[entries[i].index];
    }
    const double count = static_cast<double>(starts[g + 1] - starts[g]);
    out.points[g] = sum / count;
    if (cloud.has_intensity()) out.intensity[g] = static_cast<float>(isum / count);
  }
  return out;
}

}  // namespace cns
