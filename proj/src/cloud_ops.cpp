#include "cns/cloud_ops.hpp"

#include <array>

namespace cns {

namespace {

PointCloud filter_cloud(const PointCloud& cloud, const std::vector<char>& keep) {
  PointCloud out;
  std::size_t n = 0;
  for (char k : keep) n += k != 0;
  out.points.reserve(n);
  if (cloud.has_intensity()) out.intensity.reserve(n);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!keep[i]) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.has_intensity()) out.intensity.push_back(cloud.intensity[i]);
  }
  return out;
}

// Row-major 3x3 rotation matrix from a unit quaternion; cheaper than
// per-point quaternion rotation on large clouds.
std::array<double, 9> rotation_matrix(const Quat& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
          2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

}  // namespace

PointCloud crop_range(const PointCloud& cloud, double max_range) {
  if (!(max_range > 0.0)) throw Error("crop_range requires max_range > 0");
  const double r2 = max_range * max_range;
  std::vector<char> keep(cloud.size());
  const std::int64_t n = static_cast<std::int64_t>(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) keep[i] = cloud.points[i].squared_norm() <= r2;
  return filter_cloud(cloud, keep);
}

PointCloud crop_box(const PointCloud& cloud, double half_extent) {
  if (!(half_extent > 0.0)) throw Error("crop_box requires half_extent > 0");
  std::vector<char> keep(cloud.size());
  const std::int64_t n = static_cast<std::int64_t>(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec3& p = cloud.points[i];
    keep[i] = std::abs(p.x) <= half_extent && std::abs(p.y) <= half_extent &&
              std::abs(p.z) <= half_extent;
  }
  return filter_cloud(cloud, keep);
}

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  if (!pose.unit_rotation(1e-6)) throw Error("transform_cloud requires a unit quaternion");
  const auto m = rotation_matrix(pose.rotation.normalized());
  const Vec3 t = pose.translation;

  PointCloud out;
  out.points.resize(cloud.size());
  out.intensity = cloud.intensity;
  const std::int64_t n = static_cast<std::int64_t>(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec3& p = cloud.points[i];
    out.points[i] = {m[0] * p.x + m[1] * p.y + m[2] * p.z + t.x,
                     m[3] * p.x + m[4] * p.y + m[5] * p.z + t.y,
                     m[6] * p.x + m[7] * p.y + m[8] * p.z + t.z};
  }
  return out;
}

PointCloud aggregate_map(std::span<const PointCloud> scans, std::span<const Pose> poses,
                         std::size_t window) {
  if (scans.size() != poses.size()) throw Error("aggregate_map: scan/pose count mismatch");
  if (window < 1) throw Error("aggregate_map: window must be >= 1");

  PointCloud out;
  std::size_t total = 0;
  bool any_intensity = false;
  for (const PointCloud& s : scans) {
    total += s.size();
    any_intensity |= s.has_intensity();
  }
  out.points.reserve(total);
  if (any_intensity) out.intensity.reserve(total);

  for (std::size_t i = 0; i < scans.size(); ++i) {
    PointCloud world = transform_cloud(scans[i], poses[i]);
    out.points.insert(out.points.end(), world.points.begin(), world.points.end());
    if (any_intensity) {
      if (world.has_intensity())
        out.intensity.insert(out.intensity.end(), world.intensity.begin(), world.intensity.end());
      else
        out.intensity.insert(out.intensity.end(), world.size(), 0.0f);
    }
  }
  return out;
}

}  // namespace cns
