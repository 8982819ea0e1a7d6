#pragma once

#include <span>

#include "cns/point_cloud.hpp"

namespace cns {

// Keeps points with Euclidean norm <= max_range (radial ball around the
// sensor origin). Order and intensities preserved.
PointCloud crop_range(const PointCloud& cloud, double max_range);

// Per-axis alternative: keeps points with |x|,|y|,|z| <= half_extent.
PointCloud crop_box(const PointCloud& cloud, double half_extent);

// R*p + t for every point; intensities preserved.
PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose);

// Concatenates transform_cloud(scans[i], poses[i]) in input order. The window
// tiles the sequence into groups of consecutive scans; the concatenated output
// is the same for every window size, so window only acts as a validity check
// (window = scans.size() is the conventional "single session map" call).
PointCloud aggregate_map(std::span<const PointCloud> scans, std::span<const Pose> poses,
                         std::size_t window);

inline PointCloud aggregate_map(std::span<const PointCloud> scans, std::span<const Pose> poses) {
  return aggregate_map(scans, poses, scans.size());
}

}  // namespace cns
