#pragma once

#include <vector>

#include "cns/errors.hpp"
#include "cns/geometry.hpp"

namespace cns {

// Ordered set of 3D points in meters, with an optional per-point intensity.
// Immutable by convention once built; all operations return new clouds.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<float> intensity;  // empty, or same length as points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_intensity() const { return !intensity.empty(); }

  Aabb bounds() const {
    Aabb box;
    for (const Vec3& p : points) box.expand(p);
    return box;
  }

  void validate() const {
    if (has_intensity() && intensity.size() != points.size())
      throw Error("intensity length does not match point count");
    for (std::size_t i = 0; i < points.size(); ++i)
      if (!points[i].finite()) throw Error("non-finite coordinate at point " + std::to_string(i));
  }
};

// Sequence of poses with strictly increasing timestamps.
struct Trajectory {
  std::vector<Pose> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }

  void validate() const {
    if (poses.empty()) throw Error("trajectory has no poses");
    for (std::size_t i = 0; i < poses.size(); ++i) {
      if (!std::isfinite(poses[i].t)) throw Error("non-finite timestamp");
      if (!poses[i].unit_rotation(1e-9)) throw Error("non-unit quaternion in trajectory");
      if (i > 0 && poses[i].t <= poses[i - 1].t)
        throw Error("timestamps not strictly increasing at index " + std::to_string(i));
    }
  }
};

}  // namespace cns
