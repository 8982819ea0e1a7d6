#pragma once

#include <vector>

#include "cns/point_cloud.hpp"

namespace cns {

// Balanced 3D k-d tree over a point cloud. Queries return the exact nearest
// neighbor (verified against linear scan in the test suite). The index is
// read-only after build and safe to query from multiple threads.
class KdIndex {
 public:
  // Throws Error on an empty cloud.
  static KdIndex build(const PointCloud& cloud);

  std::size_t size() const { return points_.size(); }
  const Aabb& bounds() const { return bounds_; }

  // Exact squared distance from q to the nearest indexed point.
  double nn_squared_dist(const Vec3& q) const;

  double nn_dist(const Vec3& q) const { return std::sqrt(nn_squared_dist(q)); }

 private:
  struct Node {
    // Internal node: children at child and child+1 in nodes_.
    // Leaf: child < 0, [begin, end) range into points_.
    double split = 0.0;
    int axis = -1;  // -1 marks a leaf
    int child = -1;
    int begin = 0, end = 0;
  };

  static constexpr int kLeafSize = 16;

  int build_node(std::vector<Vec3>& pts, int begin, int end);
  void search(int node_idx, const Vec3& q, double& best) const;

  std::vector<Vec3> points_;  // reordered copy
  std::vector<Node> nodes_;
  Aabb bounds_;
};

}  // namespace cns
