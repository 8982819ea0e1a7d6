#include "cns/kdtree.hpp"

#include <algorithm>

namespace cns {

KdIndex KdIndex::build(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("KdIndex: cannot index an empty cloud");
  KdIndex index;
  index.points_ = cloud.points;
  index.bounds_ = cloud.bounds();
  index.nodes_.reserve(2 * cloud.size() / kLeafSize + 2);
  index.build_node(index.points_, 0, static_cast<int>(index.points_.size()));
  return index;
}

// Layout: the left child of node i is node i+1; `child` stores the right
// child index. Leaves have axis == -1 and a [begin, end) range into points_.
int KdIndex::build_node(std::vector<Vec3>& pts, int begin, int end) {
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back({});

  if (end - begin <= kLeafSize) {
    nodes_[idx].begin = begin;
    nodes_[idx].end = end;
    return idx;
  }

  Aabb box;
  for (int i = begin; i < end; ++i) box.expand(pts[i]);
  const Vec3 ext = box.extent();
  int axis = 0;
  double width = ext.x;
  if (ext.y > width) {
    axis = 1;
    width = ext.y;
  }
  if (ext.z > width) axis = 2;

  const int mid = begin + (end - begin) / 2;
  const auto key = [axis](const Vec3& p) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; };
  std::nth_element(pts.begin() + begin, pts.begin() + mid, pts.begin() + end,
                   [&](const Vec3& a, const Vec3& b) { return key(a) < key(b); });

  nodes_[idx].axis = axis;
  nodes_[idx].split = key(pts[mid]);

  build_node(pts, begin, mid);  // left subtree at idx + 1
  nodes_[idx].child = build_node(pts, mid, end);
  return idx;
}

void KdIndex::search(int node_idx, const Vec3& q, double& best) const {
  const Node& node = nodes_[node_idx];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const double d = squared_dist(points_[i], q);
      if (d < best) best = d;
    }
    return;
  }

  const double qk = node.axis == 0 ? q.x : node.axis == 1 ? q.y : q.z;
  const double delta = qk - node.split;
  const int near = delta < 0.0 ? node_idx + 1 : node.child;
  const int far = delta < 0.0 ? node.child : node_idx + 1;

  search(near, q, best);
  if (delta * delta < best) search(far, q, best);
}

double KdIndex::nn_squared_dist(const Vec3& q) const {
  double best = std::numeric_limits<double>::infinity();
  search(0, q, best);
  return best;
}

}  // namespace cns
