#pragma once

#include <array>
#include <vector>

#include "cns/point_cloud.hpp"

namespace cns {

// Oriented facet plane n·x = d with unit outward normal.
struct HullFacet {
  Vec3 normal;
  double offset = 0.0;
};

// 3D convex hull: vertices are a subset of the input points, facets are
// triangles. A point p is inside iff n·p <= d + eps for every facet; eps
// makes boundary points (including the hull's own vertices) count as inside.
class ConvexHull3 {
 public:
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<HullFacet>& facets() const { return facets_; }
  const std::vector<std::array<int, 3>>& facet_vertices() const { return facet_vertices_; }
  double eps() const { return eps_; }

  bool contains(const Vec3& p) const {
    for (const HullFacet& f : facets_)
      if (dot(f.normal, p) > f.offset + eps_) return false;
    return true;
  }

  // Signed distance of p above the most violated facet plane (<= 0 when p is
  // inside every half-space without tolerance).
  double max_plane_excess(const Vec3& p) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const HullFacet& f : facets_) worst = std::max(worst, dot(f.normal, p) - f.offset);
    return worst;
  }

 private:
  friend ConvexHull3 quickhull(const PointCloud&, double);

  std::vector<Vec3> vertices_;
  std::vector<HullFacet> facets_;
  std::vector<std::array<int, 3>> facet_vertices_;
  double eps_ = 0.0;
};

// Builds the hull with the quickhull algorithm. Throws DegenerateInput for
// fewer than 4 points or affine rank < 3 (tolerance 1e-7 * bbox diagonal).
// eps < 0 selects the default containment tolerance 1e-6 * bbox diagonal.
ConvexHull3 quickhull(const PointCloud& points, double eps = -1.0);

// Subset of `source` contained in the hull, order preserved.
PointCloud hull_restrict(const PointCloud& source, const ConvexHull3& hull);

}  // namespace cns
