#include <algorithm>

#include "cns/convex_hull.hpp"
#include "cns/reference.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cns;
using namespace cns::testing;

namespace {

PointCloud cloud_of(std::initializer_list<Vec3> pts) {
  PointCloud c;
  c.points = pts;
  return c;
}

// Distinct facet planes up to tolerance (coplanar triangles collapse).
std::vector<HullFacet> unique_planes(const ConvexHull3& hull, double tol) {
  std::vector<HullFacet> planes;
  for (const HullFacet& f : hull.facets()) {
    const bool known = std::any_of(planes.begin(), planes.end(), [&](const HullFacet& g) {
      return std::abs(dot(f.normal, g.normal) - 1.0) <= tol && std::abs(f.offset - g.offset) <= tol;
    });
    if (!known) planes.push_back(f);
  }
  return planes;
}

// Smallest |n·p - d| over all facet planes.
double min_plane_distance(const ConvexHull3& hull, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const HullFacet& f : hull.facets())
    best = std::min(best, std::abs(dot(f.normal, p) - f.offset));
  return best;
}

}  // namespace

TEST_CASE("unit tetrahedron: 4 vertices, 4 facets") {
  const PointCloud tetra = cloud_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const ConvexHull3 hull = quickhull(tetra);
  CHECK(hull.vertices().size() == 4);
  CHECK(hull.facets().size() == 4);

  for (const HullFacet& f : hull.facets())
    CHECK(std::abs(f.normal.norm() - 1.0) <= 1e-9);

  // Boundary (a vertex) counts as inside; clear outsiders do not.
  CHECK(hull.contains({0, 0, 0}));
  CHECK(hull.contains({0.1, 0.1, 0.1}));
  CHECK_FALSE(hull.contains({1, 1, 1}));
}

TEST_CASE("cube corners plus interior point: interior point is not a vertex") {
  PointCloud cube;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) cube.points.push_back({double(x), double(y), double(z)});
  cube.points.push_back({0.5, 0.5, 0.5});

  const ConvexHull3 hull = quickhull(cube);
  CHECK(hull.vertices().size() == 8);
  for (const Vec3& v : hull.vertices()) CHECK((v - Vec3{0.5, 0.5, 0.5}).norm() > 0.5);
  CHECK(unique_planes(hull, 1e-9).size() == 6);
  for (const Vec3& p : cube.points) CHECK(hull.contains(p));
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(quickhull(cloud_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}})), DegenerateInput);
  // Coplanar.
  PointCloud plane;
  Rng rng(3);
  for (int i = 0; i < 50; ++i)
    plane.points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), 2.0});
  CHECK_THROWS_AS(quickhull(plane), DegenerateInput);
  // Collinear.
  PointCloud line;
  for (int i = 0; i < 10; ++i) line.points.push_back({double(i), 2.0 * i, -1.0 * i});
  CHECK_THROWS_AS(quickhull(line), DegenerateInput);
  // Coincident.
  PointCloud same;
  for (int i = 0; i < 6; ++i) same.points.push_back({1, 1, 1});
  CHECK_THROWS_AS(quickhull(same), DegenerateInput);
}

TEST_CASE("every input point is contained in its own hull") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const PointCloud cloud = random_cloud(seed, 300, 25.0);
    const ConvexHull3 hull = quickhull(cloud);
    for (const Vec3& p : cloud.points) CHECK(hull.contains(p));
  }
}

TEST_CASE("vertex set matches the LP-feasibility oracle on random clouds") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const PointCloud cloud = random_cloud(seed, 200, 30.0);
    const ConvexHull3 hull = quickhull(cloud);

    const auto is_hull_vertex = [&](const Vec3& p) {
      return std::any_of(hull.vertices().begin(), hull.vertices().end(),
                         [&](const Vec3& v) { return v == p; });
    };

    for (std::size_t i = 0; i < cloud.size(); ++i) {
      std::vector<Vec3> others;
      others.reserve(cloud.size() - 1);
      for (std::size_t j = 0; j < cloud.size(); ++j)
        if (j != i) others.push_back(cloud.points[j]);
      const bool oracle_vertex = !ref::in_hull_lp(others, cloud.points[i]);
      CHECK(oracle_vertex == is_hull_vertex(cloud.points[i]));
    }
  }
}

TEST_CASE("contains agrees with the LP oracle away from facet planes") {
  const PointCloud cloud = random_cloud(21, 200, 30.0);
  const ConvexHull3 hull = quickhull(cloud);

  Rng rng(210);
  std::size_t checked = 0;
  for (int k = 0; k < 2000; ++k) {
    const Vec3 q{rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-40, 40)};
    if (min_plane_distance(hull, q) < hull.eps()) continue;  // boundary band excluded
    ++checked;
    CHECK(hull.contains(q) == ref::in_hull_lp(cloud.points, q));
  }
  CHECK(checked > 1500);  // the excluded band must stay a thin sliver
}

TEST_CASE("hull of hull vertices reproduces the facet planes") {
  for (std::uint64_t seed : {31u, 32u}) {
    const PointCloud cloud = random_cloud(seed, 400, 20.0);
    const ConvexHull3 hull = quickhull(cloud);

    PointCloud verts;
    verts.points = hull.vertices();
    const ConvexHull3 rebuilt = quickhull(verts);

    const std::vector<HullFacet> a = unique_planes(hull, 1e-9);
    const std::vector<HullFacet> b = unique_planes(rebuilt, 1e-9);
    REQUIRE(a.size() == b.size());
    for (const HullFacet& f : a) {
      const bool matched = std::any_of(b.begin(), b.end(), [&](const HullFacet& g) {
        return std::abs(dot(f.normal, g.normal) - 1.0) <= 1e-7 &&
               std::abs(f.offset - g.offset) <= 1e-7;
      });
      CHECK(matched);
    }
  }
}

TEST_CASE("contains is invariant under permutation of the input") {
  const PointCloud cloud = random_cloud(41, 150, 15.0);
  PointCloud shuffled = cloud;
  Rng rng(66);
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled.points[i - 1],
              shuffled.points[static_cast<std::size_t>(rng.uniform01() * i)]);

  const ConvexHull3 ha = quickhull(cloud);
  const ConvexHull3 hb = quickhull(shuffled);
  for (int k = 0; k < 500; ++k) {
    const Vec3 q{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
    if (min_plane_distance(ha, q) < ha.eps() || min_plane_distance(hb, q) < hb.eps()) continue;
    CHECK(ha.contains(q) == hb.contains(q));
  }
}

TEST_CASE("hull monotonicity: subset cloud lies inside the superset hull") {
  const PointCloud big = random_cloud(51, 500, 25.0);
  PointCloud sub;
  for (std::size_t i = 0; i < big.size(); i += 3) sub.points.push_back(big.points[i]);

  const ConvexHull3 hull_big = quickhull(big);
  for (const Vec3& p : sub.points) CHECK(hull_big.contains(p));
}

TEST_CASE("hull_restrict: identity, empty, and LP cross-check") {
  const PointCloud domain = random_cloud(61, 200, 20.0);
  const ConvexHull3 hull = quickhull(domain);

  PointCloud inside;
  for (int i = 0; i < 50; ++i) inside.points.push_back(domain.points[i] * 0.2);
  CHECK(clouds_identical(hull_restrict(inside, hull), inside));

  PointCloud outside;
  for (int i = 0; i < 50; ++i) outside.points.push_back({100.0 + i, 100.0, 100.0});
  CHECK(hull_restrict(outside, hull).size() == 0);

  const PointCloud mixed = random_cloud(62, 400, 30.0);
  const PointCloud restricted = hull_restrict(mixed, hull);
  std::size_t expected = 0;
  for (const Vec3& p : mixed.points) {
    expected += hull.contains(p) ? 1 : 0;
    if (min_plane_distance(hull, p) >= hull.eps())
      CHECK(hull.contains(p) == ref::in_hull_lp(domain.points, p));
  }
  CHECK(restricted.size() == expected);
}
