#include <algorithm>

#include "cns/kdtree.hpp"
#include "cns/reference.hpp"
#include "cns/voxel.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cns;
using namespace cns::testing;

TEST_CASE("kd index basics") {
  PointCloud one;
  one.points.push_back({1, 2, 3});
  const KdIndex idx = KdIndex::build(one);
  CHECK(idx.size() == 1);
  CHECK(idx.nn_dist({1, 2, 3}) == 0.0);

  PointCloud dup;
  dup.points = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
  CHECK(KdIndex::build(dup).size() == 3);

  CHECK_THROWS_AS(KdIndex::build(PointCloud{}), Error);
}

TEST_CASE("nn_dist: 3-4-5 triangle") {
  PointCloud cloud;
  cloud.points.push_back({0, 0, 0});
  const KdIndex idx = KdIndex::build(cloud);
  CHECK(idx.nn_dist({3, 4, 0}) == 5.0);
}

TEST_CASE("nn queries match the linear scan exactly") {
  const PointCloud cloud = random_cloud(42, 500, 60.0);
  const KdIndex idx = KdIndex::build(cloud);

  // Indexed points are their own nearest neighbors.
  for (std::size_t i = 0; i < cloud.size(); i += 7)
    CHECK(idx.nn_squared_dist(cloud.points[i]) == 0.0);

  Rng rng(1234);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 q{rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(-80, 80)};
    CHECK(idx.nn_squared_dist(q) == ref::nn_squared_dist_brute(cloud, q));
  }
}

TEST_CASE("nn queries on clustered data match the linear scan") {
  // Realistic structure: maps of a random scene, not uniform noise.
  const SessionPair pair = random_session_pair(7);
  const KdIndex idx = KdIndex::build(pair.target);
  Rng rng(77);
  for (int k = 0; k < 300; ++k) {
    const std::size_t i = static_cast<std::size_t>(rng.uniform01() * pair.source.size());
    const Vec3 q = pair.source.points[i];
    CHECK(idx.nn_squared_dist(q) == ref::nn_squared_dist_brute(pair.target, q));
  }
}

TEST_CASE("voxel id floor convention: boundary goes to the higher cell") {
  const VoxelParams params{5.0, {0, 0, 0}};
  CHECK(voxel_id_of({4.999, 0.1, 0.1}, params).ix == 0);
  CHECK(voxel_id_of({5.0, 0.1, 0.1}, params).ix == 1);
  CHECK(voxel_id_of({-0.001, 0.1, 0.1}, params).ix == -1);
  CHECK(voxel_id_of({0.0, 0.1, 0.1}, params).ix == 0);
}

TEST_CASE("voxel downsample: single point and single-cell centroid") {
  PointCloud one;
  one.points.push_back({1.5, 2.5, 3.5});
  const PointCloud out = voxel_downsample(one, {5.0, {}});
  REQUIRE(out.size() == 1);
  CHECK(out.points[0] == Vec3{1.5, 2.5, 3.5});

  PointCloud two;
  two.points = {{0.1, 0, 0}, {0.3, 0, 0}};
  const PointCloud merged = voxel_downsample(two, {5.0, {}});
  REQUIRE(merged.size() == 1);
  CHECK(merged.points[0].x == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("voxel downsample: output size equals distinct cell count") {
  const PointCloud cloud = random_cloud(8, 4000, 70.0, true);
  const VoxelParams params{5.0, {0, 0, 0}};

  std::vector<VoxelId> ids;
  for (const Vec3& p : cloud.points) ids.push_back(voxel_id_of(p, params));
  std::sort(ids.begin(), ids.end());
  const std::size_t distinct =
      static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());

  const PointCloud out = voxel_downsample(cloud, params);
  CHECK(out.size() == distinct);
  CHECK(out.size() <= cloud.size());
}

TEST_CASE("voxel downsample: centroids stay inside their cells, output sorted") {
  const PointCloud cloud = random_cloud(9, 3000, 40.0);
  const VoxelParams params{2.5, {0.7, -1.3, 0.2}};
  const PointCloud out = voxel_downsample(cloud, params);

  VoxelId prev{std::numeric_limits<std::int64_t>::min(), 0, 0};
  for (const Vec3& p : out.points) {
    const VoxelId id = voxel_id_of(p, params);
    const Vec3 lo{params.origin.x + id.ix * params.resolution,
                  params.origin.y + id.iy * params.resolution,
                  params.origin.z + id.iz * params.resolution};
    CHECK(p.x >= lo.x);
    CHECK(p.x <= lo.x + params.resolution);
    CHECK(p.y >= lo.y);
    CHECK(p.y <= lo.y + params.resolution);
    CHECK(p.z >= lo.z);
    CHECK(p.z <= lo.z + params.resolution);
    CHECK(prev < id);
    prev = id;
  }
}

TEST_CASE("voxel downsample is permutation invariant bit for bit") {
  const PointCloud cloud = random_cloud(10, 2500, 30.0, true);
  PointCloud shuffled = cloud;
  Rng rng(55);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform01() * i);
    std::swap(shuffled.points[i - 1], shuffled.points[j]);
    std::swap(shuffled.intensity[i - 1], shuffled.intensity[j]);
  }
  const VoxelParams params{4.0, {}};
  CHECK(clouds_identical(voxel_downsample(cloud, params), voxel_downsample(shuffled, params)));
}

TEST_CASE("voxel downsample matches the serial hash-grid reference bit for bit") {
  for (std::uint64_t seed : {3u, 14u, 15u}) {
    const PointCloud cloud = random_cloud(seed, 5000, 80.0, true);
    const VoxelParams params{5.0, {}};
    CHECK(clouds_identical(voxel_downsample(cloud, params),
                           ref::voxel_downsample_serial(cloud, params)));
  }
  const SessionPair pair = random_session_pair(31);
  const VoxelParams params{5.0, {}};
  CHECK(clouds_identical(voxel_downsample(pair.source, params),
                         ref::voxel_downsample_serial(pair.source, params)));
}
