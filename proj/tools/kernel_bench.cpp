// Timing comparison between the serial reference implementations and the
// OpenMP kernels, with a result-equality check on every row.

#include <chrono>
#include <cstdio>
#include <functional>
#include <omp.h>
#include <string>

#include "cns/convex_hull.hpp"
#include "cns/kdtree.hpp"
#include "cns/reference.hpp"
#include "cns/rng.hpp"
#include "cns/tcr.hpp"
#include "cns/voxel.hpp"

using namespace cns;

namespace {

PointCloud random_cloud(std::uint64_t seed, std::size_t n, double half) {
  Rng rng(mix_seed(seed, 0xbe7c));
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.push_back(
        {rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(-half, half)});
  return cloud;
}

double time_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const std::string& name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-34s %12.1f %12.1f %9.2fx   %s\n", name.c_str(), serial_ms, parallel_ms,
              serial_ms / parallel_ms, equal ? "results equal" : "MISMATCH");
}

bool cloud_eq(const PointCloud& a, const PointCloud& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a.points[i] == b.points[i])) return false;
  return true;
}

}  // namespace

int main() {
  std::printf("threads: %d\n\n", omp_get_max_threads());
  std::printf("%-34s %12s %12s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

  {  // NN queries: linear scan vs k-d tree (tree queries also run in parallel)
    const std::size_t n = 20000;
    const PointCloud cloud = random_cloud(1, n, 100.0);
    const PointCloud queries = random_cloud(2, n, 100.0);
    const KdIndex index = KdIndex::build(cloud);

    std::vector<double> brute(n), fast(n);
    const double t_brute = time_ms([&] {
      for (std::size_t i = 0; i < n; ++i)
        brute[i] = ref::nn_squared_dist_brute(cloud, queries.points[i]);
    });
    const double t_kd = time_ms([&] {
      const std::int64_t m = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < m; ++i) fast[i] = index.nn_squared_dist(queries.points[i]);
    });
    row("nn 20k queries / 20k points", t_brute, t_kd, brute == fast);
  }

  {  // unchanged-set extraction
    const PointCloud source = random_cloud(3, 20000, 100.0);
    const PointCloud target = random_cloud(4, 20000, 100.0);
    const KdIndex index = KdIndex::build(target);
    PointCloud serial_out, parallel_out;
    const double t_serial =
        time_ms([&] { serial_out = ref::overlap_set_brute(source, target, 10.0); });
    const double t_parallel = time_ms([&] { parallel_out = overlap_set(source, index, 10.0); });
    row("overlap_set 20k x 20k", t_serial, t_parallel, cloud_eq(serial_out, parallel_out));
  }

  {  // voxel downsampling
    const PointCloud cloud = random_cloud(5, 2000000, 400.0);
    const VoxelParams params{5.0, {}};
    PointCloud serial_out, parallel_out;
    const double t_serial =
        time_ms([&] { serial_out = ref::voxel_downsample_serial(cloud, params); });
    const double t_parallel = time_ms([&] { parallel_out = voxel_downsample(cloud, params); });
    row("voxel_downsample 2M points", t_serial, t_parallel, cloud_eq(serial_out, parallel_out));
  }

  {  // hull containment: LP feasibility vs facet planes
    const PointCloud domain = random_cloud(6, 400, 50.0);
    const PointCloud sources = random_cloud(7, 2000, 70.0);
    const ConvexHull3 hull = quickhull(domain);
    PointCloud serial_out, parallel_out;
    const double t_serial =
        time_ms([&] { serial_out = ref::hull_restrict_brute(sources, domain); });
    const double t_parallel = time_ms([&] { parallel_out = hull_restrict(sources, hull); });
    // The two routes may legitimately differ within the boundary tolerance
    // band; sizes match on generic clouds.
    row("hull_restrict 2k pts, 400-pt hull", t_serial, t_parallel,
        serial_out.size() == parallel_out.size());
  }

  return 0;
}
