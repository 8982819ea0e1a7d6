#include "cns/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cns/rng.hpp"

namespace cns {

namespace {

constexpr double kRayMinT = 1e-9;

struct Box {
  Vec3 lo, hi;
};

Box building_box(const BuildingSpec& b) {
  return {{b.cx - b.width / 2, b.cy - b.depth / 2, 0.0},
          {b.cx + b.width / 2, b.cy + b.depth / 2, b.height}};
}

// Rectangular face given by an origin corner and two edge vectors.
struct Face {
  Vec3 origin;
  Vec3 u, v;
  std::uint64_t stream;  // seed stream id, stable across stages
};

std::vector<Face> building_faces(const BuildingSpec& b, std::size_t building_index) {
  const Box box = building_box(b);
  const double w = b.width, d = b.depth, h = b.height;
  const std::uint64_t base = (static_cast<std::uint64_t>(building_index) + 1) * 8;
  return {
      {{box.lo.x, box.lo.y, 0}, {0, d, 0}, {0, 0, h}, base + 0},  // x- wall
      {{box.hi.x, box.lo.y, 0}, {0, d, 0}, {0, 0, h}, base + 1},  // x+ wall
      {{box.lo.x, box.lo.y, 0}, {w, 0, 0}, {0, 0, h}, base + 2},  // y- wall
      {{box.lo.x, box.hi.y, 0}, {w, 0, 0}, {0, 0, h}, base + 3},  // y+ wall
      {{box.lo.x, box.lo.y, h}, {w, 0, 0}, {0, d, 0}, base + 4},  // roof
  };
}

// Stratified jittered sampling: one sample per grid cell, cell size chosen
// so the face count is ~area * density.
std::vector<Vec3> sample_face(const Face& face, double density, std::uint64_t scene_seed) {
  const double lu = face.u.norm();
  const double lv = face.v.norm();
  const double cell = 1.0 / std::sqrt(density);
  const std::int64_t nu = std::max<std::int64_t>(1, std::llround(lu / cell));
  const std::int64_t nv = std::max<std::int64_t>(1, std::llround(lv / cell));

  Rng rng(mix_seed(scene_seed, face.stream));
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(nu * nv));
  for (std::int64_t i = 0; i < nu; ++i)
    for (std::int64_t j = 0; j < nv; ++j) {
      const double fu = (static_cast<double>(i) + rng.uniform01()) / static_cast<double>(nu);
      const double fv = (static_cast<double>(j) + rng.uniform01()) / static_cast<double>(nv);
      out.push_back(face.origin + face.u * fu + face.v * fv);
    }
  return out;
}

std::vector<Face> scene_faces(const SceneSpec& scene, int stage) {
  std::vector<Face> faces;
  const double half = scene.ground_extent / 2;
  faces.push_back({{-half, -half, 0},
                   {scene.ground_extent, 0, 0},
                   {0, scene.ground_extent, 0},
                   0});  // ground
  for (std::size_t bi = 0; bi < scene.buildings.size(); ++bi) {
    if (!scene.buildings[bi].active(stage)) continue;
    for (const Face& f : building_faces(scene.buildings[bi], bi)) faces.push_back(f);
  }
  return faces;
}

void check_stage(const SceneSpec& scene, int stage) {
  if (stage < 1 || stage > scene.num_stages)
    throw Error("stage " + std::to_string(stage) + " outside scene range [1, " +
                std::to_string(scene.num_stages) + "]");
}

}  // namespace

PointCloud build_map(const SceneSpec& scene, int stage) {
  scene.validate();
  check_stage(scene, stage);

  const std::vector<Face> faces = scene_faces(scene, stage);
  std::vector<std::vector<Vec3>> per_face(faces.size());
  const std::int64_t nf = static_cast<std::int64_t>(faces.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t f = 0; f < nf; ++f)
    per_face[f] = sample_face(faces[f], scene.density, scene.seed);

  PointCloud map;
  std::size_t total = 0;
  for (const auto& pts : per_face) total += pts.size();
  map.points.reserve(total);
  for (const auto& pts : per_face) map.points.insert(map.points.end(), pts.begin(), pts.end());
  return map;
}

namespace {

// Entry distance of a ray into an axis-aligned box (slab test). Returns the
// nearest t > kRayMinT, or +inf. A ray starting inside the box reports the
// exit distance.
double ray_box(const Vec3& origin, const Vec3& dir, const Box& box) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
  const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a];
    double tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  if (t0 > kRayMinT) return t0;
  if (t1 > kRayMinT) return t1;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

PointCloud simulate_scan(const SceneSpec& scene, int stage, const Pose& pose,
                         const LidarSpec& lidar) {
  scene.validate();
  lidar.validate();
  check_stage(scene, stage);
  if (!pose.unit_rotation(1e-6)) throw Error("simulate_scan requires a unit quaternion");

  const double deg = std::numbers::pi / 180.0;
  const int n_az = std::max(1, static_cast<int>(std::lround(360.0 / lidar.horizontal_res_deg)));
  const double az_step = 2.0 * std::numbers::pi / n_az;

  std::vector<Box> boxes;
  for (const BuildingSpec& b : scene.buildings)
    if (b.active(stage)) boxes.push_back(building_box(b));
  const double half = scene.ground_extent / 2;

  const std::int64_t total_rays = static_cast<std::int64_t>(lidar.channels) * n_az;
  std::vector<Vec3> hits(total_rays);
  std::vector<char> has_hit(total_rays, 0);

#pragma omp parallel for schedule(static)
  for (std::int64_t ray = 0; ray < total_rays; ++ray) {
    const int c = static_cast<int>(ray / n_az);
    const int k = static_cast<int>(ray % n_az);
    const double elev =
        lidar.channels == 1
            ? 0.0
            : (-lidar.vertical_fov_deg / 2 +
               lidar.vertical_fov_deg * static_cast<double>(c) / (lidar.channels - 1)) *
                  deg;
    const double azim = -std::numbers::pi + (static_cast<double>(k) + 0.5) * az_step;

    const Vec3 dir_sensor{std::cos(elev) * std::cos(azim), std::cos(elev) * std::sin(azim),
                          std::sin(elev)};
    const Vec3 dir_world = pose.rotation.rotate(dir_sensor);
    const Vec3& origin = pose.translation;

    double best_t = std::numeric_limits<double>::infinity();
    if (dir_world.z != 0.0) {
      const double t = -origin.z / dir_world.z;
      if (t > kRayMinT) {
        const double hx = origin.x + t * dir_world.x;
        const double hy = origin.y + t * dir_world.y;
        if (std::abs(hx) <= half && std::abs(hy) <= half) best_t = t;
      }
    }
    for (const Box& box : boxes) best_t = std::min(best_t, ray_box(origin, dir_world, box));

    if (best_t <= lidar.max_range) {
      hits[ray] = dir_sensor * best_t;
      has_hit[ray] = 1;
    }
  }

  PointCloud scan;
  for (std::int64_t ray = 0; ray < total_rays; ++ray)
    if (has_hit[ray]) scan.points.push_back(hits[ray]);
  return scan;
}

std::pair<std::vector<PointCloud>, Trajectory> gen_sequence(const SceneSpec& scene, int stage,
                                                            const Trajectory& traj,
                                                            const LidarSpec& lidar) {
  traj.validate();
  std::vector<PointCloud> scans;
  scans.reserve(traj.size());
  for (const Pose& pose : traj.poses) scans.push_back(simulate_scan(scene, stage, pose, lidar));
  return {std::move(scans), traj};
}

double scene_surface_distance(const SceneSpec& scene, int stage, const Vec3& p) {
  const double half = scene.ground_extent / 2;
  const double dx = std::max({-half - p.x, 0.0, p.x - half});
  const double dy = std::max({-half - p.y, 0.0, p.y - half});
  double best = std::sqrt(dx * dx + dy * dy + p.z * p.z);  // ground rectangle

  for (const BuildingSpec& b : scene.buildings) {
    if (!b.active(stage)) continue;
    const Box box = building_box(b);
    const Vec3 center = (box.lo + box.hi) / 2.0;
    const Vec3 halfext = (box.hi - box.lo) / 2.0;
    const Vec3 q{std::abs(p.x - center.x) - halfext.x, std::abs(p.y - center.y) - halfext.y,
                 std::abs(p.z - center.z) - halfext.z};
    const Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
    const double sdf = outside.norm() + std::min(std::max({q.x, q.y, q.z}), 0.0);
    best = std::min(best, std::abs(sdf));
  }
  return best;
}

}  // namespace cns
