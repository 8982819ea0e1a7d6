#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cns/point_cloud.hpp"
#include "cns/tcr.hpp"

namespace cns {

// Axis-aligned box building on the ground plane, present during the stage
// interval [first_stage, last_stage].
struct BuildingSpec {
  double cx = 0.0, cy = 0.0;       // footprint center
  double width = 10.0;             // x extent
  double depth = 10.0;             // y extent
  double height = 10.0;
  int first_stage = 1;
  int last_stage = 1;

  void validate() const {
    if (!(width > 0) || !(depth > 0) || !(height > 0))
      throw Error("building dimensions must be positive");
    if (first_stage > last_stage) throw Error("building stage interval is empty");
  }

  bool active(int stage) const { return first_stage <= stage && stage <= last_stage; }
};

// Declarative evolving-city description: box buildings over a square ground
// plane, sampled at a fixed surface density. Fully deterministic per seed.
struct SceneSpec {
  std::string name = "scene";
  std::vector<BuildingSpec> buildings;
  double ground_extent = 200.0;  // full side length, centered on the origin
  double density = 1.0;          // surface points per m^2
  std::uint64_t seed = 0;
  int num_stages = 1;

  void validate() const {
    if (!(ground_extent > 0)) throw Error("ground_extent must be positive");
    if (!(density > 0)) throw Error("density must be positive");
    if (num_stages < 1) throw Error("num_stages must be >= 1");
    for (const BuildingSpec& b : buildings) {
      b.validate();
      if (b.first_stage < 1 || b.last_stage > num_stages)
        throw Error("building stage interval exceeds scene stages");
    }
  }
};

struct LidarSpec {
  int channels = 32;
  double vertical_fov_deg = 45.0;  // total span, centered on the horizon
  double max_range = 120.0;
  double horizontal_res_deg = 0.35;
  double rate_hz = 20.0;

  void validate() const {
    if (channels < 1 || !(max_range > 0) || !(horizontal_res_deg > 0) || !(rate_hz > 0) ||
        !(vertical_fov_deg >= 0))
      throw Error("invalid lidar parameters");
  }
};

// Stratified-uniform surface samples of the ground plane and of every
// building active at `stage`. Per-face sample streams are seeded
// independently of the stage, so structure shared between stages yields
// bit-identical points.
PointCloud build_map(const SceneSpec& scene, int stage);

// Ideal (noise-free) spinning-lidar scan of the analytic scene, points in
// the sensor frame. Rays that hit nothing within max_range produce no point.
PointCloud simulate_scan(const SceneSpec& scene, int stage, const Pose& pose,
                         const LidarSpec& lidar);

// One scan per trajectory pose; the trajectory is returned unchanged as
// ground truth.
std::pair<std::vector<PointCloud>, Trajectory> gen_sequence(const SceneSpec& scene, int stage,
                                                            const Trajectory& traj,
                                                            const LidarSpec& lidar);

// Distance from a world point to the nearest analytic surface of the scene
// (ground rectangle or active building boundary). Used to cross-check the
// sampled and ray-cast paths against each other.
double scene_surface_distance(const SceneSpec& scene, int stage, const Vec3& world_point);

// O(n^2) / LP-feasibility reference implementation of the change-ratio
// pipeline lives in cns::ref (see reference.hpp); it is declared there so the
// main library never links against it.

}  // namespace cns
