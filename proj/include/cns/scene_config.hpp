#pragma once

#include <filesystem>

#include "cns/synth.hpp"

namespace cns {

// Scripted driving route: poses along a waypoint polyline at constant speed,
// one pose per lidar frame, yaw following the direction of travel.
struct TrajectoryConfig {
  double speed = 5.0;       // m/s
  double rate = 20.0;       // poses per second
  double height = 2.0;      // sensor height above ground
  double start_time = 0.0;  // seconds
  std::vector<std::pair<double, double>> waypoints;  // (x, y), >= 2

  void validate() const {
    if (!(speed > 0) || !(rate > 0)) throw Error("trajectory speed and rate must be positive");
    if (waypoints.size() < 2) throw Error("trajectory needs at least 2 waypoints");
  }
};

// Key-value text format ("key = value", '#' comments):
//   name = <string>          seed = <uint>          stages = <int>
//   ground_extent = <m>      density = <pts/m^2>
//   building = cx cy width depth height first_stage last_stage
SceneSpec load_scene_config(const std::filesystem::path& path);

// Same syntax:
//   speed = <m/s>  rate = <Hz>  height = <m>  start_time = <s>
//   waypoint = x y
TrajectoryConfig load_trajectory_config(const std::filesystem::path& path);

Trajectory build_trajectory(const TrajectoryConfig& config);

}  // namespace cns
