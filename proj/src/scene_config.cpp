#include "cns/scene_config.hpp"

#include <fstream>
#include <sstream>

namespace cns {

namespace {

struct Line {
  int number;
  std::string key;
  std::string value;
};

std::vector<Line> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::vector<Line> lines;
  std::string raw;
  for (int line_no = 1; std::getline(in, raw); ++line_no) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;

    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    Line line{line_no, trim(raw.substr(0, eq)), trim(raw.substr(eq + 1))};
    if (line.key.empty()) throw ConfigError(line_no, "empty key");
    if (line.value.empty()) throw ConfigError(line_no, "empty value for key '" + line.key + "'");
    lines.push_back(std::move(line));
  }
  return lines;
}

double parse_double(const Line& line) {
  std::istringstream ss(line.value);
  double v;
  std::string rest;
  if (!(ss >> v) || (ss >> rest))
    throw ConfigError(line.number, "expected a number for key '" + line.key + "'");
  return v;
}

std::vector<double> parse_doubles(const Line& line, std::size_t count) {
  std::istringstream ss(line.value);
  std::vector<double> vals;
  double v;
  while (ss >> v) vals.push_back(v);
  std::string rest;
  if (!ss.eof() && (ss.clear(), ss >> rest))
    throw ConfigError(line.number, "malformed number list for key '" + line.key + "'");
  if (vals.size() != count)
    throw ConfigError(line.number, "key '" + line.key + "' needs " + std::to_string(count) +
                                       " values, got " + std::to_string(vals.size()));
  return vals;
}

}  // namespace

SceneSpec load_scene_config(const std::filesystem::path& path) {
  SceneSpec scene;
  for (const Line& line : read_key_values(path)) {
    if (line.key == "name") {
      scene.name = line.value;
    } else if (line.key == "seed") {
      scene.seed = static_cast<std::uint64_t>(parse_double(line));
    } else if (line.key == "stages") {
      scene.num_stages = static_cast<int>(parse_double(line));
    } else if (line.key == "ground_extent") {
      scene.ground_extent = parse_double(line);
    } else if (line.key == "density") {
      scene.density = parse_double(line);
    } else if (line.key == "building") {
      const std::vector<double> v = parse_doubles(line, 7);
      BuildingSpec b;
      b.cx = v[0];
      b.cy = v[1];
      b.width = v[2];
      b.depth = v[3];
      b.height = v[4];
      b.first_stage = static_cast<int>(v[5]);
      b.last_stage = static_cast<int>(v[6]);
      scene.buildings.push_back(b);
    } else {
      throw ConfigError(line.number, "unknown scene key '" + line.key + "'");
    }
  }
  try {
    scene.validate();
  } catch (const Error& e) {
    throw ConfigError(0, std::string("invalid scene config: ") + e.what());
  }
  return scene;
}

TrajectoryConfig load_trajectory_config(const std::filesystem::path& path) {
  TrajectoryConfig config;
  for (const Line& line : read_key_values(path)) {
    if (line.key == "speed") {
      config.speed = parse_double(line);
    } else if (line.key == "rate") {
      config.rate = parse_double(line);
    } else if (line.key == "height") {
      config.height = parse_double(line);
    } else if (line.key == "start_time") {
      config.start_time = parse_double(line);
    } else if (line.key == "waypoint") {
      const std::vector<double> v = parse_doubles(line, 2);
      config.waypoints.emplace_back(v[0], v[1]);
    } else {
      throw ConfigError(line.number, "unknown trajectory key '" + line.key + "'");
    }
  }
  try {
    config.validate();
  } catch (const Error& e) {
    throw ConfigError(0, std::string("invalid trajectory config: ") + e.what());
  }
  return config;
}

Trajectory build_trajectory(const TrajectoryConfig& config) {
  config.validate();

  // Cumulative arc length of the waypoint polyline.
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < config.waypoints.size(); ++i) {
    const double dx = config.waypoints[i].first - config.waypoints[i - 1].first;
    const double dy = config.waypoints[i].second - config.waypoints[i - 1].second;
    cum.push_back(cum.back() + std::hypot(dx, dy));
  }
  const double total = cum.back();
  if (!(total > 0)) throw Error("trajectory waypoints have zero total length");

  Trajectory traj;
  const double dt = 1.0 / config.rate;
  const double step = config.speed * dt;
  std::size_t seg = 0;
  for (int k = 0;; ++k) {
    const double s = std::min(step * k, total);
    while (seg + 2 < config.waypoints.size() && cum[seg + 1] <= s) ++seg;

    const double seg_len = cum[seg + 1] - cum[seg];
    const double f = seg_len > 0 ? (s - cum[seg]) / seg_len : 0.0;
    const double x0 = config.waypoints[seg].first, y0 = config.waypoints[seg].second;
    const double x1 = config.waypoints[seg + 1].first, y1 = config.waypoints[seg + 1].second;

    Pose pose;
    pose.t = config.start_time + dt * k;
    pose.translation = {x0 + f * (x1 - x0), y0 + f * (y1 - y0), config.height};
    pose.rotation = Quat::from_yaw(std::atan2(y1 - y0, x1 - x0));
    traj.poses.push_back(pose);

    if (s >= total) break;
  }
  return traj;
}

}  // namespace cns
