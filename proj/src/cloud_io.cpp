#include "cns/cloud_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cns {

namespace {

constexpr std::size_t kRecordBytes = 16;  // 4 x float32

std::string loc(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

float to_float_checked(double v, const char* what, const std::filesystem::path& path) {
  const float f = static_cast<float>(v);
  if (!std::isfinite(f))
    throw FormatError(std::string(what) + " does not fit float32 in " + loc(path));
  return f;
}

}  // namespace

CloudFormat format_for_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".xyz" || ext == ".txt" || ext == ".asc") return CloudFormat::XyzAscii;
  return CloudFormat::XyzBinary;
}

static PointCloud load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + loc(path));
  const std::streamoff bytes = in.tellg();
  in.seekg(0);

  if (bytes % kRecordBytes != 0)
    throw FormatError("truncated record at byte offset " +
                      std::to_string(bytes - bytes % kRecordBytes) + " in " + loc(path));

  const std::size_t n = static_cast<std::size_t>(bytes) / kRecordBytes;
  std::vector<float> raw(n * 4);
  if (n > 0 && !in.read(reinterpret_cast<char*>(raw.data()), bytes))
    throw IoError("read failed on " + loc(path));

  PointCloud cloud;
  cloud.points.resize(n);
  cloud.intensity.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* r = &raw[i * 4];
    if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2]) ||
        !std::isfinite(r[3]))
      throw FormatError("non-finite value at byte offset " + std::to_string(i * kRecordBytes) +
                        " in " + loc(path));
    cloud.points[i] = {static_cast<double>(r[0]), static_cast<double>(r[1]),
                       static_cast<double>(r[2])};
    cloud.intensity[i] = r[3];
  }
  return cloud;
}

static PointCloud load_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + loc(path));

  PointCloud cloud;
  int arity = 0;  // 3 or 4, fixed by the first data line
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);

    std::istringstream ss(line);
    double x, y, z, inten;
    if (!(ss >> x)) continue;  // blank / comment-only line
    if (!(ss >> y >> z))
      throw FormatError("expected at least 3 values on line " + std::to_string(line_no) + " of " +
                        loc(path));
    const bool has_i = static_cast<bool>(ss >> inten);
    std::string trailing;
    if (ss >> trailing)
      throw FormatError("trailing data on line " + std::to_string(line_no) + " of " + loc(path));

    const int this_arity = has_i ? 4 : 3;
    if (arity == 0) arity = this_arity;
    if (this_arity != arity)
      throw FormatError("inconsistent column count on line " + std::to_string(line_no) + " of " +
                        loc(path));
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) ||
        (has_i && !std::isfinite(inten)))
      throw FormatError("non-finite value on line " + std::to_string(line_no) + " of " +
                        loc(path));

    cloud.points.push_back({x, y, z});
    if (has_i) cloud.intensity.push_back(static_cast<float>(inten));
  }
  return cloud;
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  PointCloud cloud =
      format == CloudFormat::XyzBinary ? load_binary(path) : load_ascii(path);
  cloud.validate();
  return cloud;
}

static void save_binary(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + loc(path) + " for writing");

  std::vector<float> raw(cloud.size() * 4);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    raw[i * 4 + 0] = to_float_checked(p.x, "x", path);
    raw[i * 4 + 1] = to_float_checked(p.y, "y", path);
    raw[i * 4 + 2] = to_float_checked(p.z, "z", path);
    raw[i * 4 + 3] = cloud.has_intensity() ? cloud.intensity[i] : 0.0f;
  }
  if (!raw.empty() &&
      !out.write(reinterpret_cast<const char*>(raw.data()),
                 static_cast<std::streamsize>(raw.size() * sizeof(float))))
    throw IoError("write failed on " + loc(path));
}

static void save_ascii(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + loc(path) + " for writing");

  char buf[160];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (cloud.has_intensity())
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g\n", p.x, p.y, p.z,
                    static_cast<double>(cloud.intensity[i]));
    else
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
    out << buf;
  }
  if (!out) throw IoError("write failed on " + loc(path));
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  cloud.validate();
  if (format == CloudFormat::XyzBinary)
    save_binary(cloud, path);
  else
    save_ascii(cloud, path);
}

Trajectory load_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + loc(path));

  Trajectory traj;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);

    std::istringstream ss(line);
    Pose pose;
    double qx, qy, qz, qw;
    if (!(ss >> pose.t)) continue;
    if (!(ss >> pose.translation.x >> pose.translation.y >> pose.translation.z >> qx >> qy >>
          qz >> qw))
      throw FormatError("expected 8 values on line " + std::to_string(line_no) + " of " +
                        loc(path));
    pose.rotation = Quat{qw, qx, qy, qz};
    const double norm = pose.rotation.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6)
      throw FormatError("non-unit quaternion on line " + std::to_string(line_no) + " of " +
                        loc(path));
    pose.rotation = pose.rotation.normalized();
    traj.poses.push_back(pose);
  }
  traj.validate();
  return traj;
}

void save_poses(const Trajectory& traj, const std::filesystem::path& path) {
  traj.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + loc(path) + " for writing");

  char buf[320];
  for (const Pose& p : traj.poses) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", p.t,
                  p.translation.x, p.translation.y, p.translation.z, p.rotation.x, p.rotation.y,
                  p.rotation.z, p.rotation.w);
    out << buf;
  }
  if (!out) throw IoError("write failed on " + loc(path));
}

}  // namespace cns
