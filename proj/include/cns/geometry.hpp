#pragma once

#include <cmath>
#include <limits>

namespace cns {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double px, double py, double pz) : x(px), y(py), z(pz) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

using Point3 = Vec3;

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double squared_dist(const Vec3& a, const Vec3& b) { return (a - b).squared_norm(); }

// Unit quaternion (w, x, y, z).
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  Quat() = default;
  Quat(double qw, double qx, double qy, double qz) : w(qw), x(qx), y(qy), z(qz) {}

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quat normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  Quat operator*(const Quat& q) const {
    return {w * q.w - x * q.x - y * q.y - z * q.z,
            w * q.x + x * q.w + y * q.z - z * q.y,
            w * q.y - x * q.z + y * q.w + z * q.x,
            w * q.z + x * q.y - y * q.x + z * q.w};
  }

  Vec3 rotate(const Vec3& v) const {
    // q v q* expanded via the cross-product form.
    const Vec3 u{x, y, z};
    const Vec3 t = cross(u, v) * 2.0;
    return v + t * w + cross(u, t);
  }

  static Quat from_yaw(double yaw_rad) {
    return {std::cos(yaw_rad * 0.5), 0.0, 0.0, std::sin(yaw_rad * 0.5)};
  }

  static Quat from_axis_angle(const Vec3& axis, double angle_rad) {
    const Vec3 a = axis / axis.norm();
    const double s = std::sin(angle_rad * 0.5);
    return {std::cos(angle_rad * 0.5), a.x * s, a.y * s, a.z * s};
  }
};

// Timestamped rigid transform. Rotation must be unit within 1e-9.
struct Pose {
  double t = 0.0;
  Vec3 translation;
  Quat rotation;

  Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }

  // this ∘ other: apply `other` first, then this.
  Pose compose(const Pose& other) const {
    Pose out;
    out.t = t;
    out.rotation = rotation * other.rotation;
    out.translation = rotation.rotate(other.translation) + translation;
    return out;
  }

  Pose inverse() const {
    Pose out;
    out.t = t;
    out.rotation = rotation.conjugate();
    out.translation = out.rotation.rotate(translation) * -1.0;
    return out;
  }

  bool unit_rotation(double tol = 1e-9) const { return std::abs(rotation.norm() - 1.0) <= tol; }
};

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void expand(const Vec3& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
    hi.z = std::max(hi.z, p.z);
  }

  bool valid() const { return lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z; }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return valid() ? extent().norm() : 0.0; }

  // Squared distance from q to the box, 0 if inside.
  double squared_dist(const Vec3& q) const {
    double d = 0.0;
    const double dx = std::max({lo.x - q.x, 0.0, q.x - hi.x});
    const double dy = std::max({lo.y - q.y, 0.0, q.y - hi.y});
    const double dz = std::max({lo.z - q.z, 0.0, q.z - hi.z});
    d = dx * dx + dy * dy + dz * dz;
    return d;
  }
};

}  // namespace cns
