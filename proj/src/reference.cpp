#include "cns/reference.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cns::ref {

double nn_squared_dist_brute(const PointCloud& target, const Vec3& query) {
  if (target.empty()) throw Error("nn_squared_dist_brute: empty target");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : target.points) best = std::min(best, squared_dist(p, query));
  return best;
}

PointCloud overlap_set_brute(const PointCloud& source, const PointCloud& target, double tau) {
  if (target.empty()) throw Error("overlap_set_brute: empty target");
  if (!(tau > 0.0)) throw Error("overlap_set_brute requires tau > 0");
  const double tau_sq = tau * tau;

  PointCloud out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (nn_squared_dist_brute(target, source.points[i]) <= tau_sq) {
      out.points.push_back(source.points[i]);
      if (source.has_intensity()) out.intensity.push_back(source.intensity[i]);
    }
  }
  return out;
}

namespace {

struct VoxelIdHash {
  std::size_t operator()(const VoxelId& id) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : {id.ix, id.iy, id.iz}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud voxel_downsample_serial(const PointCloud& cloud, const VoxelParams& params) {
  if (!(params.resolution > 0.0)) throw Error("voxel_downsample_serial: resolution must be > 0");

  std::unordered_map<VoxelId, std::vector<std::uint32_t>, VoxelIdHash> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    cells[voxel_id_of(cloud.points[i], params)].push_back(static_cast<std::uint32_t>(i));

  std::vector<const decltype(cells)::value_type*> ordered;
  ordered.reserve(cells.size());
  for (const auto& kv : cells) ordered.push_back(&kv);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  PointCloud out;
  out.points.reserve(ordered.size());
  if (cloud.has_intensity()) out.intensity.reserve(ordered.size());
  for (const auto* kv : ordered) {
    std::vector<std::uint32_t> members = kv->second;
    // Accumulate in coordinate order, matching voxel_downsample bit for bit.
    std::sort(members.begin(), members.end(), [&](std::uint32_t a, std::uint32_t b) {
      const Vec3& pa = cloud.points[a];
      const Vec3& pb = cloud.points[b];
      if (pa.x != pb.x) return pa.x < pb.x;
      if (pa.y != pb.y) return pa.y < pb.y;
      if (pa.z != pb.z) return pa.z < pb.z;
      return a < b;
    });
    Vec3 sum{};
    double isum = 0.0;
    for (std::uint32_t m : members) {
      sum += cloud.points[m];
      if (cloud.has_intensity()) isum += cloud.intensity[m];
    }
    const double count = static_cast<double>(members.size());
    out.points.push_back(sum / count);
    if (cloud.has_intensity()) out.intensity.push_back(static_cast<float>(isum / count));
  }
  return out;
}

bool in_hull_lp(std::span<const Vec3> points, const Vec3& p, double feas_tol) {
  const std::size_t n = points.size();
  if (n == 0) return false;

  // Work on coordinates shifted by p and scaled to O(1): find lambda >= 0
  // with sum(lambda) = 1 and sum(lambda * (x_i - p)) = 0.
  double scale = 0.0;
  for (const Vec3& x : points) {
    const Vec3 d = x - p;
    scale = std::max({scale, std::abs(d.x), std::abs(d.y), std::abs(d.z)});
  }
  if (scale == 0.0) return true;  // every point equals p

  constexpr int kRows = 4;
  const std::size_t cols = n + kRows;  // lambdas then artificials
  std::vector<double> tab(kRows * cols, 0.0);
  const auto at = [&](int r, std::size_t c) -> double& { return tab[r * cols + c]; };

  std::vector<double> rhs = {0.0, 0.0, 0.0, 1.0};
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3 d = (points[j] - p) / scale;
    at(0, j) = d.x;
    at(1, j) = d.y;
    at(2, j) = d.z;
    at(3, j) = 1.0;
  }
  for (int r = 0; r < kRows; ++r) at(r, n + r) = 1.0;

  // Phase-1 objective: minimize the sum of artificials. Reduced costs start
  // as the negated column sums of the constraint rows.
  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (int r = 0; r < kRows; ++r) cost[j] -= at(r, j);

  std::vector<std::size_t> basis = {n, n + 1, n + 2, n + 3};
  constexpr double kPivotTol = 1e-11;
  const std::size_t max_iters = 64 * (n + kRows);
  const std::size_t bland_after = 8 * (n + kRows);

  const auto artificial_sum = [&] {
    double s = 0.0;
    for (int r = 0; r < kRows; ++r)
      if (basis[r] >= n) s += rhs[r];
    return s;
  };

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    if (artificial_sum() <= feas_tol) return true;

    // Entering column: Dantzig rule, Bland once cycles become a risk.
    std::size_t enter = cols;
    if (iter < bland_after) {
      double best = -kPivotTol;
      for (std::size_t j = 0; j < cols; ++j)
        if (cost[j] < best) {
          best = cost[j];
          enter = j;
        }
    } else {
      for (std::size_t j = 0; j < cols; ++j)
        if (cost[j] < -kPivotTol) {
          enter = j;
          break;
        }
    }
    if (enter == cols) break;  // optimal

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < kRows; ++r) {
      if (at(r, enter) > kPivotTol) {
        const double ratio = rhs[r] / at(r, enter);
        if (ratio < best_ratio - 1e-15) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) break;  // unbounded; cannot happen with sum(lambda)=1 row

    // Pivot.
    const double pivot = at(leave, enter);
    for (std::size_t j = 0; j < cols; ++j) at(leave, j) /= pivot;
    rhs[leave] /= pivot;
    for (int r = 0; r < kRows; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) at(r, j) -= f * at(leave, j);
      rhs[r] -= f * rhs[leave];
      if (rhs[r] < 0.0 && rhs[r] > -1e-12) rhs[r] = 0.0;
    }
    const double cf = cost[enter];
    if (cf != 0.0)
      for (std::size_t j = 0; j < cols; ++j) cost[j] -= cf * at(leave, j);
    basis[leave] = enter;
  }

  return artificial_sum() <= feas_tol;
}

PointCloud hull_restrict_brute(const PointCloud& source, const PointCloud& domain) {
  PointCloud out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (in_hull_lp(domain.points, source.points[i])) {
      out.points.push_back(source.points[i]);
      if (source.has_intensity()) out.intensity.push_back(source.intensity[i]);
    }
  }
  return out;
}

namespace {

PointCloud crop_serial(const PointCloud& cloud, const TcrParams& params) {
  if (!params.crop_range) return cloud;
  const double r = *params.crop_range;
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const bool keep = params.crop_mode == CropMode::Radial
                          ? p.squared_norm() <= r * r
                          : std::abs(p.x) <= r && std::abs(p.y) <= r && std::abs(p.z) <= r;
    if (keep) {
      out.points.push_back(p);
      if (cloud.has_intensity()) out.intensity.push_back(cloud.intensity[i]);
    }
  }
  return out;
}

// Affine-rank check mirroring the hull's degeneracy rule (tolerance
// 1e-7 * bbox diagonal) without building a hull.
void require_rank3(const PointCloud& cloud, const std::string& id) {
  const auto fail = [&](const char* why) {
    throw TcrError(TcrError::Kind::DegenerateHull,
                   "session '" + id + "' has no 3D hull: " + why);
  };
  if (cloud.size() < 4) fail("fewer than 4 points");
  const double tol = 1e-7 * cloud.bounds().diagonal();

  const Vec3& a = cloud.points[0];
  std::size_t bi = 0;
  double best = 0.0;
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    const double d = squared_dist(cloud.points[i], a);
    if (d > best) {
      best = d;
      bi = i;
    }
  }
  if (!(std::sqrt(best) > tol)) fail("points nearly coincide");
  const Vec3 u = cloud.points[bi] - a;

  best = 0.0;
  std::size_t ci = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = cross(cloud.points[i] - a, u).norm() / u.norm();
    if (d > best) {
      best = d;
      ci = i;
    }
  }
  if (!(best > tol)) fail("points nearly collinear");

  const Vec3 nrm = cross(u, cloud.points[ci] - a);
  const Vec3 unit = nrm / nrm.norm();
  best = 0.0;
  for (const Vec3& p : cloud.points) best = std::max(best, std::abs(dot(unit, p - a)));
  if (!(best > tol)) fail("points nearly coplanar");
}

}  // namespace

TcrReport brute_tcr(const PointCloud& source, const PointCloud& target, const TcrParams& params,
                    const std::string& source_id, const std::string& target_id,
                    ChangeSets* sets) {
  const VoxelParams voxel{params.voxel_resolution, params.voxel_origin};
  const PointCloud s_vox = voxel_downsample_serial(crop_serial(source, params), voxel);
  const PointCloud t_vox = voxel_downsample_serial(crop_serial(target, params), voxel);

  require_rank3(s_vox, source_id);
  require_rank3(t_vox, target_id);

  PointCloud h_st = hull_restrict_brute(s_vox, t_vox);
  PointCloud h_ts = hull_restrict_brute(t_vox, s_vox);

  const bool restricted = params.numerator_mode == NumeratorMode::HullRestricted;
  PointCloud o_st = overlap_set_brute(restricted ? h_st : s_vox, t_vox, params.tau);
  PointCloud o_ts = overlap_set_brute(restricted ? h_ts : t_vox, s_vox, params.tau);

  TcrReport report;
  report.source_id = source_id;
  report.target_id = target_id;
  report.params = params;
  report.n_o_st = o_st.size();
  report.n_o_ts = o_ts.size();
  report.n_h_st = h_st.size();
  report.n_h_ts = h_ts.size();

  if (report.n_h_st + report.n_h_ts == 0)
    throw TcrError(TcrError::Kind::EmptyDomain,
                   "sessions '" + source_id + "' and '" + target_id +
                       "' share no spatial domain; the ratio is undefined");

  const auto ratio = [](std::size_t o, std::size_t h) {
    if (h == 0) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 - static_cast<double>(o) / static_cast<double>(h);
  };
  report.tcr_forward = ratio(report.n_o_st, report.n_h_st);
  report.tcr_backward = ratio(report.n_o_ts, report.n_h_ts);
  report.tcr_sym = 1.0 - static_cast<double>(report.n_o_st + report.n_o_ts) /
                             static_cast<double>(report.n_h_st + report.n_h_ts);

  if (sets) {
    sets->o_st = std::move(o_st);
    sets->o_ts = std::move(o_ts);
    sets->h_st = std::move(h_st);
    sets->h_ts = std::move(h_ts);
    sets->voxelized_source = s_vox;
    sets->voxelized_target = t_vox;
  }
  return report;
}

}  // namespace cns::ref
