#include "cns/tcr.hpp"

#include <cstdio>

#include "cns/cloud_ops.hpp"
#include "json.hpp"

namespace cns {

PointCloud overlap_set(const PointCloud& source, const KdIndex& target_index, double tau) {
  if (!(tau > 0.0)) throw Error("overlap_set requires tau > 0");
  const double tau_sq = tau * tau;

  std::vector<char> keep(source.size());
  const std::int64_t n = static_cast<std::int64_t>(source.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i)
    keep[i] = target_index.nn_squared_dist(source.points[i]) <= tau_sq;

  PointCloud out;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    out.points.push_back(source.points[i]);
    if (source.has_intensity()) out.intensity.push_back(source.intensity[i]);
  }
  return out;
}

namespace {

PointCloud crop_for_params(const PointCloud& cloud, const TcrParams& params) {
  if (!params.crop_range) return cloud;
  return params.crop_mode == CropMode::Radial ? crop_range(cloud, *params.crop_range)
                                              : crop_box(cloud, *params.crop_range);
}

ConvexHull3 hull_or_degenerate(const PointCloud& voxelized, const std::string& id) {
  try {
    return quickhull(voxelized);
  } catch (const DegenerateInput& e) {
    throw TcrError(TcrError::Kind::DegenerateHull,
                   "session '" + id + "' has no 3D hull: " + e.what());
  }
}

}  // namespace

TcrReport tcr_pair(const PointCloud& source, const PointCloud& target, const TcrParams& params,
                   const std::string& source_id, const std::string& target_id,
                   ChangeSets* sets) {
  const VoxelParams voxel{params.voxel_resolution, params.voxel_origin};

  const PointCloud s_vox = voxel_downsample(crop_for_params(source, params), voxel);
  const PointCloud t_vox = voxel_downsample(crop_for_params(target, params), voxel);

  const ConvexHull3 hull_s = hull_or_degenerate(s_vox, source_id);
  const ConvexHull3 hull_t = hull_or_degenerate(t_vox, target_id);

  PointCloud h_st = hull_restrict(s_vox, hull_t);
  PointCloud h_ts = hull_restrict(t_vox, hull_s);

  const KdIndex s_index = KdIndex::build(s_vox);
  const KdIndex t_index = KdIndex::build(t_vox);

  const bool restricted = params.numerator_mode == NumeratorMode::HullRestricted;
  PointCloud o_st = overlap_set(restricted ? h_st : s_vox, t_index, params.tau);
  PointCloud o_ts = overlap_set(restricted ? h_ts : t_vox, s_index, params.tau);

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
  // The unions of origin-tagged sets are disjoint, so cardinalities add.
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

std::vector<std::vector<TcrReport>> tcr_stage_matrix(std::span<const PointCloud> sessions,
                                                     const TcrParams& params) {
  if (sessions.size() < 2) throw Error("tcr_stage_matrix needs at least 2 sessions");

  const auto id_of = [](std::size_t i) { return "session_" + std::to_string(i); };
  std::vector<std::vector<TcrReport>> matrix(sessions.size(),
                                             std::vector<TcrReport>(sessions.size()));
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    for (std::size_t j = i; j < sessions.size(); ++j) {
      TcrReport r = tcr_pair(sessions[i], sessions[j], params, id_of(i), id_of(j));
      matrix[i][j] = r;
      if (i != j) {
        // Mirror entry: directions swap, the symmetric ratio is shared.
        TcrReport m = r;
        std::swap(m.source_id, m.target_id);
        std::swap(m.n_o_st, m.n_o_ts);
        std::swap(m.n_h_st, m.n_h_ts);
        std::swap(m.tcr_forward, m.tcr_backward);
        matrix[j][i] = m;
      }
    }
  }
  return matrix;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json params_json(const TcrParams& p) {
  nlohmann::json j;
  j["tau"] = p.tau;
  j["voxel_resolution"] = p.voxel_resolution;
  if (p.crop_range)
    j["crop_range"] = *p.crop_range;
  else
    j["crop_range"] = nullptr;
  j["crop_mode"] = p.crop_mode == CropMode::Radial ? "radial" : "per-axis";
  j["numerator_mode"] =
      p.numerator_mode == NumeratorMode::HullRestricted ? "hull-restricted" : "literal";
  j["voxel_origin"] = {p.voxel_origin.x, p.voxel_origin.y, p.voxel_origin.z};
  return j;
}

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string tcr_report_json(const TcrReport& r) {
  nlohmann::json j;
  j["source_id"] = r.source_id;
  j["target_id"] = r.target_id;
  j["params"] = params_json(r.params);
  j["counts"] = {{"o_st", r.n_o_st}, {"o_ts", r.n_o_ts}, {"h_st", r.n_h_st}, {"h_ts", r.n_h_ts}};
  j["tcr_forward"] = finite_or_null(r.tcr_forward);
  j["tcr_backward"] = finite_or_null(r.tcr_backward);
  j["tcr_sym"] = finite_or_null(r.tcr_sym);
  return j.dump(2) + "\n";
}

std::string tcr_csv_header() {
  return "source_id,target_id,tau,voxel_resolution,crop_range,crop_mode,numerator_mode,"
         "o_st,o_ts,h_st,h_ts,tcr_forward,tcr_backward,tcr_sym";
}

std::string tcr_csv_row(const TcrReport& r) {
  std::string row = r.source_id + "," + r.target_id + "," + fmt_double(r.params.tau) + "," +
                    fmt_double(r.params.voxel_resolution) + ",";
  if (r.params.crop_range) row += fmt_double(*r.params.crop_range);
  row += std::string(",") + (r.params.crop_mode == CropMode::Radial ? "radial" : "per-axis");
  row += std::string(",") +
         (r.params.numerator_mode == NumeratorMode::HullRestricted ? "hull-restricted"
                                                                   : "literal");
  row += "," + std::to_string(r.n_o_st) + "," + std::to_string(r.n_o_ts) + "," +
         std::to_string(r.n_h_st) + "," + std::to_string(r.n_h_ts);
  row += "," + fmt_double(r.tcr_forward) + "," + fmt_double(r.tcr_backward) + "," +
         fmt_double(r.tcr_sym);
  return row;
}

}  // namespace cns
