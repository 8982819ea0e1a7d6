#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cns/convex_hull.hpp"
#include "cns/kdtree.hpp"
#include "cns/point_cloud.hpp"
#include "cns/voxel.hpp"

namespace cns {

// HullRestricted computes the unchanged set within the hull-restricted
// domain, which keeps every ratio in [0, 1]. Literal ranges over the whole
// voxelized source cloud instead.
enum class NumeratorMode { HullRestricted, Literal };

enum class CropMode { Radial, PerAxis };

struct TcrParams {
  double tau = 4.5;
  double voxel_resolution = 5.0;
  std::optional<double> crop_range;  // none: maps are used as-is
  CropMode crop_mode = CropMode::Radial;
  NumeratorMode numerator_mode = NumeratorMode::HullRestricted;
  Vec3 voxel_origin{};  // must be shared by both sessions of a comparison
};

// Intermediate per-direction sets, all subsets of the voxelized session
// clouds: o_* within distance tau of the other session, h_* inside the other
// session's hull.
struct ChangeSets {
  PointCloud o_st, o_ts;
  PointCloud h_st, h_ts;
  PointCloud voxelized_source, voxelized_target;
};

struct TcrReport {
  std::string source_id = "source";
  std::string target_id = "target";
  std::size_t n_o_st = 0, n_o_ts = 0;
  std::size_t n_h_st = 0, n_h_ts = 0;
  // Directional ratios are NaN when the corresponding hull set is empty.
  double tcr_forward = 0.0;
  double tcr_backward = 0.0;
  double tcr_sym = 0.0;
  TcrParams params;
};

// Subset of `source` whose exact NN distance to the indexed target is
// <= tau; order preserved. Comparisons run on squared distances.
PointCloud overlap_set(const PointCloud& source, const KdIndex& target_index, double tau);

// Full pipeline over a session pair: optional crop, shared-origin voxel
// downsample, per-session hulls, hull-restricted domains, unchanged sets,
// ratios. Throws TcrError on a degenerate hull or an empty shared domain.
TcrReport tcr_pair(const PointCloud& source, const PointCloud& target,
                   const TcrParams& params = {}, const std::string& source_id = "source",
                   const std::string& target_id = "target", ChangeSets* sets = nullptr);

// Reports for every ordered pair; entry [i][j] has source i, target j.
// tcr_sym is symmetric across the diagonal by construction.
std::vector<std::vector<TcrReport>> tcr_stage_matrix(std::span<const PointCloud> sessions,
                                                     const TcrParams& params = {});

// Serialization of the report (schema documented in the README).
std::string tcr_report_json(const TcrReport& report);
std::string tcr_csv_header();
std::string tcr_csv_row(const TcrReport& report);

}  // namespace cns
