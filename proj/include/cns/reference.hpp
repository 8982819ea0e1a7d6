#pragma once

#include <span>

#include "cns/tcr.hpp"

// Serial reference implementations, deliberately independent of the tuned
// kernels: linear-scan NN instead of the k-d tree, hash-grid voxelization
// instead of the sorted sweep, LP feasibility instead of facet planes. They
// back the test-suite oracles and the kernel benchmark; the main library
// never calls into them.
namespace cns::ref {

// Exact squared NN distance by linear scan.
double nn_squared_dist_brute(const PointCloud& target, const Vec3& query);

// O(|source| * |target|) unchanged-set computation.
PointCloud overlap_set_brute(const PointCloud& source, const PointCloud& target, double tau);

// Hash-map voxel grouping; output matches voxel_downsample bitwise (same
// deterministic per-voxel accumulation order, same output ordering).
PointCloud voxel_downsample_serial(const PointCloud& cloud, const VoxelParams& params);

// Phase-1 simplex feasibility: p lies in conv(points) iff some convex
// combination of the points reproduces it. feas_tol is relative to the
// spread of the points around p.
bool in_hull_lp(std::span<const Vec3> points, const Vec3& p, double feas_tol = 1e-9);

// Subset of `source` inside conv(domain), via in_hull_lp.
PointCloud hull_restrict_brute(const PointCloud& source, const PointCloud& domain);

// Same contract as tcr_pair, computed with the brute-force pieces above.
// Oracle scale: voxelized sessions up to ~2000 points.
TcrReport brute_tcr(const PointCloud& source, const PointCloud& target,
                    const TcrParams& params = {}, const std::string& source_id = "source",
                    const std::string& target_id = "target", ChangeSets* sets = nullptr);

}  // namespace cns::ref
