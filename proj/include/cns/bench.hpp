#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cns/point_cloud.hpp"

namespace cns {

struct BenchParams {
  double query_interval = 10.0;  // meters along the query trajectory
  double db_interval = 5.0;      // meters along the database trajectory
  double tp_radius = 7.5;        // true-positive distance
  double crop_range = 100.0;     // per-scan range limit
  int top_n = 25;
  std::optional<int> submap_window;  // merge this many consecutive scans

  void validate() const {
    if (!(query_interval > 0) || !(db_interval > 0) || !(tp_radius > 0) || !(crop_range > 0) ||
        top_n < 1 || (submap_window && *submap_window < 1))
      throw Error("invalid benchmark parameters");
  }
};

// Fixed-length global descriptor of one scan.
struct Descriptor {
  std::vector<double> values;
  std::string method;
};

// Cosine ranks by direction (the convention for appearance descriptors);
// NegativeL2 ranks by metric closeness and is used for position oracles.
enum class Similarity { Cosine, NegativeL2 };

struct Candidate {
  int db_index = -1;
  double score = 0.0;
  double gt_distance = std::numeric_limits<double>::quiet_NaN();
};

struct Retrieval {
  int query_index = -1;
  std::vector<Candidate> candidates;  // score descending, ties by db index
  bool has_true_match = false;        // some db entry lies within tp_radius
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct BenchReport {
  std::vector<PrPoint> pr_curve;  // threshold descending
  double auc = 0.0;
  std::vector<std::pair<int, double>> recall_at;  // (N, R@N), N ascending
  double max_f1 = 0.0;
  std::size_t num_queries = 0;
  std::size_t num_true_match_queries = 0;
  BenchParams params;
};

// Greedy arc-length sampling: the first pose is always selected, then every
// pose once the accumulated travel distance reaches `interval`.
std::vector<std::size_t> sample_trajectory(const Trajectory& traj, double interval);

// Ring x sector polar grid over the x-y plane, cell value = max point z,
// empty cells 0, flattened ring-major. Throws on an empty cloud.
Descriptor describe_bev(const PointCloud& cloud, int rings = 20, int sectors = 60,
                        double max_range = 100.0);

// Candidates ranked by similarity, deterministic tie-break by lower index.
Retrieval retrieve(const Descriptor& query, std::span<const Descriptor> db, int top_n,
                   Similarity similarity = Similarity::Cosine);

// Fills gt_distance for every candidate and has_true_match from the full
// database position list.
void annotate_ground_truth(Retrieval& retrieval, const Vec3& query_position,
                           std::span<const Vec3> db_positions, double tp_radius);

// Retrieval for every query descriptor, in query order; runs in parallel.
std::vector<Retrieval> run_retrieval(std::span<const Descriptor> query_descriptors,
                                     std::span<const Vec3> query_positions,
                                     std::span<const Descriptor> db_descriptors,
                                     std::span<const Vec3> db_positions,
                                     const BenchParams& params, Similarity similarity);

// Threshold-sweep evaluation over top-1 candidates. A query is predicted
// positive iff its top-1 score >= theta; it is a TP when the top-1 candidate
// lies within tp_radius. Recall is measured against the number of queries
// that have a true match at all. Throws NoTrueMatchError when none does.
BenchReport evaluate(std::span<const Retrieval> retrievals, const BenchParams& params);

// Precision and recall at one externally chosen threshold.
std::pair<double, double> precision_recall_at(std::span<const Retrieval> retrievals,
                                              const BenchParams& params, double threshold);

// Descriptor exchange file: header "id,dim,v0..v{dim-1}", one row per scan.
void save_descriptors_csv(const std::filesystem::path& path,
                          const std::map<int, Descriptor>& descriptors);
std::map<int, Descriptor> load_descriptors_csv(const std::filesystem::path& path);

std::string bench_report_json(const BenchReport& report);
std::string pr_curve_csv(const BenchReport& report);  // "threshold,precision,recall"

}  // namespace cns
