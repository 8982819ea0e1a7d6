#include "cns/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace cns {

std::vector<std::size_t> sample_trajectory(const Trajectory& traj, double interval) {
  if (!(interval > 0.0)) throw Error("sample_trajectory requires interval > 0");
  traj.validate();

  std::vector<std::size_t> selected{0};
  double accumulated = 0.0;
  for (std::size_t i = 1; i < traj.poses.size(); ++i) {
    accumulated += (traj.poses[i].translation - traj.poses[i - 1].translation).norm();
    if (accumulated >= interval) {
      selected.push_back(i);
      accumulated = 0.0;
    }
  }
  return selected;
}

Descriptor describe_bev(const PointCloud& cloud, int rings, int sectors, double max_range) {
  if (cloud.empty()) throw Error("describe_bev requires a non-empty cloud");
  if (rings < 1 || sectors < 1 || !(max_range > 0.0))
    throw Error("describe_bev: invalid grid parameters");

  Descriptor desc;
  desc.method = "bev";
  desc.values.assign(static_cast<std::size_t>(rings) * sectors, 0.0);

  const double ring_width = max_range / rings;
  const double sector_width = 2.0 * std::numbers::pi / sectors;
  const std::int64_t n = static_cast<std::int64_t>(cloud.size());
  std::vector<char> cell_occupied(desc.values.size(), 0);

  // Max-merge of per-thread grids; max is order-independent, so the result
  // does not depend on the schedule.
#pragma omp parallel
  {
    std::vector<double> local(desc.values.size(), 0.0);
    std::vector<char> occupied(desc.values.size(), 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      const Vec3& p = cloud.points[i];
      const double radius = std::hypot(p.x, p.y);
      if (radius > max_range) continue;
      int ring = static_cast<int>(radius / ring_width);
      ring = std::min(ring, rings - 1);
      const double azimuth = std::atan2(p.y, p.x);  // [-pi, pi]
      int sector = static_cast<int>((azimuth + std::numbers::pi) / sector_width);
      sector = std::clamp(sector, 0, sectors - 1);
      const std::size_t cell = static_cast<std::size_t>(ring) * sectors + sector;
      if (!occupied[cell] || p.z > local[cell]) {
        local[cell] = p.z;
        occupied[cell] = 1;
      }
    }
#pragma omp critical
    for (std::size_t c = 0; c < local.size(); ++c)
      if (occupied[c] && (!cell_occupied[c] || local[c] > desc.values[c])) {
        desc.values[c] = local[c];
        cell_occupied[c] = 1;
      }
  }
  return desc;
}

namespace {

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double negative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return -std::sqrt(sq);
}

}  // namespace

Retrieval retrieve(const Descriptor& query, std::span<const Descriptor> db, int top_n,
                   Similarity similarity) {
  if (db.empty()) throw Error("retrieve requires a non-empty database");
  if (top_n < 1) throw Error("retrieve requires top_n >= 1");
  for (const Descriptor& d : db)
    if (d.values.size() != query.values.size())
      throw Error("descriptor length mismatch between query and database");

  std::vector<Candidate> all(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    const double score = similarity == Similarity::Cosine
                             ? cosine_similarity(query.values, db[i].values)
                             : negative_l2(query.values, db[i].values);
    all[i] = {static_cast<int>(i), score, std::numeric_limits<double>::quiet_NaN()};
  }

  const std::size_t keep = std::min<std::size_t>(top_n, db.size());
  const auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.db_index < b.db_index;
  };
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), better);
  all.resize(keep);

  Retrieval out;
  out.candidates = std::move(all);
  return out;
}

void annotate_ground_truth(Retrieval& retrieval, const Vec3& query_position,
                           std::span<const Vec3> db_positions, double tp_radius) {
  const double radius_sq = tp_radius * tp_radius;
  retrieval.has_true_match = false;
  for (const Vec3& p : db_positions) {
    if (squared_dist(p, query_position) <= radius_sq) {
      retrieval.has_true_match = true;
      break;
    }
  }
  for (Candidate& c : retrieval.candidates)
    c.gt_distance = (db_positions[c.db_index] - query_position).norm();
}

std::vector<Retrieval> run_retrieval(std::span<const Descriptor> query_descriptors,
                                     std::span<const Vec3> query_positions,
                                     std::span<const Descriptor> db_descriptors,
                                     std::span<const Vec3> db_positions,
                                     const BenchParams& params, Similarity similarity) {
  params.validate();
  if (query_descriptors.size() != query_positions.size() ||
      db_descriptors.size() != db_positions.size())
    throw Error("run_retrieval: descriptor/position count mismatch");

  std::vector<Retrieval> out(query_descriptors.size());
  const std::int64_t n = static_cast<std::int64_t>(query_descriptors.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    Retrieval r = retrieve(query_descriptors[i], db_descriptors, params.top_n, similarity);
    r.query_index = static_cast<int>(i);
    annotate_ground_truth(r, query_positions[i], db_positions, params.tp_radius);
    out[i] = std::move(r);
  }
  return out;
}

namespace {

struct SweepCounts {
  std::size_t tp = 0, fp = 0;
};

SweepCounts counts_at(std::span<const Retrieval> retrievals, double tp_radius, double threshold) {
  SweepCounts c;
  for (const Retrieval& r : retrievals) {
    if (r.candidates.empty()) continue;
    const Candidate& top = r.candidates.front();
    if (!(top.score >= threshold)) continue;
    if (top.gt_distance <= tp_radius)
      ++c.tp;
    else
      ++c.fp;
  }
  return c;
}

std::size_t count_true_match(std::span<const Retrieval> retrievals) {
  std::size_t n = 0;
  for (const Retrieval& r : retrievals) n += r.has_true_match ? 1 : 0;
  return n;
}

}  // namespace

std::pair<double, double> precision_recall_at(std::span<const Retrieval> retrievals,
                                              const BenchParams& params, double threshold) {
  const std::size_t n_true = count_true_match(retrievals);
  if (n_true == 0) throw NoTrueMatchError("no query has a true match in the database");
  const SweepCounts c = counts_at(retrievals, params.tp_radius, threshold);
  const double precision =
      (c.tp + c.fp) == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(n_true);
  return {precision, recall};
}

BenchReport evaluate(std::span<const Retrieval> retrievals, const BenchParams& params) {
  params.validate();
  if (retrievals.empty()) throw Error("evaluate requires at least one retrieval");

  const std::size_t n_true = count_true_match(retrievals);
  if (n_true == 0) throw NoTrueMatchError("no query has a true match in the database");

  BenchReport report;
  report.params = params;
  report.num_queries = retrievals.size();
  report.num_true_match_queries = n_true;

  // Threshold sweep over all observed top-1 scores plus the two endpoints,
  // descending, so recall is non-decreasing along the curve.
  std::vector<double> thresholds{std::numeric_limits<double>::infinity()};
  for (const Retrieval& r : retrievals)
    if (!r.candidates.empty()) thresholds.push_back(r.candidates.front().score);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  for (double theta : thresholds) {
    const auto [precision, recall] = precision_recall_at(retrievals, params, theta);
    report.pr_curve.push_back({theta, precision, recall});
  }

  double auc = 0.0;
  double max_f1 = 0.0;
  for (std::size_t k = 0; k + 1 < report.pr_curve.size(); ++k) {
    const PrPoint& a = report.pr_curve[k];
    const PrPoint& b = report.pr_curve[k + 1];
    auc += (b.recall - a.recall) * 0.5 * (a.precision + b.precision);
  }
  for (const PrPoint& p : report.pr_curve) {
    const double denom = p.precision + p.recall;
    if (denom > 0.0) max_f1 = std::max(max_f1, 2.0 * p.precision * p.recall / denom);
  }
  report.auc = auc;
  report.max_f1 = max_f1;

  // R@N for the usual report points, clipped to the candidate depth.
  std::vector<int> ns{1, 5, 10, 25};
  ns.erase(std::remove_if(ns.begin(), ns.end(), [&](int n) { return n > params.top_n; }),
           ns.end());
  if (ns.empty() || ns.back() != params.top_n) ns.push_back(params.top_n);
  for (int n : ns) {
    std::size_t hit = 0;
    for (const Retrieval& r : retrievals) {
      if (!r.has_true_match) continue;
      const std::size_t depth = std::min<std::size_t>(n, r.candidates.size());
      for (std::size_t k = 0; k < depth; ++k) {
        if (r.candidates[k].gt_distance <= params.tp_radius) {
          ++hit;
          break;
        }
      }
    }
    report.recall_at.emplace_back(n, static_cast<double>(hit) / static_cast<double>(n_true));
  }
  return report;
}

void save_descriptors_csv(const std::filesystem::path& path,
                          const std::map<int, Descriptor>& descriptors) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

  std::size_t dim = 0;
  for (const auto& [id, d] : descriptors) dim = std::max(dim, d.values.size());
  out << "id,dim";
  for (std::size_t i = 0; i < dim; ++i) out << ",v" << i;
  out << "\n";

  char buf[40];
  for (const auto& [id, d] : descriptors) {
    if (d.values.size() != dim) throw Error("descriptor length mismatch while saving CSV");
    out << id << "," << dim;
    for (double v : d.values) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

std::map<int, Descriptor> load_descriptors_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line) || line.rfind("id,dim", 0) != 0)
    throw FormatError("descriptor CSV missing 'id,dim,...' header in '" + path.string() + "'");

  std::map<int, Descriptor> out;
  std::size_t dim = std::string::npos;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    const auto next = [&](const char* what) {
      if (!std::getline(ss, field, ','))
        throw FormatError(std::string("missing ") + what + " on line " +
                          std::to_string(line_no) + " of '" + path.string() + "'");
      return field;
    };
    const int id = std::stoi(next("id"));
    const std::size_t row_dim = static_cast<std::size_t>(std::stoul(next("dim")));
    if (dim == std::string::npos) dim = row_dim;
    if (row_dim != dim)
      throw FormatError("inconsistent descriptor dim on line " + std::to_string(line_no) +
                        " of '" + path.string() + "'");
    Descriptor d;
    d.method = "external-csv";
    d.values.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) d.values.push_back(std::stod(next("value")));
    if (std::getline(ss, field, ','))
      throw FormatError("trailing fields on line " + std::to_string(line_no) + " of '" +
                        path.string() + "'");
    if (!out.emplace(id, std::move(d)).second)
      throw FormatError("duplicate id on line " + std::to_string(line_no) + " of '" +
                        path.string() + "'");
  }
  return out;
}

namespace {

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string bench_report_json(const BenchReport& r) {
  nlohmann::json j;
  j["params"] = {{"query_interval", r.params.query_interval},
                 {"db_interval", r.params.db_interval},
                 {"tp_radius", r.params.tp_radius},
                 {"crop_range", r.params.crop_range},
                 {"top_n", r.params.top_n},
                 {"submap_window",
                  r.params.submap_window ? nlohmann::json(*r.params.submap_window)
                                         : nlohmann::json(nullptr)}};
  j["num_queries"] = r.num_queries;
  j["num_true_match_queries"] = r.num_true_match_queries;
  j["auc"] = r.auc;
  j["max_f1"] = r.max_f1;
  nlohmann::json recall = nlohmann::json::object();
  for (const auto& [n, v] : r.recall_at) recall[std::to_string(n)] = v;
  j["recall_at"] = recall;
  nlohmann::json curve = nlohmann::json::array();
  for (const PrPoint& p : r.pr_curve)
    curve.push_back({{"threshold", finite_or_null(p.threshold)},
                     {"precision", p.precision},
                     {"recall", p.recall}});
  j["pr_curve"] = curve;
  return j.dump(2) + "\n";
}

std::string pr_curve_csv(const BenchReport& r) {
  std::string out = "threshold,precision,recall\n";
  char buf[128];
  for (const PrPoint& p : r.pr_curve) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.threshold, p.precision, p.recall);
    out += buf;
  }
  return out;
}

}  // namespace cns
