#include <algorithm>
#include <fstream>

#include "cns/bench.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cns;
using namespace cns::testing;

namespace {

Trajectory straight_line(std::size_t n, double spacing) {
  Trajectory traj;
  for (std::size_t i = 0; i < n; ++i) {
    Pose p;
    p.t = static_cast<double>(i);
    p.translation = {spacing * static_cast<double>(i), 0, 0};
    traj.poses.push_back(p);
  }
  return traj;
}

Retrieval single_candidate(double score, double distance, bool has_true_match) {
  Retrieval r;
  r.candidates.push_back({0, score, distance});
  r.has_true_match = has_true_match;
  return r;
}

}  // namespace

TEST_CASE("sample_trajectory: straight line and single pose") {
  const std::vector<std::size_t> picks = sample_trajectory(straight_line(101, 1.0), 10.0);
  REQUIRE(picks.size() == 11);
  for (std::size_t k = 0; k < picks.size(); ++k) CHECK(picks[k] == 10 * k);

  CHECK(sample_trajectory(straight_line(1, 1.0), 5.0) == std::vector<std::size_t>{0});
}

TEST_CASE("sample_trajectory: greedy arc-length property on a random walk") {
  Rng rng(17);
  Trajectory traj;
  Vec3 pos{};
  for (int i = 0; i < 500; ++i) {
    Pose p;
    p.t = i * 0.05;
    p.translation = pos;
    traj.poses.push_back(p);
    pos += {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), 0};
  }

  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < traj.size(); ++i)
    cum.push_back(cum.back() +
                  (traj.poses[i].translation - traj.poses[i - 1].translation).norm());

  const double interval = 7.5;
  const std::vector<std::size_t> picks = sample_trajectory(traj, interval);
  REQUIRE(!picks.empty());
  CHECK(picks[0] == 0);
  for (std::size_t k = 1; k < picks.size(); ++k) {
    CHECK(cum[picks[k]] - cum[picks[k - 1]] >= interval);
    // Greedy: the previous pose was still short of the interval.
    CHECK(cum[picks[k] - 1] - cum[picks[k - 1]] < interval);
  }
}

TEST_CASE("describe_bev: single point occupies exactly one cell") {
  PointCloud cloud;
  cloud.points.push_back({5.0, 0.0, 2.0});
  const Descriptor d = describe_bev(cloud, 20, 60, 100.0);
  REQUIRE(d.values.size() == 1200);

  // Planar radius 5 -> ring 1; azimuth 0 -> sector 30.
  const std::size_t expected_cell = 1 * 60 + 30;
  for (std::size_t c = 0; c < d.values.size(); ++c)
    CHECK(d.values[c] == (c == expected_cell ? 2.0 : 0.0));

  CHECK_THROWS_AS(describe_bev(PointCloud{}), Error);
}

TEST_CASE("describe_bev: 180-degree rotation shifts sectors by half a turn") {
  Rng rng(23);
  PointCloud cloud;
  for (int i = 0; i < 300; ++i) {
    const double radius = rng.uniform(2.0, 90.0);
    const double az = rng.uniform(-3.0, 3.0);  // stays clear of the +/-pi seam
    const double z = rng.uniform(-2.0, 15.0);
    cloud.points.push_back({radius * std::cos(az), radius * std::sin(az), z});
  }
  PointCloud rotated;
  for (const Vec3& p : cloud.points) rotated.points.push_back({-p.x, -p.y, p.z});

  const int rings = 20, sectors = 60;
  const Descriptor a = describe_bev(cloud, rings, sectors, 100.0);
  const Descriptor b = describe_bev(rotated, rings, sectors, 100.0);
  for (int r = 0; r < rings; ++r)
    for (int s = 0; s < sectors; ++s)
      CHECK(a.values[r * sectors + s] ==
            b.values[r * sectors + (s + sectors / 2) % sectors]);
}

TEST_CASE("describe_bev separates nearby viewpoints from far ones") {
  const SceneSpec scene = random_scene(91, 2, 150.0, 150.0, 1.0);
  LidarSpec lidar;
  lidar.horizontal_res_deg = 1.0;

  const auto scan_desc = [&](const Vec3& position, double yaw) {
    Pose pose;
    pose.translation = position;
    pose.rotation = Quat::from_yaw(yaw);
    return describe_bev(simulate_scan(scene, 2, pose, lidar));
  };
  const auto cosine = [](const Descriptor& a, const Descriptor& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      dot += a.values[i] * b.values[i];
      na += a.values[i] * a.values[i];
      nb += b.values[i] * b.values[i];
    }
    return dot / std::sqrt(na * nb);
  };

  const Descriptor here = scan_desc({-20, 5, 1.8}, 0.1);
  const Descriptor nearby = scan_desc({-18, 5.5, 1.8}, 0.1);
  const Descriptor far_a = scan_desc({45, -40, 1.8}, 0.1);
  const Descriptor far_b = scan_desc({0, 55, 1.8}, 2.0);

  const double same_place = cosine(here, nearby);
  CHECK(same_place > cosine(here, far_a));
  CHECK(same_place > cosine(here, far_b));
}

TEST_CASE("retrieve: exact hit, orthogonal vectors, tie-break") {
  std::vector<Descriptor> db(3);
  db[0].values = {1, 0, 0};
  db[1].values = {0, 1, 0};
  db[2].values = {1, 0, 0};  // duplicate of db[0]

  Descriptor q;
  q.values = {1, 0, 0};
  const Retrieval r = retrieve(q, db, 3);
  REQUIRE(r.candidates.size() == 3);
  CHECK(r.candidates[0].score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.candidates[0].db_index == 0);  // tie with db[2]: lower index wins
  CHECK(r.candidates[1].db_index == 2);
  CHECK(r.candidates[2].score == 0.0);   // orthogonal

  CHECK_THROWS_AS(retrieve(q, std::span<const Descriptor>{}, 3), Error);
  std::vector<Descriptor> bad(1);
  bad[0].values = {1, 0};
  CHECK_THROWS_AS(retrieve(q, bad, 1), Error);
}

TEST_CASE("retrieve matches a full-sort oracle on random descriptors") {
  Rng rng(29);
  std::vector<Descriptor> db(40);
  for (Descriptor& d : db)
    for (int k = 0; k < 16; ++k) d.values.push_back(rng.uniform(-1, 1));
  Descriptor q;
  for (int k = 0; k < 16; ++k) q.values.push_back(rng.uniform(-1, 1));

  const int top_n = 10;
  const Retrieval r = retrieve(q, db, top_n);

  // Oracle: full sort of all cosine scores.
  std::vector<std::pair<double, int>> scored;
  for (std::size_t i = 0; i < db.size(); ++i) {
    double dot = 0, nq = 0, nd = 0;
    for (int k = 0; k < 16; ++k) {
      dot += q.values[k] * db[i].values[k];
      nq += q.values[k] * q.values[k];
      nd += db[i].values[k] * db[i].values[k];
    }
    scored.emplace_back(dot / (std::sqrt(nq) * std::sqrt(nd)), static_cast<int>(i));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  REQUIRE(r.candidates.size() == top_n);
  for (int k = 0; k < top_n; ++k) {
    CHECK(r.candidates[k].db_index == scored[k].second);
    CHECK(r.candidates[k].score == scored[k].first);
  }
}

TEST_CASE("evaluate: three-query worked example") {
  std::vector<Retrieval> rs{single_candidate(0.9, 2.0, true),
                            single_candidate(0.8, 20.0, true),
                            single_candidate(0.7, 3.0, true)};
  BenchParams params;

  const auto [p_07, r_07] = precision_recall_at(rs, params, 0.7);
  CHECK(p_07 == 2.0 / 3.0);
  CHECK(r_07 == 2.0 / 3.0);

  const auto [p_085, r_085] = precision_recall_at(rs, params, 0.85);
  CHECK(p_085 == 1.0);
  CHECK(r_085 == 1.0 / 3.0);

  const BenchReport report = evaluate(rs, params);
  CHECK(report.max_f1 == 2.0 / 3.0);
  CHECK(report.num_true_match_queries == 3);

  // Sweep endpoints: +inf gives (P=1, R=0), -inf accepts everything.
  CHECK(report.pr_curve.front().precision == 1.0);
  CHECK(report.pr_curve.front().recall == 0.0);
  CHECK(report.pr_curve.back().recall == 2.0 / 3.0);
}

TEST_CASE("evaluate: no-true-match query is an FP when accepted, never an FN") {
  std::vector<Retrieval> rs{single_candidate(0.9, 2.0, true),
                            single_candidate(0.8, 50.0, false)};
  BenchParams params;

  const auto [p, r] = precision_recall_at(rs, params, 0.8);
  CHECK(p == 0.5);   // the accepted wrong match counts against precision
  CHECK(r == 1.0);   // but the query never enters the recall denominator

  const auto [p_rej, r_rej] = precision_recall_at(rs, params, 0.85);
  CHECK(p_rej == 1.0);
  CHECK(r_rej == 1.0);
}

TEST_CASE("evaluate: error when no query has a true match") {
  std::vector<Retrieval> rs{single_candidate(0.9, 50.0, false)};
  CHECK_THROWS_AS(evaluate(rs, BenchParams{}), NoTrueMatchError);
}

TEST_CASE("evaluate: recall monotone along the sweep, R@N non-decreasing") {
  Rng rng(37);
  std::vector<Retrieval> rs;
  for (int i = 0; i < 60; ++i) {
    Retrieval r;
    r.query_index = i;
    for (int k = 0; k < 25; ++k)
      r.candidates.push_back(
          {k, 1.0 - 0.01 * k - rng.uniform01() * 0.2, rng.uniform(0.0, 30.0)});
    std::sort(r.candidates.begin(), r.candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    r.has_true_match = rng.uniform01() < 0.8;
    rs.push_back(r);
  }
  // Make at least one true match coherent with a short distance.
  rs[0].has_true_match = true;
  rs[0].candidates[0].gt_distance = 1.0;

  const BenchReport report = evaluate(rs, BenchParams{});
  for (std::size_t k = 0; k + 1 < report.pr_curve.size(); ++k) {
    CHECK(report.pr_curve[k].threshold > report.pr_curve[k + 1].threshold);
    CHECK(report.pr_curve[k].recall <= report.pr_curve[k + 1].recall);
  }
  for (const PrPoint& p : report.pr_curve) {
    CHECK(p.precision >= 0.0);
    CHECK(p.precision <= 1.0);
    CHECK(p.recall >= 0.0);
    CHECK(p.recall <= 1.0);
  }
  for (std::size_t k = 0; k + 1 < report.recall_at.size(); ++k) {
    CHECK(report.recall_at[k].first < report.recall_at[k + 1].first);
    CHECK(report.recall_at[k].second <= report.recall_at[k + 1].second);
  }
  CHECK(report.auc >= 0.0);
  CHECK(report.auc <= 1.0);

  // Max F1 equals the brute-force maximum over every curve threshold.
  double brute = 0.0;
  for (const PrPoint& p : report.pr_curve)
    if (p.precision + p.recall > 0)
      brute = std::max(brute, 2 * p.precision * p.recall / (p.precision + p.recall));
  CHECK(report.max_f1 == brute);
}

TEST_CASE("evaluate is invariant to the retrieval order") {
  Rng rng(41);
  std::vector<Retrieval> rs;
  for (int i = 0; i < 30; ++i) {
    Retrieval r = single_candidate(rng.uniform01(), rng.uniform(0.0, 20.0), true);
    r.query_index = i;
    rs.push_back(r);
  }
  std::vector<Retrieval> shuffled = rs;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(bench_report_json(evaluate(rs, BenchParams{})) ==
        bench_report_json(evaluate(shuffled, BenchParams{})));
}

TEST_CASE("perfect position oracle: all metrics are 1") {
  // Query poses every 10 m, database every 5 m along the same line; each
  // query is within 2.5 m (so < 7.5 m) of its best database pose.
  std::vector<Vec3> db_pos, q_pos;
  std::vector<Descriptor> db_desc, q_desc;
  for (int i = 0; i <= 40; ++i) {
    const Vec3 p{5.0 * i + 1.3, 0.7, 0};
    db_pos.push_back(p);
    db_desc.push_back({{p.x, p.y, p.z}, "oracle-position"});
  }
  for (int i = 0; i <= 20; ++i) {
    const Vec3 p{10.0 * i, 0, 0};
    q_pos.push_back(p);
    q_desc.push_back({{p.x, p.y, p.z}, "oracle-position"});
  }

  BenchParams params;
  const std::vector<Retrieval> rs =
      run_retrieval(q_desc, q_pos, db_desc, db_pos, params, Similarity::NegativeL2);
  const BenchReport report = evaluate(rs, params);
  CHECK(report.auc == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.max_f1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.recall_at.front().first == 1);
  CHECK(report.recall_at.front().second == 1.0);
}

TEST_CASE("descriptor CSV round-trip and shuffled row order") {
  std::map<int, Descriptor> descs;
  Rng rng(47);
  for (int id : {4, 1, 9, 2}) {
    Descriptor d;
    d.method = "external-csv";
    for (int k = 0; k < 6; ++k) d.values.push_back(rng.uniform(-5, 5));
    descs[id] = d;
  }
  const auto dir = scratch_dir("desc_csv");
  save_descriptors_csv(dir / "d.csv", descs);
  const auto loaded = load_descriptors_csv(dir / "d.csv");
  REQUIRE(loaded.size() == descs.size());
  for (const auto& [id, d] : descs) CHECK(loaded.at(id).values == d.values);

  // Same rows in reversed order parse to the same map.
  std::ifstream in(dir / "d.csv");
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  std::ofstream out(dir / "shuffled.csv");
  out << header << "\n";
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) out << *it << "\n";
  out.close();
  const auto reloaded = load_descriptors_csv(dir / "shuffled.csv");
  for (const auto& [id, d] : descs) CHECK(reloaded.at(id).values == d.values);
}
