#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <omp.h>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cns/bench.hpp"
#include "cns/cloud_io.hpp"
#include "cns/cloud_ops.hpp"
#include "cns/scene_config.hpp"
#include "cns/synth.hpp"
#include "cns/tcr.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitEmptyDomain = 3;
constexpr int kExitNoTrueMatch = 4;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw cns::IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw cns::IoError("write failed on '" + path.string() + "'");
}

std::string scan_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.bin", index);
  return buf;
}

void apply_thread_count(int threads_flag) {
  int threads = threads_flag;
  if (threads <= 0) {
    if (const char* env = std::getenv("CNS_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
}

// ---------------------------------------------------------------------------
// tcr subcommand

struct TcrOptions {
  std::string source, target;
  std::string source_id, target_id;
  cns::TcrParams params;
  double crop = -1.0;
  bool crop_box = false;
  std::string numerator = "hull-restricted";
  std::vector<double> voxel_origin;
  bool labels = false;
  std::string out = ".";
};

cns::TcrParams resolve_tcr_params(const TcrOptions& opt) {
  cns::TcrParams params = opt.params;
  if (opt.crop > 0) params.crop_range = opt.crop;
  params.crop_mode = opt.crop_box ? cns::CropMode::PerAxis : cns::CropMode::Radial;
  if (opt.numerator == "literal")
    params.numerator_mode = cns::NumeratorMode::Literal;
  else if (opt.numerator == "hull-restricted")
    params.numerator_mode = cns::NumeratorMode::HullRestricted;
  else
    throw cns::Error("unknown numerator mode '" + opt.numerator + "'");
  if (!opt.voxel_origin.empty()) {
    if (opt.voxel_origin.size() != 3) throw cns::Error("--voxel-origin needs 3 values");
    params.voxel_origin = {opt.voxel_origin[0], opt.voxel_origin[1], opt.voxel_origin[2]};
  }
  return params;
}

// Hull-restricted domain cloud with intensity 1 for unchanged points.
cns::PointCloud label_cloud(const cns::PointCloud& domain, const cns::PointCloud& other_voxelized,
                            double tau) {
  const cns::KdIndex index = cns::KdIndex::build(other_voxelized);
  cns::PointCloud out;
  out.points = domain.points;
  out.intensity.resize(domain.size());
  const double tau_sq = tau * tau;
  for (std::size_t i = 0; i < domain.size(); ++i)
    out.intensity[i] = index.nn_squared_dist(domain.points[i]) <= tau_sq ? 1.0f : 0.0f;
  return out;
}

int run_tcr(const TcrOptions& opt) {
  const cns::TcrParams params = resolve_tcr_params(opt);
  const std::string source_id =
      opt.source_id.empty() ? fs::path(opt.source).stem().string() : opt.source_id;
  const std::string target_id =
      opt.target_id.empty() ? fs::path(opt.target).stem().string() : opt.target_id;

  const cns::PointCloud source = cns::load_cloud(opt.source, cns::format_for_path(opt.source));
  const cns::PointCloud target = cns::load_cloud(opt.target, cns::format_for_path(opt.target));

  cns::ChangeSets sets;
  const cns::TcrReport report = cns::tcr_pair(source, target, params, source_id, target_id,
                                              opt.labels ? &sets : nullptr);

  fs::create_directories(opt.out);
  write_file(fs::path(opt.out) / "tcr_report.json", cns::tcr_report_json(report));
  write_file(fs::path(opt.out) / "tcr_report.csv",
             cns::tcr_csv_header() + "\n" + cns::tcr_csv_row(report) + "\n");

  if (opt.labels) {
    cns::save_cloud(label_cloud(sets.h_st, sets.voxelized_target, params.tau),
                    fs::path(opt.out) / "labels_source.bin", cns::CloudFormat::XyzBinary);
    cns::save_cloud(label_cloud(sets.h_ts, sets.voxelized_source, params.tau),
                    fs::path(opt.out) / "labels_target.bin", cns::CloudFormat::XyzBinary);
  }

  std::cout << "tcr_sym " << report.tcr_sym << " (o_st " << report.n_o_st << ", o_ts "
            << report.n_o_ts << ", h_st " << report.n_h_st << ", h_ts " << report.n_h_ts
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench subcommand

struct BenchOptions {
  std::string db_dir, query_dir;
  std::vector<std::string> pairs;  // "DB=QUERY"
  std::string descriptor = "bev";
  std::string db_desc_csv, query_desc_csv;
  cns::BenchParams params;
  int submap_window = 0;
  bool crop_box = false;
  int rings = 20, sectors = 60;
  double tau = 4.5, voxel = 5.0;
  bool no_tcr = false;
  std::string out = ".";
};

struct Sequence {
  fs::path dir;
  cns::Trajectory poses;
};

Sequence load_sequence(const fs::path& dir) {
  if (!fs::exists(dir / "poses.txt"))
    throw cns::IoError("sequence directory '" + dir.string() + "' has no poses.txt");
  return {dir, cns::load_poses(dir / "poses.txt")};
}

cns::PointCloud load_scan(const Sequence& seq, std::size_t index) {
  const fs::path path = seq.dir / "scans" / scan_name(index);
  return cns::load_cloud(path, cns::CloudFormat::XyzBinary);
}

// Scan (or trailing submap) at a sampled pose, range-limited, sensor frame.
cns::PointCloud scan_context(const Sequence& seq, std::size_t index, const BenchOptions& opt) {
  cns::PointCloud cloud;
  if (opt.submap_window > 1) {
    const std::size_t first =
        index + 1 >= static_cast<std::size_t>(opt.submap_window)
            ? index + 1 - static_cast<std::size_t>(opt.submap_window)
            : 0;
    std::vector<cns::PointCloud> scans;
    std::vector<cns::Pose> poses;
    for (std::size_t j = first; j <= index; ++j) {
      scans.push_back(load_scan(seq, j));
      poses.push_back(seq.poses.poses[j]);
    }
    const cns::PointCloud world = cns::aggregate_map(scans, poses, scans.size());
    cloud = cns::transform_cloud(world, seq.poses.poses[index].inverse());
  } else {
    cloud = load_scan(seq, index);
  }
  return opt.crop_box ? cns::crop_box(cloud, opt.params.crop_range)
                      : cns::crop_range(cloud, opt.params.crop_range);
}

struct SampledSide {
  std::vector<std::size_t> indices;
  std::vector<cns::Vec3> positions;
  std::vector<cns::Descriptor> descriptors;
};

SampledSide build_side(const Sequence& seq, double interval, const BenchOptions& opt,
                       const std::string& desc_csv) {
  SampledSide side;
  side.indices = cns::sample_trajectory(seq.poses, interval);
  for (std::size_t idx : side.indices) side.positions.push_back(seq.poses.poses[idx].translation);

  if (opt.descriptor == "oracle-position") {
    for (const cns::Vec3& p : side.positions)
      side.descriptors.push_back({{p.x, p.y, p.z}, "oracle-position"});
  } else if (opt.descriptor == "external-csv") {
    if (desc_csv.empty()) throw cns::Error("--descriptor external-csv needs descriptor files");
    const auto table = cns::load_descriptors_csv(desc_csv);
    for (std::size_t idx : side.indices) {
      const auto it = table.find(static_cast<int>(idx));
      if (it == table.end())
        throw cns::FormatError("descriptor CSV '" + desc_csv + "' is missing id " +
                               std::to_string(idx));
      side.descriptors.push_back(it->second);
    }
  } else if (opt.descriptor == "bev") {
    side.descriptors.resize(side.indices.size());
    for (std::size_t k = 0; k < side.indices.size(); ++k)
      side.descriptors[k] = cns::describe_bev(scan_context(seq, side.indices[k], opt), opt.rings,
                                              opt.sectors, opt.params.crop_range);
  } else {
    throw cns::Error("unknown descriptor '" + opt.descriptor + "'");
  }
  return side;
}

cns::PointCloud session_map(const Sequence& seq) {
  std::vector<cns::PointCloud> scans;
  scans.reserve(seq.poses.size());
  for (std::size_t i = 0; i < seq.poses.size(); ++i) scans.push_back(load_scan(seq, i));
  return cns::aggregate_map(scans, seq.poses.poses, scans.size());
}

int run_bench(const BenchOptions& opt) {
  cns::BenchParams params = opt.params;
  if (opt.submap_window > 0) params.submap_window = opt.submap_window;
  params.validate();

  std::vector<std::pair<std::string, std::string>> pair_dirs;
  if (!opt.db_dir.empty() && !opt.query_dir.empty())
    pair_dirs.emplace_back(opt.db_dir, opt.query_dir);
  for (const std::string& spec : opt.pairs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw cns::Error("--pair expects DB=QUERY, got '" + spec + "'");
    pair_dirs.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
  }
  if (pair_dirs.empty()) throw cns::Error("bench needs --db/--query or at least one --pair");

  fs::create_directories(opt.out);
  std::string trend_csv = "pair_id,tcr_sym,auc\n";

  for (std::size_t pi = 0; pi < pair_dirs.size(); ++pi) {
    const Sequence db = load_sequence(pair_dirs[pi].first);
    const Sequence query = load_sequence(pair_dirs[pi].second);
    const std::string pair_id = fs::path(pair_dirs[pi].first).filename().string() + "__" +
                                fs::path(pair_dirs[pi].second).filename().string();

    BenchOptions side_opt = opt;
    side_opt.params = params;
    const SampledSide db_side = build_side(db, params.db_interval, side_opt, opt.db_desc_csv);
    const SampledSide query_side =
        build_side(query, params.query_interval, side_opt, opt.query_desc_csv);

    const cns::Similarity similarity = opt.descriptor == "oracle-position"
                                           ? cns::Similarity::NegativeL2
                                           : cns::Similarity::Cosine;
    const std::vector<cns::Retrieval> retrievals =
        cns::run_retrieval(query_side.descriptors, query_side.positions, db_side.descriptors,
                           db_side.positions, params, similarity);
    const cns::BenchReport report = cns::evaluate(retrievals, params);

    const fs::path pair_out =
        pair_dirs.size() == 1 ? fs::path(opt.out)
                              : fs::path(opt.out) / ("pair_" + std::to_string(pi) + "_" + pair_id);
    fs::create_directories(pair_out);
    write_file(pair_out / "bench_report.json", cns::bench_report_json(report));
    write_file(pair_out / "pr_curve.csv", cns::pr_curve_csv(report));

    if (!opt.no_tcr) {
      cns::TcrParams tcr_params;
      tcr_params.tau = opt.tau;
      tcr_params.voxel_resolution = opt.voxel;
      const cns::TcrReport tcr =
          cns::tcr_pair(session_map(db), session_map(query), tcr_params, "db", "query");
      char row[256];
      std::snprintf(row, sizeof(row), "%s,%.17g,%.17g\n", pair_id.c_str(), tcr.tcr_sym,
                    report.auc);
      trend_csv += row;
      std::cout << pair_id << ": auc " << report.auc << ", max_f1 " << report.max_f1
                << ", tcr_sym " << tcr.tcr_sym << "\n";
    } else {
      std::cout << pair_id << ": auc " << report.auc << ", max_f1 " << report.max_f1 << "\n";
    }
  }

  if (!opt.no_tcr) write_file(fs::path(opt.out) / "auc_vs_tcr.csv", trend_csv);
  return 0;
}

// ---------------------------------------------------------------------------
// synth subcommand

struct SynthOptions {
  std::string scene_file, trajectory_file;
  std::string stages;  // comma list; empty = all
  std::int64_t seed = -1;
  cns::LidarSpec lidar;
  std::string out = ".";
};

int run_synth(const SynthOptions& opt) {
  cns::SceneSpec scene = cns::load_scene_config(opt.scene_file);
  if (opt.seed >= 0) scene.seed = static_cast<std::uint64_t>(opt.seed);
  const cns::TrajectoryConfig traj_config = cns::load_trajectory_config(opt.trajectory_file);
  const cns::Trajectory traj = cns::build_trajectory(traj_config);
  opt.lidar.validate();

  std::vector<int> stages;
  if (opt.stages.empty()) {
    for (int s = 1; s <= scene.num_stages; ++s) stages.push_back(s);
  } else {
    std::istringstream ss(opt.stages);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) stages.push_back(std::stoi(item));
  }

  for (int stage : stages) {
    const auto [scans, poses] = cns::gen_sequence(scene, stage, traj, opt.lidar);

    char seq_name[16];
    std::snprintf(seq_name, sizeof(seq_name), "%02d", stage);
    const fs::path seq_dir = fs::path(opt.out) / scene.name / seq_name;
    fs::create_directories(seq_dir / "scans");

    for (std::size_t i = 0; i < scans.size(); ++i)
      cns::save_cloud(scans[i], seq_dir / "scans" / scan_name(i), cns::CloudFormat::XyzBinary);
    cns::save_poses(poses, seq_dir / "poses.txt");

    json manifest;
    manifest["map"] = scene.name;
    manifest["sequence"] = seq_name;
    manifest["stage"] = stage;
    manifest["seed"] = scene.seed;
    manifest["scan_count"] = scans.size();
    manifest["point_format"] = "xyz-f32le";
    manifest["lidar"] = {{"channels", opt.lidar.channels},
                         {"vertical_fov_deg", opt.lidar.vertical_fov_deg},
                         {"max_range", opt.lidar.max_range},
                         {"horizontal_res_deg", opt.lidar.horizontal_res_deg},
                         {"rate_hz", opt.lidar.rate_hz}};
    write_file(seq_dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote " << seq_dir.string() << " (" << scans.size() << " scans)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// aggregate subcommand

struct AggregateOptions {
  std::string seq_dir;
  double crop = -1.0;
  bool crop_box = false;
  std::string out;
};

int run_aggregate(const AggregateOptions& opt) {
  const Sequence seq = load_sequence(opt.seq_dir);
  cns::PointCloud map = session_map(seq);
  if (opt.crop > 0)
    map = opt.crop_box ? cns::crop_box(map, opt.crop) : cns::crop_range(map, opt.crop);
  cns::save_cloud(map, opt.out, cns::format_for_path(opt.out));
  std::cout << "wrote " << opt.out << " (" << map.size() << " points)\n";
  return 0;
}

int error_exit(const std::string& type, const std::string& message, int code) {
  json body;
  body["error"] = {{"type", type}, {"message", message}};
  std::cerr << body.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cns: temporal change ratios and place-recognition benchmarks "
               "for point-cloud map sessions"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker thread count (overrides the CNS_THREADS environment variable)");

  TcrOptions tcr_opt;
  CLI::App* tcr_cmd =
      app.add_subcommand("tcr", "symmetric temporal change ratio between two session maps");
  tcr_cmd->add_option("--source", tcr_opt.source, "source map (.bin binary or .xyz ascii)")
      ->required();
  tcr_cmd->add_option("--target", tcr_opt.target, "target map")->required();
  tcr_cmd->add_option("--source-id", tcr_opt.source_id, "source session id (default: file stem)");
  tcr_cmd->add_option("--target-id", tcr_opt.target_id, "target session id");
  tcr_cmd->add_option("--tau", tcr_opt.params.tau, "unchanged-point distance threshold, m")
      ->capture_default_str();
  tcr_cmd->add_option("--voxel", tcr_opt.params.voxel_resolution, "voxel resolution, m")
      ->capture_default_str();
  tcr_cmd->add_option("--crop", tcr_opt.crop, "crop maps to this range, m (default: none)");
  tcr_cmd->add_flag("--crop-box", tcr_opt.crop_box, "per-axis crop instead of radial");
  tcr_cmd->add_option("--numerator", tcr_opt.numerator, "hull-restricted | literal")
      ->capture_default_str();
  tcr_cmd->add_option("--voxel-origin", tcr_opt.voxel_origin, "grid anchor x y z")
      ->expected(3);
  tcr_cmd->add_flag("--labels", tcr_opt.labels,
                    "export changed/unchanged labeled clouds (intensity 1 = unchanged)");
  tcr_cmd->add_option("--out", tcr_opt.out, "output directory")->capture_default_str();

  BenchOptions bench_opt;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "place-recognition benchmark over sequence directories");
  bench_cmd->add_option("--db", bench_opt.db_dir, "database sequence directory");
  bench_cmd->add_option("--query", bench_opt.query_dir, "query sequence directory");
  bench_cmd->add_option("--pair", bench_opt.pairs, "additional DB=QUERY sequence pair")
      ->type_size(1);
  bench_cmd
      ->add_option("--descriptor", bench_opt.descriptor, "bev | oracle-position | external-csv")
      ->capture_default_str();
  bench_cmd->add_option("--db-desc", bench_opt.db_desc_csv, "database descriptor CSV");
  bench_cmd->add_option("--query-desc", bench_opt.query_desc_csv, "query descriptor CSV");
  bench_cmd
      ->add_option("--query-interval", bench_opt.params.query_interval,
                   "query sampling interval, m")
      ->capture_default_str();
  bench_cmd
      ->add_option("--db-interval", bench_opt.params.db_interval, "database sampling interval, m")
      ->capture_default_str();
  bench_cmd->add_option("--tp-radius", bench_opt.params.tp_radius, "true-positive radius, m")
      ->capture_default_str();
  bench_cmd->add_option("--crop", bench_opt.params.crop_range, "per-scan range limit, m")
      ->capture_default_str();
  bench_cmd->add_flag("--crop-box", bench_opt.crop_box, "per-axis crop instead of radial");
  bench_cmd->add_option("--top-n", bench_opt.params.top_n, "retrieved candidates per query")
      ->capture_default_str();
  bench_cmd->add_option("--submap-window", bench_opt.submap_window,
                        "merge this many sequential scans per sample");
  bench_cmd->add_option("--rings", bench_opt.rings, "bev rings")->capture_default_str();
  bench_cmd->add_option("--sectors", bench_opt.sectors, "bev sectors")->capture_default_str();
  bench_cmd->add_option("--tau", bench_opt.tau, "tau for the per-pair change ratio")
      ->capture_default_str();
  bench_cmd->add_option("--voxel", bench_opt.voxel, "voxel resolution for the change ratio")
      ->capture_default_str();
  bench_cmd->add_flag("--no-tcr", bench_opt.no_tcr, "skip the per-pair change-ratio column");
  bench_cmd->add_option("--out", bench_opt.out, "output directory")->capture_default_str();

  SynthOptions synth_opt;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic evolving-city dataset");
  synth_cmd->add_option("--scene", synth_opt.scene_file, "scene config file")->required();
  synth_cmd->add_option("--trajectory", synth_opt.trajectory_file, "trajectory config file")
      ->required();
  synth_cmd->add_option("--stages", synth_opt.stages, "comma list of stages (default: all)");
  synth_cmd->add_option("--seed", synth_opt.seed, "override the scene seed");
  synth_cmd->add_option("--channels", synth_opt.lidar.channels, "lidar channels")
      ->capture_default_str();
  synth_cmd->add_option("--vfov", synth_opt.lidar.vertical_fov_deg, "vertical fov span, deg")
      ->capture_default_str();
  synth_cmd->add_option("--max-range", synth_opt.lidar.max_range, "lidar max range, m")
      ->capture_default_str();
  synth_cmd->add_option("--hres", synth_opt.lidar.horizontal_res_deg,
                        "horizontal resolution, deg")
      ->capture_default_str();
  synth_cmd->add_option("--rate", synth_opt.lidar.rate_hz, "scan rate, Hz")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_opt.out, "output directory")->capture_default_str();

  AggregateOptions agg_opt;
  CLI::App* agg_cmd = app.add_subcommand(
      "aggregate", "merge a sequence's scans into one world-frame session map");
  agg_cmd->add_option("--seq", agg_opt.seq_dir, "sequence directory (scans/ + poses.txt)")
      ->required();
  agg_cmd->add_option("--crop", agg_opt.crop, "crop each output map to this range, m");
  agg_cmd->add_flag("--crop-box", agg_opt.crop_box, "per-axis crop instead of radial");
  agg_cmd->add_option("--out", agg_opt.out, "output map file (.bin or .xyz)")->required();

  CLI11_PARSE(app, argc, argv);
  apply_thread_count(threads);

  try {
    if (*tcr_cmd) return run_tcr(tcr_opt);
    if (*bench_cmd) return run_bench(bench_opt);
    if (*synth_cmd) return run_synth(synth_opt);
    if (*agg_cmd) return run_aggregate(agg_opt);
  } catch (const cns::TcrError& e) {
    const bool degenerate = e.kind == cns::TcrError::Kind::DegenerateHull;
    return error_exit(degenerate ? "degenerate-hull" : "empty-domain", e.what(),
                      degenerate ? kExitDegenerate : kExitEmptyDomain);
  } catch (const cns::NoTrueMatchError& e) {
    return error_exit("no-true-match", e.what(), kExitNoTrueMatch);
  } catch (const cns::ConfigError& e) {
    return error_exit("config", e.what(), kExitIo);
  } catch (const cns::Error& e) {
    return error_exit("io", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return error_exit("internal", e.what(), kExitIo);
  }
  return 0;
}
