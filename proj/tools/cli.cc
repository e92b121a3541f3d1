#include "cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "vloc/error.h"
#include "vloc/ingest.h"
#include "vloc/pipeline.h"
#include "vloc/storage.h"
#include "vloc/synthworld.h"

namespace vloc::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  double tau1 = 0.8;
  double tau2 = 0.97;
  double window_s = 20.0;
  bool no_window = false;
  double exclusion_s = 1.0;
  bool no_exclusion = false;
  bool sliding_window = false;
  double dt = 1.0;
  double sigma_r = 1e-4;
  double p0_scale = 1000.0;
  double q_scale = 1e-10;
  std::uint64_t seed = 7;
  std::string out_dir = ".";
  unsigned threads = 1;
  EstimateMode estimate = EstimateMode::kPredicted;

  PipelineConfig Pipeline() const {
    PipelineConfig cfg;
    cfg.match.ratio_threshold = tau1;
    cfg.match.cosine_threshold = tau2;
    cfg.scan.window_s = no_window ? std::nullopt : std::optional(window_s);
    cfg.scan.exclusion_s =
        no_exclusion ? std::nullopt : std::optional(exclusion_s);
    cfg.scan.sliding_center = sliding_window;
    cfg.scan.options.num_threads = threads;
    cfg.filter.dt = dt;
    cfg.filter.sigma_r = sigma_r;
    cfg.filter.p0_scale = p0_scale;
    cfg.filter.q_scale = q_scale;
    cfg.estimate = estimate;
    return cfg;
  }
};

void AddGlobalFlags(CLI::App& app, GlobalFlags& g) {
  app.add_option("--tau1", g.tau1, "Distance ratio threshold")
      ->capture_default_str();
  app.add_option("--tau2", g.tau2, "Cosine similarity threshold")
      ->capture_default_str();
  app.add_option("--window-s", g.window_s,
                 "Half-width of the search window after the first query")
      ->capture_default_str();
  app.add_flag("--no-window", g.no_window, "Scan the whole database every step");
  app.add_flag("--sliding-window", g.sliding_window,
               "Centre each window on the previous match");
  app.add_option("--exclusion-s", g.exclusion_s,
                 "Ignore frames this close in time to the query")
      ->capture_default_str();
  app.add_flag("--no-exclusion", g.no_exclusion, "Disable the self-exclusion");
  app.add_option("--dt", g.dt, "Seconds between queries")->capture_default_str();
  app.add_option("--sigma-r", g.sigma_r,
                 "Measurement noise std-dev (degrees)")
      ->capture_default_str();
  app.add_option("--p0-scale", g.p0_scale, "Initial covariance scale")
      ->capture_default_str();
  app.add_option("--q-scale", g.q_scale, "Process noise scale (degrees^2)")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for output files")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option_function<std::string>(
         "--estimate",
         [&g](const std::string& mode) {
           g.estimate = mode == "posterior" ? EstimateMode::kPosterior
                                            : EstimateMode::kPredicted;
         },
         "Reported estimate: predicted (next position) or posterior")
      ->check(CLI::IsMember({"predicted", "posterior"}))
      ->default_str("predicted");
}

void AddWorldFlags(CLI::App& app, WorldConfig& w) {
  app.add_option("--speed", w.speed_mps, "Vehicle speed (m/s)")->capture_default_str();
  app.add_option("--heading", w.heading_deg, "Course, degrees from north")
      ->capture_default_str();
  app.add_option("--db-hz", w.db_hz, "Database frame rate")->capture_default_str();
  app.add_option("--duration-s", w.duration_s, "Trajectory length per world")
      ->capture_default_str();
  app.add_option("--keypoints", w.keypoints_per_frame,
                 "Expected keypoints per frame")
      ->capture_default_str();
  app.add_option("--overlap", w.landmark_overlap,
                 "Fraction of landmarks shared by adjacent frames")
      ->capture_default_str();
  app.add_option("--query-noise", w.query_noise_sigma,
                 "Per-component Gaussian noise on query descriptors")
      ->capture_default_str();
  app.add_option("--distractors", w.distractor_fraction,
                 "Fraction of query descriptors replaced by random ones")
      ->capture_default_str();
  app.add_option("--obs-noise", w.observation_noise,
                 "Per-observation appearance noise")
      ->capture_default_str();
  app.add_option("--drift", w.drift_per_m, "Appearance drift per metre of range")
      ->capture_default_str();
  app.add_option_function<double>(
         "--query-range",
         [&w](double r) {
           w.query_range_m = r > 0.0 ? std::optional(r) : std::nullopt;
         },
         "Query keypoint falloff range in metres (0 keeps all)")
      ->default_str("12");
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

fs::path EnsureDir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  return p;
}

void PrintTrace(std::ostream& out, const LocalizationTrace& trace) {
  const bool with_truth =
      std::all_of(trace.steps.begin(), trace.steps.end(),
                  [](const TraceStep& s) { return s.truth.has_value(); });
  fmt::print(out, "{:>4} {:>20} {:>9} {:>6} {:>12} {:>12} {:>12} {:>12}",
             "step", "query_ts", "frame", "corr", "meas_lat", "meas_lon",
             "est_lat", "est_lon");
  if (with_truth) fmt::print(out, " {:>10} {:>10}", "meas_err_m", "est_err_m");
  fmt::print(out, "\n");
  for (const TraceStep& s : trace.steps) {
    fmt::print(out, "{:>4} {:>20} {:>9} {:>6} {:>12.7f} {:>12.7f} {:>12.7f} {:>12.7f}",
               s.step, s.query_ts_ns, s.matched_frame_id, s.correspondences,
               s.measurement.lat(), s.measurement.lon(), s.estimate.lat(),
               s.estimate.lon());
    if (with_truth) {
      fmt::print(out, " {:>10.2f} {:>10.2f}", *s.measurement_error_m,
                 *s.estimation_error_m);
    }
    fmt::print(out, "\n");
  }
}

void PrintEvaluation(std::ostream& out, const EvaluationResult& r) {
  fmt::print(out, "{:>4} {:>12} {:>11} {:>11} {:>10}\n", "step", "mean_meas_m",
             "std_meas_m", "mean_est_m", "std_est_m");
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    const StepStats& s = r.steps[k];
    fmt::print(out, "{:>4} {:>12.3f} {:>11.3f} {:>11.3f} {:>10.3f}\n", k + 1,
               s.mean_meas_m, s.std_meas_m, s.mean_est_m, s.std_est_m);
  }
  fmt::print(out, "final mean estimation error {:.3f} m over {} traces\n",
             r.final_mean_est_m(), r.traces);
}

int BuildDb(const std::string& kitti, const std::string& csv,
            const std::string& out_path, std::ostream& out) {
  if (kitti.empty() == csv.empty()) {
    throw UsageError("build-db needs exactly one of --kitti or --csv");
  }
  const Database db = kitti.empty() ? IngestCsv(csv) : IngestKitti(kitti);
  SaveDatabase(db, out_path);
  fmt::print(out, "wrote {} frames to {}\n", db.size(), out_path);
  return kExitOk;
}

int Query(const GlobalFlags& g, const std::string& db_path,
          const std::string& manifest, std::ostream& out) {
  const std::vector<QueryInput> queries = ReadQueryManifest(manifest);
  if (queries.empty()) throw UsageError("query manifest " + manifest + " is empty");
  const Database db = LoadDatabase(db_path);
  const LocalizationTrace trace = LocalizeSequence(db, queries, g.Pipeline());
  PrintTrace(out, trace);
  const fs::path path = EnsureDir(g.out_dir) / "trace.csv";
  WriteFile(path, FormatTraceCsv(trace));
  fmt::print(out, "wrote {}\n", path.string());
  return kExitOk;
}

int Simulate(const GlobalFlags& g, WorldConfig world, MonteCarloConfig mc,
             std::ostream& out) {
  world.seed = g.seed;
  mc.num_threads = g.threads;
  const auto t0 = std::chrono::steady_clock::now();
  const MonteCarloResult result = RunMonteCarlo(world, g.Pipeline(), mc);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  PrintEvaluation(out, result.evaluation);
  const fs::path dir = EnsureDir(g.out_dir);
  ExportReport(result.evaluation, dir);
  fmt::print(out, "wrote {} and {} ({:.1f} s)\n", (dir / "errors.csv").string(),
             (dir / "errors.svg").string(), secs);
  return kExitOk;
}

// Writes a synthetic drive as per-frame descriptor files plus manifests, so
// build-db and query can be exercised without a dataset.
int MakeSynthetic(const GlobalFlags& g, WorldConfig world, std::size_t n_queries,
                  double period_s, double lead_s, std::ostream& out) {
  world.seed = g.seed;
  const SyntheticWorld w = GenWorld(world);
  const fs::path dir = EnsureDir(g.out_dir);
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "queries");

  std::string frames_csv = "frame_id,timestamp_ns,lat_deg,lon_deg,descriptor_path\n";
  for (const GeoFrame& f : w.db.frames()) {
    const std::string name = fmt::format("frames/{:010d}.desc", f.frame_id);
    WriteDescFile(dir / name, {f.frame_id, f.timestamp_ns, f.geotag.lat(),
                               f.geotag.lon(), f.descriptors});
    frames_csv += fmt::format("{},{},{},{},{}\n", f.frame_id, f.timestamp_ns,
                              FormatDouble(f.geotag.lat()),
                              FormatDouble(f.geotag.lon()), name);
  }
  WriteFile(dir / "frames.csv", frames_csv);
  SaveDatabase(w.db, dir / "db.vldb");

  const std::int64_t start =
      w.db.frames().front().timestamp_ns + SecondsToNanos(lead_s);
  const auto queries =
      GenQueries(w, start, n_queries, period_s, world, TrialSeed(g.seed, 0));
  std::string queries_csv = "query_ts_ns,descriptor_path,truth_lat,truth_lon\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const QueryInput& q = queries[i];
    const std::string name = fmt::format("queries/{:03d}.desc", i);
    WriteDescFile(dir / name, {i, q.timestamp_ns, 0.0, 0.0, q.descriptors});
    queries_csv += fmt::format("{},{},{},{}\n", q.timestamp_ns, name,
                               FormatDouble(q.truth->lat()),
                               FormatDouble(q.truth->lon()));
  }
  WriteFile(dir / "queries.csv", queries_csv);
  fmt::print(out, "wrote {} frames and {} queries to {}\n", w.db.size(),
             queries.size(), dir.string());
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Camera-only vehicle localization: descriptor retrieval plus "
               "Kalman filtering"};
  app.name("vloc");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  AddGlobalFlags(app, g);

  auto* build = app.add_subcommand("build-db", "Ingest a dataset into a VLDB file");
  std::string kitti, csv, db_out;
  auto* kitti_opt = build->add_option("--kitti", kitti, "KITTI-raw drive directory");
  auto* csv_opt = build->add_option("--csv", csv, "CSV frame manifest");
  kitti_opt->excludes(csv_opt);
  build->add_option("--out", db_out, "Output database file")->required();

  auto* query = app.add_subcommand("query", "Localize a query sequence");
  std::string db_path, manifest;
  query->add_option("--db", db_path, "VLDB database file")->required();
  query->add_option("--queries", manifest,
                    "CSV: query_ts_ns,descriptor_path[,truth_lat,truth_lon]")
      ->required();

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo error decay on synthetic drives");
  WorldConfig world;
  MonteCarloConfig mc;
  simulate->add_option("--trials", mc.trials, "Number of trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--steps", mc.steps, "Queries per trial")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--period-s", mc.period_s, "Seconds between queries")
      ->capture_default_str();
  simulate->add_option("--lead-s", mc.lead_s,
                       "Earliest query start after the first frame")
      ->capture_default_str();
  AddWorldFlags(*simulate, world);

  auto* synth = app.add_subcommand("make-synthetic",
                                   "Write a synthetic drive as descriptor files and manifests");
  WorldConfig synth_world;
  synth_world.duration_s = 60.0;
  std::size_t n_queries = 6;
  double synth_period = 1.0;
  double synth_lead = 20.0;
  synth->add_option("--queries", n_queries, "Number of queries")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--period-s", synth_period, "Seconds between queries")
      ->capture_default_str();
  synth->add_option("--lead-s", synth_lead, "First query time after the first frame")
      ->capture_default_str();
  AddWorldFlags(*synth, synth_world);
  synth->get_option("--duration-s")->default_str("60");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) return BuildDb(kitti, csv, db_out, out);
    if (*query) return Query(g, db_path, manifest, out);
    if (*simulate) return Simulate(g, world, mc, out);
    if (*synth) {
      return MakeSynthetic(g, synth_world, n_queries, synth_period, synth_lead, out);
    }
  } catch (const UsageError& e) {
    err << "vloc: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "vloc: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "vloc: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace vloc::cli
