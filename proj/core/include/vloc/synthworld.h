#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "vloc/database.h"
#include "vloc/geodesy.h"
#include "vloc/ingest.h"
#include "vloc/pipeline.h"

namespace vloc {

// Synthetic drive along a straight road lined with landmarks. A forward
// camera sees a landmark at lateral offset w once it is within the half
// field of view (d >= |w| / tan(fov)) and keeps seeing it for `depth`
// metres of along-track distance, where depth = spacing / (1 - overlap), so
// adjacent frames share `landmark_overlap` of their landmarks. Every
// observation of a landmark is its base descriptor plus a range-dependent
// drift and a small per-observation perturbation; queries are taken from
// the nearest frame, dropping distant keypoints.
struct WorldConfig {
  double speed_mps = 18.0;
  double heading_deg = 0.0;  // clockwise from north
  double db_hz = 10.0;
  double duration_s = 10.0;
  std::size_t keypoints_per_frame = 200;  // expected, not exact
  double landmark_overlap = 0.95;
  double query_noise_sigma = 0.01;
  double distractor_fraction = 0.0;
  std::uint64_t seed = 7;

  GeoPoint start{49.0, 8.43};
  std::int64_t start_ts_ns = 0;
  double half_fov_deg = 50.0;
  double lateral_min_m = 1.0;
  double lateral_max_m = 12.0;
  double drift_per_m = 0.008;
  double observation_noise = 0.15;
  // Query keypoint at range r survives with probability exp(-r / range).
  // nullopt keeps all keypoints.
  std::optional<double> query_range_m = 12.0;

  void Validate() const;
  std::size_t NumFrames() const;
  // Along-track extent over which one landmark stays visible.
  double VisibilityDepthM() const;
};

struct SyntheticWorld {
  WorldConfig cfg;
  Database db;
  // Range in metres from the camera to each keypoint, per frame.
  std::vector<std::vector<float>> keypoint_range_m;

  // Exact trajectory position at a timestamp.
  GeoPoint PositionAt(std::int64_t ts_ns) const;
};

SyntheticWorld GenWorld(const WorldConfig& cfg);

// n queries every period_s starting at start_ts_ns, each derived from the
// database frame nearest in time. Throws kOutOfRange when a query time falls
// outside the database's time span.
std::vector<QueryInput> GenQueries(const SyntheticWorld& world,
                                   std::int64_t start_ts_ns, std::size_t n,
                                   double period_s, const WorldConfig& cfg,
                                   std::uint64_t seed);

struct MonteCarloConfig {
  std::size_t trials = 1000;
  std::size_t steps = 6;
  double period_s = 1.0;
  // Earliest query start after the first database frame, so the trailing
  // frames the exclusion leaves over exist.
  double lead_s = 2.0;
  unsigned num_threads = 1;

  void Validate() const;
};

struct MonteCarloResult {
  std::vector<LocalizationTrace> traces;
  EvaluationResult evaluation;
};

// Each trial draws its own world and query start from a stream derived from
// world_cfg.seed and the trial index, so results do not depend on num_threads.
MonteCarloResult RunMonteCarlo(const WorldConfig& world_cfg,
                               const PipelineConfig& pipeline_cfg,
                               const MonteCarloConfig& mc_cfg);

// Seed of trial `index` under `master`.
std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t index);

}  // namespace vloc
