#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vloc/database.h"
#include "vloc/geodesy.h"
#include "vloc/ingest.h"
#include "vloc/kalman.h"
#include "vloc/matching.h"

namespace vloc {

// Which filter output a trace reports as the step's estimate.
enum class EstimateMode {
  // Position the filter expects at the next query, F * X+. With retrievals
  // that systematically trail the vehicle this is the useful output.
  kPredicted,
  // The corrected state X+ at the current query.
  kPosterior,
};

struct PipelineConfig {
  ScanConfig scan = ScanConfig::Evaluation();
  MatchConfig match;
  FilterConfig filter;
  EstimateMode estimate = EstimateMode::kPredicted;

  void Validate() const;
};

// The filter run on a bare measurement track: the first measurement
// initializes and updates, later ones go through Step. Returns the
// posterior after each measurement.
std::vector<FilterState> FilterTrack(std::span<const GeoPoint> measurements,
                                     const FilterConfig& cfg);

GeoPoint ReportedEstimate(const FilterState& posterior, const FilterConfig& cfg,
                          EstimateMode mode);

struct TraceStep {
  std::size_t step = 0;  // 1-based
  std::int64_t query_ts_ns = 0;
  std::uint64_t matched_frame_id = 0;
  std::int64_t matched_ts_ns = 0;
  std::size_t correspondences = 0;
  GeoPoint measurement;
  GeoPoint estimate;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // degrees / second
  FilterState state;  // posterior after this step
  std::optional<GeoPoint> truth;
  std::optional<double> measurement_error_m;
  std::optional<double> estimation_error_m;
};

struct LocalizationTrace {
  std::vector<TraceStep> steps;
};

// Step 1 scans the whole database (exclusion still applies); later steps
// scan the window around the step-1 match, or around the previous match
// with scan.sliding_center. Throws kNoMatch naming the step when every
// candidate scores zero.
LocalizationTrace LocalizeSequence(const Database& db,
                                   std::span<const QueryInput> queries,
                                   const PipelineConfig& cfg);

struct StepStats {
  double mean_meas_m = 0.0;
  double std_meas_m = 0.0;
  double mean_est_m = 0.0;
  double std_est_m = 0.0;
};

// Population mean and standard deviation per step.
struct EvaluationResult {
  std::vector<StepStats> steps;
  std::size_t traces = 0;

  double final_mean_meas_m() const { return steps.back().mean_meas_m; }
  double final_mean_est_m() const { return steps.back().mean_est_m; }
};

// Throws kLengthMismatch for traces of different lengths, kMissingTruth when
// any step lacks errors, kInvalidArgument for no traces.
EvaluationResult Evaluate(std::span<const LocalizationTrace> traces);

// Writes errors.csv and errors.svg into out_dir (created if needed). An
// empty result throws kInvalidArgument before anything is written.
void ExportReport(const EvaluationResult& result,
                  const std::filesystem::path& out_dir);

std::string FormatErrorsCsv(const EvaluationResult& result);
std::string FormatErrorsSvg(const EvaluationResult& result);

// One row per step: step,query_ts,matched_frame_id,meas_lat,meas_lon,
// est_lat,est_lon,truth_lat,truth_lon,meas_err_m,est_err_m. Truth and error
// cells are empty when the step has no ground truth.
std::string FormatTraceCsv(const LocalizationTrace& trace);

// Shortest decimal text that parses back to exactly `v`.
std::string FormatDouble(double v);

}  // namespace vloc
