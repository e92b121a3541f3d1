#include "vloc/pipeline.h"

#include <cmath>
#include <string>

#include "vloc/error.h"

namespace vloc {

void PipelineConfig::Validate() const {
  scan.Validate();
  match.Validate();
  filter.Validate();
}

std::vector<FilterState> FilterTrack(std::span<const GeoPoint> measurements,
                                     const FilterConfig& cfg) {
  cfg.Validate();
  std::vector<FilterState> out;
  out.reserve(measurements.size());
  for (const GeoPoint& z : measurements) {
    out.push_back(out.empty() ? Update(InitFilter(z, cfg), z, cfg)
                              : Step(out.back(), z, cfg));
  }
  return out;
}

GeoPoint ReportedEstimate(const FilterState& posterior, const FilterConfig& cfg,
                          EstimateMode mode) {
  return mode == EstimateMode::kPredicted ? PredictedPosition(posterior, cfg)
                                          : posterior.Position();
}

LocalizationTrace LocalizeSequence(const Database& db,
                                   std::span<const QueryInput> queries,
                                   const PipelineConfig& cfg) {
  cfg.Validate();
  if (queries.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no queries to localize");
  }
  if (db.empty()) {
    throw Error(ErrorCode::kEmptyCandidates, "database is empty");
  }

  LocalizationTrace trace;
  trace.steps.reserve(queries.size());
  FilterState state;
  std::optional<std::int64_t> center;

  for (std::size_t i = 0; i < queries.size(); ++i) {
    const QueryInput& q = queries[i];
    ScanConfig scan = cfg.scan;
    scan.center_ts_ns = center;

    const ScanResult hit = Scan(db, q.descriptors, q.timestamp_ns, scan, cfg.match);
    if (hit.count == 0) {
      throw Error(ErrorCode::kNoMatch,
                  "step " + std::to_string(i + 1) +
                      ": no correspondences with any of " +
                      std::to_string(hit.candidates) + " candidates");
    }
    if (i == 0 || cfg.scan.sliding_center) {
      center = hit.frame->timestamp_ns;
    }

    const GeoPoint& meas = hit.frame->geotag;
    state = i == 0 ? Update(InitFilter(meas, cfg.filter), meas, cfg.filter)
                   : Step(state, meas, cfg.filter);

    TraceStep s;
    s.step = i + 1;
    s.query_ts_ns = q.timestamp_ns;
    s.matched_frame_id = hit.frame->frame_id;
    s.matched_ts_ns = hit.frame->timestamp_ns;
    s.correspondences = hit.count;
    s.measurement = meas;
    s.estimate = ReportedEstimate(state, cfg.filter, cfg.estimate);
    s.velocity = state.x.tail<2>();
    s.state = state;
    s.truth = q.truth;
    if (q.truth) {
      s.measurement_error_m = HaversineM(s.measurement, *q.truth);
      s.estimation_error_m = HaversineM(s.estimate, *q.truth);
    }
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

EvaluationResult Evaluate(std::span<const LocalizationTrace> traces) {
  if (traces.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no traces to evaluate");
  }
  const std::size_t n_steps = traces.front().steps.size();
  for (std::size_t t = 0; t < traces.size(); ++t) {
    if (traces[t].steps.size() != n_steps) {
      throw Error(ErrorCode::kLengthMismatch,
                  "trace " + std::to_string(t) + " has " +
                      std::to_string(traces[t].steps.size()) +
                      " steps, expected " + std::to_string(n_steps));
    }
    for (const TraceStep& s : traces[t].steps) {
      if (!s.measurement_error_m || !s.estimation_error_m) {
        throw Error(ErrorCode::kMissingTruth,
                    "trace " + std::to_string(t) + " step " +
                        std::to_string(s.step) + " has no ground truth");
      }
    }
  }
  if (n_steps == 0) {
    throw Error(ErrorCode::kInvalidArgument, "traces have no steps");
  }

  const double n = static_cast<double>(traces.size());
  EvaluationResult result;
  result.traces = traces.size();
  result.steps.resize(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    double sm = 0.0, se = 0.0;
    for (const auto& tr : traces) {
      sm += *tr.steps[k].measurement_error_m;
      se += *tr.steps[k].estimation_error_m;
    }
    StepStats& st = result.steps[k];
    st.mean_meas_m = sm / n;
    st.mean_est_m = se / n;
    double vm = 0.0, ve = 0.0;
    for (const auto& tr : traces) {
      vm += std::pow(*tr.steps[k].measurement_error_m - st.mean_meas_m, 2);
      ve += std::pow(*tr.steps[k].estimation_error_m - st.mean_est_m, 2);
    }
    st.std_meas_m = std::sqrt(vm / n);
    st.std_est_m = std::sqrt(ve / n);
  }
  return result;
}

}  // namespace vloc
