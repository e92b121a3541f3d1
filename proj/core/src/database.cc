#include "vloc/database.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "vloc/error.h"

namespace vloc {

Database::Database(std::vector<GeoFrame> frames, DatabaseMetadata metadata)
    : frames_(std::move(frames)), metadata_(std::move(metadata)) {
  std::unordered_set<std::uint64_t> ids;
  ids.reserve(frames_.size());
  for (const GeoFrame& f : frames_) {
    if (!ids.insert(f.frame_id).second) {
      throw Error(ErrorCode::kDuplicateFrameId,
                  "duplicate frame id " + std::to_string(f.frame_id));
    }
  }
  std::stable_sort(frames_.begin(), frames_.end(),
                   [](const GeoFrame& a, const GeoFrame& b) {
                     if (a.timestamp_ns != b.timestamp_ns) {
                       return a.timestamp_ns < b.timestamp_ns;
                     }
                     return a.frame_id < b.frame_id;
                   });
}

const GeoFrame& Database::FindById(std::uint64_t frame_id) const {
  for (const GeoFrame& f : frames_) {
    if (f.frame_id == frame_id) return f;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no frame with id " + std::to_string(frame_id));
}

std::int64_t SecondsToNanos(double seconds) {
  return static_cast<std::int64_t>(
      std::llround(seconds * static_cast<double>(kNanosPerSecond)));
}

void ScanConfig::Validate() const {
  if (window_s && !(*window_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "window_s must be positive");
  }
  if (exclusion_s && !(*exclusion_s >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "exclusion_s must be non-negative");
  }
}

ScanConfig ScanConfig::Evaluation() {
  ScanConfig cfg;
  cfg.window_s = 20.0;
  cfg.exclusion_s = 1.0;
  return cfg;
}

std::vector<std::size_t> CandidateIndices(const Database& db,
                                          std::int64_t query_ts_ns,
                                          const ScanConfig& cfg) {
  cfg.Validate();
  const bool windowed = cfg.window_s.has_value() && cfg.center_ts_ns.has_value();
  const std::int64_t window_ns = windowed ? SecondsToNanos(*cfg.window_s) : 0;
  const std::int64_t exclusion_ns =
      cfg.exclusion_s ? SecondsToNanos(*cfg.exclusion_s) : 0;

  std::vector<std::size_t> out;
  out.reserve(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    const std::int64_t ts = db[i].timestamp_ns;
    if (windowed && std::abs(ts - *cfg.center_ts_ns) > window_ns) continue;
    if (cfg.exclusion_s && std::abs(ts - query_ts_ns) <= exclusion_ns) continue;
    out.push_back(i);
  }
  return out;
}

ScanResult Scan(const Database& db, const DescriptorSet& query,
                std::int64_t query_ts_ns, const ScanConfig& cfg,
                const MatchConfig& match_cfg) {
  if (db.empty()) {
    throw Error(ErrorCode::kEmptyCandidates, "database is empty");
  }
  const std::vector<std::size_t> indices =
      CandidateIndices(db, query_ts_ns, cfg);
  if (indices.empty()) {
    throw Error(ErrorCode::kEmptyCandidates,
                "window and exclusion filtering removed every frame");
  }

  std::vector<MatchCandidate> candidates;
  candidates.reserve(indices.size());
  for (std::size_t i : indices) {
    candidates.push_back({db[i].frame_id, &db[i].descriptors});
  }
  const BestMatchResult best =
      BestMatch(query, candidates, match_cfg, cfg.options);

  ScanResult result;
  result.count = best.count;
  result.candidates = candidates.size();
  for (std::size_t i : indices) {
    if (db[i].frame_id == best.frame_id) {
      result.frame = &db[i];
      break;
    }
  }
  return result;
}

}  // namespace vloc
