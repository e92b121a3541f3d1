#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vloc/descriptor.h"
#include "vloc/geodesy.h"
#include "vloc/matching.h"

namespace vloc {

inline constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

// One geotagged database image, reduced to its descriptors.
struct GeoFrame {
  std::uint64_t frame_id = 0;
  std::int64_t timestamp_ns = 0;
  GeoPoint geotag;
  DescriptorSet descriptors;

  friend bool operator==(const GeoFrame&, const GeoFrame&) = default;
};

struct DatabaseMetadata {
  std::string source;
  std::string camera;

  friend bool operator==(const DatabaseMetadata&,
                         const DatabaseMetadata&) = default;
};

// Frames sorted by timestamp with unique ids. Immutable once built.
class Database {
 public:
  Database() = default;
  // Sorts by (timestamp, frame_id); throws kDuplicateFrameId on repeated ids.
  explicit Database(std::vector<GeoFrame> frames, DatabaseMetadata metadata = {});

  const std::vector<GeoFrame>& frames() const noexcept { return frames_; }
  const DatabaseMetadata& metadata() const noexcept { return metadata_; }
  std::size_t size() const noexcept { return frames_.size(); }
  bool empty() const noexcept { return frames_.empty(); }

  const GeoFrame& operator[](std::size_t i) const noexcept {
    return frames_[i];
  }
  // Throws kInvalidArgument for an unknown id.
  const GeoFrame& FindById(std::uint64_t frame_id) const;

  friend bool operator==(const Database&, const Database&) = default;

 private:
  std::vector<GeoFrame> frames_;
  DatabaseMetadata metadata_;
};

// Candidate filtering for a scan. The window applies only when both
// window_s and center_ts_ns are set; the exclusion removes frames taken
// within exclusion_s of the query itself (evaluation handicap).
struct ScanConfig {
  std::optional<double> window_s = 20.0;
  std::optional<double> exclusion_s;
  std::optional<std::int64_t> center_ts_ns;
  // When true, later queries recentre the window on the previous match
  // instead of the first one.
  bool sliding_center = false;
  ScanOptions options;

  void Validate() const;

  // Defaults for the evaluation protocol: +-20 s window, 1 s exclusion.
  static ScanConfig Evaluation();
};

struct ScanResult {
  const GeoFrame* frame = nullptr;
  std::size_t count = 0;
  std::size_t candidates = 0;
};

// Indices of the frames that survive window and exclusion filtering, in
// database order.
std::vector<std::size_t> CandidateIndices(const Database& db,
                                          std::int64_t query_ts_ns,
                                          const ScanConfig& cfg);

// Best-matching frame among the filtered candidates. Throws
// kEmptyCandidates when filtering leaves nothing.
ScanResult Scan(const Database& db, const DescriptorSet& query,
                std::int64_t query_ts_ns, const ScanConfig& cfg,
                const MatchConfig& match_cfg);

std::int64_t SecondsToNanos(double seconds);

}  // namespace vloc
