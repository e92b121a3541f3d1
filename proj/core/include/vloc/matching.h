#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "vloc/descriptor.h"

namespace vloc {

// Thresholds for accepting a keypoint correspondence. Both criteria must
// hold: the squared-distance ratio between the nearest and second-nearest
// frame descriptor must be below ratio_threshold^2, and the cosine
// similarity to the nearest must exceed cosine_threshold.
struct MatchConfig {
  double ratio_threshold = 0.8;    // in (0, 1)
  double cosine_threshold = 0.97;  // in (-1, 1]

  void Validate() const;
};

// Sum of squared component differences, accumulated in double in index
// order. This is the reference distance every scan path must reproduce.
double SqDist(DescriptorView g, DescriptorView f) noexcept;

// f.g / (|f||g|), clamped to [-1, 1]. Throws kDegenerateDescriptor if either
// descriptor has zero norm.
double CosineSim(DescriptorView g, DescriptorView f);

// Index of the frame descriptor matched by `g`, or nullopt. The nearest and
// second-nearest are ordered by (distance, index). A zero second-nearest
// distance means the ratio is undefined and yields no match, as does a
// degenerate nearest pair. Throws kFrameTooSmall when frame.size() < 2.
std::optional<std::size_t> MatchKeypoint(DescriptorView g,
                                         const DescriptorSet& frame,
                                         const MatchConfig& cfg);

// Number of query descriptors for which MatchKeypoint succeeds. Query
// keypoints are evaluated independently; several may land on the same frame
// keypoint.
std::size_t CountCorrespondences(const DescriptorSet& query,
                                 const DescriptorSet& frame,
                                 const MatchConfig& cfg);

struct MatchCandidate {
  std::uint64_t frame_id = 0;
  const DescriptorSet* descriptors = nullptr;
};

struct BestMatchResult {
  std::uint64_t frame_id = 0;
  std::size_t count = 0;
  // Candidates with fewer than two descriptors, scored as zero.
  std::size_t skipped = 0;
};

struct ScanOptions {
  // Worker threads used to score candidates. The result does not depend on
  // this value.
  unsigned num_threads = 1;
};

// Candidate with the most correspondences; ties go to the lowest frame id.
// Throws kEmptyCandidates for an empty candidate list.
BestMatchResult BestMatch(const DescriptorSet& query,
                          std::span<const MatchCandidate> candidates,
                          const MatchConfig& cfg,
                          const ScanOptions& options = {});

}  // namespace vloc
