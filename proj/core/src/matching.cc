#include "vloc/matching.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "vloc/error.h"

namespace vloc {
namespace {

using RowMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMapF = Eigen::Map<const RowMatrixF>;

// Query rows processed per GEMM block; bounds the scratch matrix size.
constexpr Eigen::Index kQueryBlock = 256;

// Relative bound on |float distance - exact distance|. A 128-term float dot
// product or squared norm is off by at most about 128 * 2^-24 of its
// magnitude, so the float distances err by less than 2e-5 * (|g|^2 + |f|^2).
constexpr double kApproxRelErr = 1e-4;

struct Nearest {
  std::size_t first = 0;
  std::size_t second = 0;
  double d_first = std::numeric_limits<double>::infinity();
  double d_second = std::numeric_limits<double>::infinity();

  // Keeps the two smallest (distance, index) pairs.
  void Offer(std::size_t j, double d) {
    if (d < d_first || (d == d_first && j < first)) {
      second = first;
      d_second = d_first;
      first = j;
      d_first = d;
    } else if (d < d_second || (d == d_second && j < second)) {
      second = j;
      d_second = d;
    }
  }
};

double CosineUnchecked(DescriptorView g, DescriptorView f, double g_norm_sq,
                       double f_norm_sq) {
  double dot = 0.0;
  for (std::size_t c = 0; c < kDescriptorDim; ++c) {
    dot += static_cast<double>(g[c]) * static_cast<double>(f[c]);
  }
  const double cosine = dot / (std::sqrt(g_norm_sq) * std::sqrt(f_norm_sq));
  return std::clamp(cosine, -1.0, 1.0);
}

double NormSq(DescriptorView v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return acc;
}

bool AcceptPair(DescriptorView g, double g_norm_sq, const DescriptorSet& frame,
                const Nearest& nn, const MatchConfig& cfg) {
  if (nn.d_second == 0.0) return false;
  const double tau1_sq = cfg.ratio_threshold * cfg.ratio_threshold;
  if (!(nn.d_first / nn.d_second < tau1_sq)) return false;
  const double f_norm_sq = frame.norm_sq(nn.first);
  if (g_norm_sq == 0.0 || f_norm_sq == 0.0) return false;
  return CosineUnchecked(g, frame[nn.first], g_norm_sq, f_norm_sq) >
         cfg.cosine_threshold;
}

enum class Decision { kAccept, kReject, kUnsure };

// Settles the match decision for a row whose exact top two are known to be
// {j0, j1} using only approximate values, each within `eps` of the exact
// one. Returns kUnsure whenever rounding could flip the outcome, so the
// result always agrees with the exact path.
Decision DecideFromApprox(std::size_t j0, std::size_t j1,
                          const std::vector<double>& approx,
                          const float* dot_row, double g_norm_sq, double eps,
                          const DescriptorSet& frame, const MatchConfig& cfg,
                          double tau1_sq) {
  if (approx[j1] < approx[j0]) std::swap(j0, j1);
  const double d1 = approx[j0];
  const double d2 = approx[j1];
  if (d2 - d1 <= 2.0 * eps || d2 - eps <= 0.0) {
    return Decision::kUnsure;
  }
  constexpr double kGuard = 1e-9;
  if ((d1 - eps) / (d2 + eps) >= tau1_sq * (1.0 + kGuard)) {
    return Decision::kReject;
  }
  if (!((d1 + eps) / (d2 - eps) < tau1_sq * (1.0 - kGuard))) {
    return Decision::kUnsure;
  }
  const double f_norm_sq = frame.norm_sq(j0);
  if (g_norm_sq == 0.0 || f_norm_sq == 0.0) return Decision::kUnsure;
  const double cosine = static_cast<double>(dot_row[j0]) /
                        (std::sqrt(g_norm_sq) * std::sqrt(f_norm_sq));
  if (cosine - kApproxRelErr > cfg.cosine_threshold &&
      cfg.cosine_threshold < 1.0) {
    return Decision::kAccept;
  }
  if (cosine + kApproxRelErr <= cfg.cosine_threshold) return Decision::kReject;
  return Decision::kUnsure;
}

void RequireFrameSize(const DescriptorSet& frame) {
  if (frame.size() < 2) {
    throw Error(ErrorCode::kFrameTooSmall,
                "frame has " + std::to_string(frame.size()) +
                    " descriptors; at least 2 are required");
  }
}

}  // namespace

void MatchConfig::Validate() const {
  if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "ratio threshold must lie in (0, 1), got " +
                    std::to_string(ratio_threshold));
  }
  if (!(cosine_threshold > -1.0 && cosine_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cosine threshold must lie in (-1, 1], got " +
                    std::to_string(cosine_threshold));
  }
}

double SqDist(DescriptorView g, DescriptorView f) noexcept {
  double acc = 0.0;
  for (std::size_t c = 0; c < kDescriptorDim; ++c) {
    const double diff = static_cast<double>(g[c]) - static_cast<double>(f[c]);
    acc += diff * diff;
  }
  return acc;
}

double CosineSim(DescriptorView g, DescriptorView f) {
  const double g_norm_sq = NormSq(g);
  const double f_norm_sq = NormSq(f);
  if (g_norm_sq == 0.0 || f_norm_sq == 0.0) {
    throw Error(ErrorCode::kDegenerateDescriptor,
                "cosine similarity of a zero-norm descriptor is undefined");
  }
  return CosineUnchecked(g, f, g_norm_sq, f_norm_sq);
}

std::optional<std::size_t> MatchKeypoint(DescriptorView g,
                                         const DescriptorSet& frame,
                                         const MatchConfig& cfg) {
  cfg.Validate();
  RequireFrameSize(frame);
  Nearest nn;
  for (std::size_t j = 0; j < frame.size(); ++j) {
    nn.Offer(j, SqDist(g, frame[j]));
  }
  if (AcceptPair(g, NormSq(g), frame, nn, cfg)) return nn.first;
  return std::nullopt;
}

std::size_t CountCorrespondences(const DescriptorSet& query,
                                 const DescriptorSet& frame,
                                 const MatchConfig& cfg) {
  cfg.Validate();
  RequireFrameSize(frame);
  if (query.empty()) return 0;

  const auto q_rows = static_cast<Eigen::Index>(query.size());
  const auto k = static_cast<Eigen::Index>(frame.size());
  const ConstRowMapF q_map(query.values().data(), q_rows, kDescriptorDim);
  const ConstRowMapF f_map(frame.values().data(), k, kDescriptorDim);
  const double tau1_sq = cfg.ratio_threshold * cfg.ratio_threshold;

  // Frame norms in float. The row-constant |g|^2 is left out of the
  // float distances and added back in double where values are compared.
  const Eigen::Matrix<float, 1, Eigen::Dynamic> f_norms =
      f_map.rowwise().squaredNorm().transpose();

  RowMatrixF dots;
  RowMatrixF partial;
  std::vector<double> approx(static_cast<std::size_t>(k));
  std::vector<std::size_t> shortlist;
  std::size_t count = 0;

  for (Eigen::Index block = 0; block < q_rows; block += kQueryBlock) {
    const Eigen::Index rows = std::min(kQueryBlock, q_rows - block);
    dots.noalias() = q_map.middleRows(block, rows) * f_map.transpose();
    partial = (-2.0f * dots).rowwise() + f_norms;

    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::size_t qi = static_cast<std::size_t>(block + r);
      const double g_norm_sq = query.norm_sq(qi);
      const float* dot_row = dots.data() + r * k;
      const float* row = partial.data() + r * k;

      float p1 = std::numeric_limits<float>::infinity();
      float p2 = p1;
      for (Eigen::Index j = 0; j < k; ++j) {
        const float v = row[j];
        if (v < p2) {
          if (v < p1) {
            p2 = p1;
            p1 = v;
          } else {
            p2 = v;
          }
        }
      }

      // Any descriptor whose exact distance could rank in the top two lies
      // within twice the error bound of the second-smallest approximation.
      const double eps = kApproxRelErr * (g_norm_sq + frame.max_norm_sq()) +
                         std::numeric_limits<double>::min();
      const double cutoff = static_cast<double>(p2) + 2.0 * eps;
      shortlist.clear();
      for (Eigen::Index j = 0; j < k; ++j) {
        if (static_cast<double>(row[j]) <= cutoff) {
          shortlist.push_back(static_cast<std::size_t>(j));
          approx[j] = g_norm_sq + static_cast<double>(row[j]);
        }
      }

      const Decision quick =
          shortlist.size() == 2
              ? DecideFromApprox(shortlist[0], shortlist[1], approx, dot_row,
                                 g_norm_sq, eps, frame, cfg, tau1_sq)
              : Decision::kUnsure;
      if (quick == Decision::kAccept) {
        ++count;
        continue;
      }
      if (quick == Decision::kReject) continue;

      const DescriptorView g = query[qi];
      Nearest nn;
      for (std::size_t j : shortlist) nn.Offer(j, SqDist(g, frame[j]));
      if (AcceptPair(g, g_norm_sq, frame, nn, cfg)) ++count;
    }
  }
  return count;
}

BestMatchResult BestMatch(const DescriptorSet& query,
                          std::span<const MatchCandidate> candidates,
                          const MatchConfig& cfg, const ScanOptions& options) {
  cfg.Validate();
  if (candidates.empty()) {
    throw Error(ErrorCode::kEmptyCandidates, "no candidate frames to match");
  }

  std::vector<std::size_t> counts(candidates.size(), 0);
  std::vector<char> skipped(candidates.size(), 0);
  auto score = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const DescriptorSet& frame = *candidates[i].descriptors;
      if (frame.size() < 2) {
        skipped[i] = 1;
        continue;
      }
      counts[i] = CountCorrespondences(query, frame, cfg);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(
      options.num_threads, 1, candidates.size());
  if (workers == 1) {
    score(0, candidates.size());
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (candidates.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(candidates.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(score, begin, end);
    }
  }

  BestMatchResult best;
  bool have_best = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    best.skipped += skipped[i];
    const std::uint64_t id = candidates[i].frame_id;
    if (!have_best || counts[i] > best.count ||
        (counts[i] == best.count && id < best.frame_id)) {
      best.frame_id = id;
      best.count = counts[i];
      have_best = true;
    }
  }
  return best;
}

}  // namespace vloc
