#include "vloc/synthworld.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Core>

#include "vloc/error.h"

namespace vloc {
namespace {

constexpr double kMaxDepthM = 1000.0;
constexpr double kMinDepthM = 1.0;
constexpr std::size_t kModePool = 64;
constexpr std::size_t kModesPerLandmark = 4;

using Vec = Eigen::Matrix<double, kDescriptorDim, 1>;
using VecF = Eigen::Matrix<float, kDescriptorDim, 1>;
using MapF = Eigen::Map<VecF>;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec RandomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v;
  do {
    for (double& c : v) c = normal(rng);
  } while (v.squaredNorm() == 0.0);
  return v.normalized();
}

struct Landmark {
  double along_m;
  double lateral_m;
  VecF base;
  std::uint32_t drift_mode;
  std::array<std::uint32_t, kModesPerLandmark> modes;
};

}  // namespace

std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t index) {
  // Weyl step on the hashed master: injective in index for a fixed master,
  // and not symmetric in (master, index).
  return SplitMix64(SplitMix64(master) + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

void WorldConfig::Validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, msg);
  };
  require(speed_mps >= 0.0 && std::isfinite(speed_mps), "speed_mps must be >= 0");
  require(std::isfinite(heading_deg), "heading_deg must be finite");
  require(db_hz > 0.0 && std::isfinite(db_hz), "db_hz must be > 0");
  require(duration_s >= 0.0 && std::isfinite(duration_s), "duration_s must be >= 0");
  require(landmark_overlap >= 0.0 && landmark_overlap <= 1.0,
          "landmark_overlap must be in [0, 1]");
  require(query_noise_sigma >= 0.0 && std::isfinite(query_noise_sigma),
          "query_noise_sigma must be >= 0");
  require(distractor_fraction >= 0.0 && distractor_fraction <= 1.0,
          "distractor_fraction must be in [0, 1]");
  require(half_fov_deg > 0.0 && half_fov_deg < 90.0,
          "half_fov_deg must be in (0, 90)");
  require(lateral_min_m >= 0.0 && lateral_max_m >= lateral_min_m &&
              std::isfinite(lateral_max_m),
          "need 0 <= lateral_min_m <= lateral_max_m");
  require(drift_per_m >= 0.0 && std::isfinite(drift_per_m), "drift_per_m must be >= 0");
  require(observation_noise >= 0.0 && std::isfinite(observation_noise),
          "observation_noise must be >= 0");
  require(!query_range_m || *query_range_m > 0.0, "query_range_m must be > 0");
}

std::size_t WorldConfig::NumFrames() const {
  return static_cast<std::size_t>(std::floor(duration_s * db_hz + 1e-9)) + 1;
}

double WorldConfig::VisibilityDepthM() const {
  const double spacing = speed_mps / db_hz;
  if (landmark_overlap >= 1.0) return kMaxDepthM;
  return std::clamp(spacing / (1.0 - landmark_overlap), kMinDepthM, kMaxDepthM);
}

GeoPoint SyntheticWorld::PositionAt(std::int64_t ts_ns) const {
  const double t = static_cast<double>(ts_ns - cfg.start_ts_ns) /
                   static_cast<double>(kNanosPerSecond);
  const double s = cfg.speed_mps * t;
  const double h = cfg.heading_deg * std::numbers::pi / 180.0;
  return OffsetFlat(cfg.start, s * std::cos(h), s * std::sin(h));
}

SyntheticWorld GenWorld(const WorldConfig& cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform;
  std::normal_distribution<double> normal;

  SyntheticWorld world;
  world.cfg = cfg;

  const std::size_t n_frames = cfg.NumFrames();
  const double spacing = cfg.speed_mps / cfg.db_hz;
  const double path_m = spacing * static_cast<double>(n_frames - 1);
  const double depth = cfg.VisibilityDepthM();
  const double tan_fov = std::tan(cfg.half_fov_deg * std::numbers::pi / 180.0);
  const double far_m = cfg.lateral_max_m / tan_fov + depth;

  std::vector<VecF> pool(kModePool);
  for (VecF& v : pool) v = RandomUnit(rng).cast<float>();

  // Every landmark is visible over exactly `depth` metres of travel, so a
  // density of k / depth gives k expected keypoints per frame.
  const double density = static_cast<double>(cfg.keypoints_per_frame) / depth;
  std::poisson_distribution<std::size_t> poisson(density * (path_m + far_m));
  const std::size_t n_landmarks = poisson(rng);
  std::uniform_int_distribution<std::uint32_t> pick(0, kModePool - 1);

  std::vector<Landmark> landmarks(n_landmarks);
  for (Landmark& l : landmarks) {
    l.along_m = uniform(rng) * (path_m + far_m);
    const double w = cfg.lateral_min_m +
                     uniform(rng) * (cfg.lateral_max_m - cfg.lateral_min_m);
    l.lateral_m = uniform(rng) < 0.5 ? -w : w;
    l.base = RandomUnit(rng).cast<float>();
    l.drift_mode = pick(rng);
    for (auto& m : l.modes) m = pick(rng);
  }
  std::sort(landmarks.begin(), landmarks.end(),
            [](const Landmark& a, const Landmark& b) { return a.along_m < b.along_m; });

  const float drift = static_cast<float>(cfg.drift_per_m);
  const double mode_sigma =
      cfg.observation_noise / std::sqrt(static_cast<double>(kModesPerLandmark));
  std::vector<GeoFrame> frames;
  frames.reserve(n_frames);
  world.keypoint_range_m.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double s = spacing * static_cast<double>(i);
    const double t = static_cast<double>(i) / cfg.db_hz;
    const std::int64_t ts = cfg.start_ts_ns + SecondsToNanos(t);

    auto first = std::lower_bound(
        landmarks.begin(), landmarks.end(), s + cfg.lateral_min_m / tan_fov,
        [](const Landmark& l, double a) { return l.along_m < a; });
    std::vector<float> values;
    std::vector<float> ranges;
    for (auto it = first; it != landmarks.end() && it->along_m <= s + far_m; ++it) {
      const double d = it->along_m - s;
      const double near = std::abs(it->lateral_m) / tan_fov;
      if (d < near || d > near + depth) continue;
      values.resize(values.size() + kDescriptorDim);
      MapF obs(values.data() + values.size() - kDescriptorDim);
      obs = it->base + (drift * static_cast<float>(d)) * pool[it->drift_mode];
      for (auto m : it->modes) {
        obs += static_cast<float>(mode_sigma * normal(rng)) * pool[m];
      }
      obs.normalize();
      ranges.push_back(static_cast<float>(std::hypot(d, it->lateral_m)));
    }
    GeoFrame f;
    f.frame_id = i;
    f.timestamp_ns = ts;
    f.geotag = world.PositionAt(ts);
    f.descriptors = DescriptorSet(std::move(values));
    frames.push_back(std::move(f));
    world.keypoint_range_m.push_back(std::move(ranges));
  }
  world.db = Database(std::move(frames), {"synthetic", "forward"});
  return world;
}

std::vector<QueryInput> GenQueries(const SyntheticWorld& world,
                                   std::int64_t start_ts_ns, std::size_t n,
                                   double period_s, const WorldConfig& cfg,
                                   std::uint64_t seed) {
  cfg.Validate();
  const auto& frames = world.db.frames();
  if (frames.empty()) {
    throw Error(ErrorCode::kOutOfRange, "world has no frames");
  }
  if (!(period_s >= 0.0) || !std::isfinite(period_s)) {
    throw Error(ErrorCode::kInvalidArgument, "period_s must be >= 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform;
  std::normal_distribution<double> noise(0.0, cfg.query_noise_sigma > 0.0
                                                   ? cfg.query_noise_sigma
                                                   : 1.0);

  std::vector<QueryInput> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::int64_t ts =
        start_ts_ns + SecondsToNanos(period_s * static_cast<double>(j));
    if (ts < frames.front().timestamp_ns || ts > frames.back().timestamp_ns) {
      throw Error(ErrorCode::kOutOfRange,
                  "query " + std::to_string(j + 1) +
                      " falls outside the database time range");
    }
    auto it = std::lower_bound(
        frames.begin(), frames.end(), ts,
        [](const GeoFrame& f, std::int64_t t) { return f.timestamp_ns < t; });
    if (it != frames.begin() &&
        (it == frames.end() ||
         ts - std::prev(it)->timestamp_ns <= it->timestamp_ns - ts)) {
      --it;
    }
    const std::size_t fi = static_cast<std::size_t>(it - frames.begin());
    const DescriptorSet& src = it->descriptors;
    const std::vector<float>& ranges = world.keypoint_range_m[fi];

    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < src.size(); ++k) {
      if (!cfg.query_range_m ||
          uniform(rng) < std::exp(-ranges[k] / *cfg.query_range_m)) {
        kept.push_back(k);
      }
    }
    std::vector<float> values;
    values.reserve(kept.size() * kDescriptorDim);
    for (std::size_t k : kept) {
      for (float c : src[k]) {
        const double v = cfg.query_noise_sigma > 0.0 ? c + noise(rng) : c;
        values.push_back(static_cast<float>(v));
      }
    }
    const auto n_distract = static_cast<std::size_t>(
        std::llround(cfg.distractor_fraction * static_cast<double>(kept.size())));
    if (n_distract > 0) {
      std::vector<std::size_t> idx(kept.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t r = 0; r < n_distract; ++r) {
        const Vec v = RandomUnit(rng);
        for (std::size_t c = 0; c < kDescriptorDim; ++c) {
          values[idx[r] * kDescriptorDim + c] = static_cast<float>(v[c]);
        }
      }
    }

    QueryInput q;
    q.descriptors = DescriptorSet(std::move(values));
    q.timestamp_ns = ts;
    q.truth = world.PositionAt(ts);
    out.push_back(std::move(q));
  }
  return out;
}

void MonteCarloConfig::Validate() const {
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (steps == 0) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  if (!(period_s >= 0.0) || !std::isfinite(period_s)) {
    throw Error(ErrorCode::kInvalidArgument, "period_s must be >= 0");
  }
  if (!(lead_s >= 0.0) || !std::isfinite(lead_s)) {
    throw Error(ErrorCode::kInvalidArgument, "lead_s must be >= 0");
  }
}

namespace {

LocalizationTrace RunTrial(const WorldConfig& world_cfg,
                           const PipelineConfig& pipeline_cfg,
                           const MonteCarloConfig& mc, std::uint64_t trial) {
  WorldConfig cfg = world_cfg;
  cfg.seed = TrialSeed(world_cfg.seed, trial);
  const SyntheticWorld world = GenWorld(cfg);

  const auto& frames = world.db.frames();
  const double span = mc.period_s * static_cast<double>(mc.steps - 1);
  const std::int64_t lo = frames.front().timestamp_ns + SecondsToNanos(mc.lead_s);
  const std::int64_t hi = frames.back().timestamp_ns - SecondsToNanos(span);
  if (hi < lo) {
    throw Error(ErrorCode::kInvalidArgument,
                "duration_s too short for the query sequence and lead time");
  }
  std::mt19937_64 rng(SplitMix64(cfg.seed ^ 0x5175657279ULL));
  const double u = std::uniform_real_distribution<double>()(rng);
  const std::int64_t start =
      lo + static_cast<std::int64_t>(std::floor(u * static_cast<double>(hi - lo)));
  const auto queries = GenQueries(world, start, mc.steps, mc.period_s, cfg, rng());
  return LocalizeSequence(world.db, queries, pipeline_cfg);
}

}  // namespace

MonteCarloResult RunMonteCarlo(const WorldConfig& world_cfg,
                               const PipelineConfig& pipeline_cfg,
                               const MonteCarloConfig& mc_cfg) {
  world_cfg.Validate();
  pipeline_cfg.Validate();
  mc_cfg.Validate();

  MonteCarloResult result;
  result.traces.resize(mc_cfg.trials);
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(std::max(1u, mc_cfg.num_threads), mc_cfg.trials));

  if (workers == 1) {
    for (std::size_t t = 0; t < mc_cfg.trials; ++t) {
      result.traces[t] = RunTrial(world_cfg, pipeline_cfg, mc_cfg, t);
    }
  } else {
    // Trials already saturate the workers; scan each candidate list serially.
    PipelineConfig inner = pipeline_cfg;
    inner.scan.options.num_threads = 1;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(mc_cfg.trials);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t t = next++; t < mc_cfg.trials; t = next++) {
            try {
              result.traces[t] = RunTrial(world_cfg, inner, mc_cfg, t);
            } catch (...) {
              errors[t] = std::current_exception();
            }
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  result.evaluation = Evaluate(result.traces);
  return result;
}

}  // namespace vloc
