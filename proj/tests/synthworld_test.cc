#include "vloc/synthworld.h"

#include <set>

#include <gtest/gtest.h>

#include "expect_error.h"
#include "oracles.h"
#include "test_util.h"

namespace vloc {
namespace {

using testing::CodeOf;

WorldConfig Minute() {
  WorldConfig c;
  c.duration_s = 60.0;
  return c;
}

TEST(WorldConfig, Validate) {
  EXPECT_NO_THROW(WorldConfig{}.Validate());
  std::vector<WorldConfig> bad(9);
  bad[0].speed_mps = -1;
  bad[1].db_hz = 0;
  bad[2].landmark_overlap = 1.5;
  bad[3].distractor_fraction = -0.1;
  bad[4].half_fov_deg = 90;
  bad[5].lateral_min_m = 20;
  bad[6].query_range_m = 0.0;
  bad[7].query_noise_sigma = NAN;
  bad[8].duration_s = -1;
  for (const WorldConfig& c : bad) {
    EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
  }
}

TEST(WorldConfig, Derived) {
  EXPECT_EQ(Minute().NumFrames(), 601u);
  EXPECT_EQ(WorldConfig{}.NumFrames(), 101u);
  EXPECT_NEAR(WorldConfig{}.VisibilityDepthM(), 36.0, 1e-9);
  WorldConfig c;
  c.landmark_overlap = 1.0;
  EXPECT_EQ(c.VisibilityDepthM(), 1000.0);
  c.landmark_overlap = 0.0;
  c.speed_mps = 0.0;
  EXPECT_EQ(c.VisibilityDepthM(), 1.0);
}

TEST(GenWorld, FrameSpacing) {
  const SyntheticWorld w = GenWorld(Minute());
  ASSERT_EQ(w.db.size(), 601u);
  for (std::size_t i = 1; i < w.db.size(); ++i) {
    EXPECT_EQ(w.db[i].timestamp_ns - w.db[i - 1].timestamp_ns, 100'000'000);
    EXPECT_NEAR(HaversineM(w.db[i - 1].geotag, w.db[i].geotag), 1.8, 0.01);
  }
  EXPECT_EQ(w.keypoint_range_m.size(), w.db.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.db.size(); ++i) {
    EXPECT_EQ(w.keypoint_range_m[i].size(), w.db[i].descriptors.size());
    total += static_cast<double>(w.db[i].descriptors.size());
  }
  EXPECT_NEAR(total / static_cast<double>(w.db.size()), 200.0, 30.0);
}

TEST(GenWorld, Deterministic) {
  const SyntheticWorld a = GenWorld(WorldConfig{});
  const SyntheticWorld b = GenWorld(WorldConfig{});
  EXPECT_TRUE(testing::FramesBitwiseEqual(a.db, b.db));
  WorldConfig other;
  other.seed = 8;
  EXPECT_FALSE(testing::FramesBitwiseEqual(a.db, GenWorld(other).db));
}

TEST(GenWorld, StandingStill) {
  WorldConfig c;
  c.speed_mps = 0.0;
  const SyntheticWorld w = GenWorld(c);
  for (const GeoFrame& f : w.db.frames()) EXPECT_EQ(f.geotag, c.start);
}

TEST(GenWorld, Heading) {
  WorldConfig c;
  c.heading_deg = 90.0;
  const SyntheticWorld w = GenWorld(c);
  EXPECT_EQ(w.db.frames().back().geotag.lat(), c.start.lat());
  EXPECT_GT(w.db.frames().back().geotag.lon(), c.start.lon());
  EXPECT_NEAR(HaversineM(c.start, w.db.frames().back().geotag), 180.0, 180.0 * 0.0015);
}

TEST(GenWorld, NeighboursShareMoreThanDistantFrames) {
  const SyntheticWorld w = GenWorld(WorldConfig{});
  const MatchConfig m;
  const std::size_t near = CountCorrespondences(w.db[50].descriptors, w.db[51].descriptors, m);
  const std::size_t far = CountCorrespondences(w.db[50].descriptors, w.db[90].descriptors, m);
  EXPECT_GT(near, far);
}

TEST(GenQueries, SixQueriesEighteenMetresApart) {
  const SyntheticWorld w = GenWorld(Minute());
  const auto q = GenQueries(w, 5'000'000'000, 6, 1.0, w.cfg, 1);
  ASSERT_EQ(q.size(), 6u);
  for (std::size_t j = 1; j < q.size(); ++j) {
    EXPECT_EQ(q[j].timestamp_ns - q[j - 1].timestamp_ns, 1'000'000'000);
    EXPECT_NEAR(HaversineM(*q[j - 1].truth, *q[j].truth), 18.0, 0.05);
  }
  EXPECT_EQ(*q[0].truth, w.db[50].geotag);
}

TEST(GenQueries, NoiselessCopiesNearestFrame) {
  WorldConfig c;
  c.query_noise_sigma = 0.0;
  c.query_range_m.reset();
  const SyntheticWorld w = GenWorld(c);
  const auto q = GenQueries(w, 2'040'000'000, 3, 1.0, c, 2);
  EXPECT_TRUE(BitwiseEqual(q[0].descriptors, w.db[20].descriptors));
  EXPECT_TRUE(BitwiseEqual(q[1].descriptors, w.db[30].descriptors));
  EXPECT_TRUE(BitwiseEqual(q[2].descriptors, w.db[40].descriptors));
}

TEST(GenQueries, RangeThinningDropsFarKeypoints) {
  const SyntheticWorld w = GenWorld(WorldConfig{});
  const auto q = GenQueries(w, 3'000'000'000, 1, 1.0, w.cfg, 3);
  EXPECT_LT(q[0].descriptors.size(), w.db[30].descriptors.size());
  EXPECT_GT(q[0].descriptors.size(), 0u);
}

TEST(GenQueries, DistractorsKillCorrespondences) {
  WorldConfig c;
  c.distractor_fraction = 1.0;
  const SyntheticWorld w = GenWorld(c);
  const auto q = GenQueries(w, 4'000'000'000, 3, 1.0, c, 4);
  for (const QueryInput& in : q) {
    for (const GeoFrame& f : w.db.frames()) {
      EXPECT_LE(CountCorrespondences(in.descriptors, f.descriptors, {}), 1u);
    }
  }
}

TEST(GenQueries, OutOfRange) {
  const SyntheticWorld w = GenWorld(WorldConfig{});
  EXPECT_EQ(CodeOf([&] { GenQueries(w, -1, 1, 1.0, w.cfg, 0); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([&] { GenQueries(w, 8'000'000'000, 6, 1.0, w.cfg, 0); }),
            ErrorCode::kOutOfRange);
}

TEST(MonteCarloConfig, Validate) {
  MonteCarloConfig c;
  c.trials = 0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.steps = 0;
  EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.lead_s = 20;  // longer than the world
  EXPECT_EQ(CodeOf([&] { RunMonteCarlo(WorldConfig{}, {}, c); }), ErrorCode::kInvalidArgument);
}

TEST(TrialSeed, Distinct) {
  std::set<std::uint64_t> seen;
  // Neighbouring masters must not share trial streams.
  for (std::uint64_t m : {0ull, 7ull, 8ull}) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(TrialSeed(m, i));
  }
  EXPECT_EQ(seen.size(), 3000u);
}

TEST(RunMonteCarlo, NoiselessWithoutExclusionIsQuantized) {
  WorldConfig w;
  w.query_noise_sigma = 0.0;
  PipelineConfig p;
  p.scan.exclusion_s.reset();
  MonteCarloConfig mc;
  mc.trials = 3;
  const MonteCarloResult r = RunMonteCarlo(w, p, mc);
  for (const LocalizationTrace& t : r.traces) {
    ASSERT_EQ(t.steps.size(), 6u);
    for (const TraceStep& s : t.steps) EXPECT_LE(*s.measurement_error_m, 0.9);
  }
}

TEST(RunMonteCarlo, ExclusionCostsAboutOneSecondOfTravel) {
  MonteCarloConfig mc;
  mc.trials = 20;
  const MonteCarloResult r = RunMonteCarlo(WorldConfig{}, {}, mc);
  EXPECT_EQ(r.evaluation.traces, 20u);
  EXPECT_GT(r.evaluation.steps[0].mean_meas_m, 14.0);
  EXPECT_LT(r.evaluation.steps[0].mean_meas_m, 24.0);
  for (const LocalizationTrace& t : r.traces) {
    for (const TraceStep& s : t.steps) {
      EXPECT_GT(std::abs(s.matched_ts_ns - s.query_ts_ns), 1'000'000'000);
    }
  }
}

TEST(RunMonteCarlo, ThreadCountDoesNotMatter) {
  MonteCarloConfig mc;
  mc.trials = 6;
  const MonteCarloResult a = RunMonteCarlo(WorldConfig{}, {}, mc);
  mc.num_threads = 3;
  const MonteCarloResult b = RunMonteCarlo(WorldConfig{}, {}, mc);
  ASSERT_EQ(a.traces.size(), b.traces.size());
  for (std::size_t t = 0; t < a.traces.size(); ++t) {
    for (std::size_t s = 0; s < a.traces[t].steps.size(); ++s) {
      EXPECT_EQ(a.traces[t].steps[s].matched_frame_id, b.traces[t].steps[s].matched_frame_id);
      EXPECT_EQ(a.traces[t].steps[s].estimation_error_m, b.traces[t].steps[s].estimation_error_m);
    }
  }
  EXPECT_EQ(a.evaluation.final_mean_est_m(), b.evaluation.final_mean_est_m());
}

}  // namespace
}  // namespace vloc
