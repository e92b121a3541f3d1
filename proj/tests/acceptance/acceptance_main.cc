// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cli.h"
#include "oracles.h"
#include "test_util.h"
#include "vloc/database.h"
#include "vloc/error.h"
#include "vloc/geodesy.h"
#include "vloc/ingest.h"
#include "vloc/kalman.h"
#include "vloc/matching.h"
#include "vloc/pipeline.h"
#include "vloc/storage.h"
#include "vloc/synthworld.h"

namespace vloc {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int g_failures = 0;

void Report(int n, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

Descriptor Copy(DescriptorView v) {
  Descriptor d;
  std::copy(v.begin(), v.end(), d.begin());
  return d;
}

// ---------------------------------------------------------------------------

void MatchingOracle() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> n_cand(1, 20), n_kp(0, 50), pick(0, 9);
  std::uniform_real_distribution<double> sigma(0.0, 0.4);
  int mismatches = 0;
  const auto t0 = Clock::now();
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<DescriptorSet> sets;
    const int nc = n_cand(rng);
    for (int c = 0; c < nc; ++c) {
      std::vector<Descriptor> v(n_kp(rng));
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = testing::RandomDescriptor(rng);
        if (i > 0 && pick(rng) == 0) v[i] = v[i - 1];  // exact duplicates
      }
      // Some candidates repeat an earlier one so ties occur.
      if (c > 0 && pick(rng) == 0) {
        sets.push_back(sets[static_cast<std::size_t>(c - 1)]);
      } else {
        sets.push_back(DescriptorSet(v));
      }
    }
    // Query built from a random candidate plus noise and outliers.
    const DescriptorSet& src = sets[rng() % sets.size()];
    std::vector<Descriptor> q;
    const int nq = n_kp(rng);
    for (int i = 0; i < nq; ++i) {
      if (src.empty() || pick(rng) < 2) {
        q.push_back(testing::RandomDescriptor(rng));
      } else {
        q.push_back(testing::Perturbed(Copy(src[rng() % src.size()]), sigma(rng), rng));
      }
    }
    const DescriptorSet query(q);
    std::vector<MatchCandidate> cands;
    std::vector<std::pair<std::uint64_t, const DescriptorSet*>> ocands;
    for (std::size_t c = 0; c < sets.size(); ++c) {
      const std::uint64_t id = (c * 37 + 11) % 101;
      cands.push_back({id, &sets[c]});
      ocands.emplace_back(id, &sets[c]);
    }
    const BestMatchResult got = BestMatch(query, cands, {});
    if (std::pair(got.frame_id, got.count) != oracle::Best(query, ocands)) ++mismatches;
  }
  const double secs = Seconds(t0);
  Report(1, mismatches == 0 && secs < 5.0,
         Fmt("100 random best_match instances, %d mismatches vs brute force, %.2f s",
             mismatches, secs));
}

void SelfMatch() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> kd(2, 100);
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t k = kd(rng);
    const DescriptorSet a = testing::RandomSet(k, rng);
    if (CountCorrespondences(a, a, {}) != k) ++bad;
  }
  Report(2, bad == 0, Fmt("50 sets matched against themselves, %d with count != k", bad));
}

void Geodesy() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> lat(-60.0, 60.0), lon(-180.0, 180.0),
      bearing(0.0, 2 * std::numbers::pi), dist(1.0, 5000.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint a(lat(rng), lon(rng));
    const double b = bearing(rng), d = dist(rng);
    const double dlat = d * std::cos(b) / 111195.0;
    const double dlon = d * std::sin(b) / (111195.0 * std::cos(a.lat() * std::numbers::pi / 180));
    const GeoPoint p(a.lat() + dlat, std::clamp(a.lon() + dlon, -180.0, 180.0));
    const double h = HaversineM(a, p);
    if (h == 0.0) continue;
    worst = std::max(worst, std::abs(h - EquirectM(a, p)) / h);
  }
  std::uniform_real_distribution<double> glat(-90.0, 90.0);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint a(glat(rng), lon(rng)), b(glat(rng), lon(rng)), c(glat(rng), lon(rng));
    const double ab = HaversineM(a, b), bc = HaversineM(b, c), ac = HaversineM(a, c);
    if (ab != HaversineM(b, a) || HaversineM(a, a) != 0.0 || (a != b && !(ab > 0.0)) ||
        ac > ab + bc + 1e-6) {
      ++violations;
    }
  }
  Report(3, worst <= 0.002 && violations == 0,
         Fmt("max haversine/equirect relative gap %.2e over 1000 pairs < 5 km; "
             "%d axiom violations on 1000 triples",
             worst, violations));
}

void FirstStep() {
  const FilterConfig cfg;
  double worst = 0.0;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-179.0, 179.0);
  for (int i = 0; i < 100; ++i) {
    const GeoPoint z(lat(rng), lon(rng));
    const FilterState s = Update(InitFilter(z, cfg), z, cfg);
    worst = std::max({worst, std::abs(s.x(0) - z.lat()), std::abs(s.x(1) - z.lon())});
  }
  // A real first fix from a drive.
  const GeoPoint z(49.01494, 8.43413);
  const FilterState s = Update(InitFilter(z, cfg), z, cfg);
  worst = std::max({worst, std::abs(s.x(0) - z.lat()), std::abs(s.x(1) - z.lon())});
  // A prior far from the measurement is still overridden.
  double far = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GeoPoint z1(lat(rng), lon(rng));
    FilterState prior;
    prior.x << lat(rng), lon(rng), 0.0, 0.0;
    prior.p = cfg.p0_scale * StateCovariance::Identity();
    const FilterState t = Update(prior, z1, cfg);
    far = std::max({far, std::abs(t.x(0) - z1.lat()), std::abs(t.x(1) - z1.lon())});
  }
  Report(4, worst <= 1e-6 && far <= 1e-6,
         Fmt("first posterior vs first measurement, max deviation %.3g deg; from an "
             "unrelated prior %.3g deg (P0 = 1000 I, sigma_r = 1e-4)",
             worst, far));
}

void CovarianceHealth() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  FilterConfig cfg;
  FilterState s = InitFilter(GeoPoint(49.0, 8.43), cfg);
  double asym = 0.0, min_eig = std::numeric_limits<double>::infinity();
  GeoPoint truth(49.0, 8.43);
  for (int i = 0; i < 10000; ++i) {
    if (u(rng) < 0.5) {
      s = Predict(s, cfg);
    } else {
      truth = GeoPoint(std::clamp(truth.lat() + 1e-4 * n(rng), -89.0, 89.0),
                       std::clamp(truth.lon() + 1e-4 * n(rng), -179.0, 179.0));
      const double scale = std::pow(10.0, 4.0 * u(rng) - 2.0);  // outliers too
      s = Update(s,
                 GeoPoint(std::clamp(truth.lat() + scale * 1e-4 * n(rng), -90.0, 90.0),
                          std::clamp(truth.lon() + scale * 1e-4 * n(rng), -180.0, 180.0)),
                 cfg);
    }
    asym = std::max(asym, (s.p - s.p.transpose()).cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<StateCovariance> es(s.p, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  Report(5, asym <= 1e-9 && min_eig >= -1e-9,
         Fmt("10000 random predict/update steps: max |P - P^T| = %.2e, min eigenvalue "
             "%.2e",
             asym, min_eig));
}

void MonteCarlo() {
  MonteCarloConfig mc;  // 1000 trials, 6 steps, 1 s period
  mc.num_threads = std::max(1u, std::thread::hardware_concurrency());
  WorldConfig world;  // 18 m/s, 10 Hz, seed 7
  const PipelineConfig pipe;  // +-20 s window, 1 s exclusion
  const auto t0 = Clock::now();
  const MonteCarloResult r = RunMonteCarlo(world, pipe, mc);
  const double secs = Seconds(t0);
  const auto& st = r.evaluation.steps;
  bool a = true, b = true;
  std::string table;
  for (std::size_t k = 0; k < st.size(); ++k) {
    a = a && st[k].mean_meas_m >= 10.0 && st[k].mean_meas_m <= 30.0;
    if (k >= 3) b = b && st[k].mean_est_m <= st[k - 1].mean_est_m;
    table += Fmt(" %zu:%.2f/%.2f", k + 1, st[k].mean_meas_m, st[k].mean_est_m);
  }
  const double fm = r.evaluation.final_mean_meas_m(), fe = r.evaluation.final_mean_est_m();
  const bool c = fe < 0.4 * fm && fe <= 5.0;
  Report(6, a && b && c && secs < 60.0,
         Fmt("1000 trials seed 7 meas/est m:%s; (a) %s (b) %s (c) final %.2f m vs "
             "0.4*%.2f; %.1f s on %u threads",
             table.c_str(), a ? "ok" : "no", b ? "ok" : "no", fe, fm, secs,
             mc.num_threads));
}

void ReversingSequence() {
  const double meas_lon[] = {8.43413, 8.43429, 8.43413, 8.43398, 8.43384, 8.43369};
  const double meas_lat[] = {49.01494, 49.01500, 49.01494, 49.01489, 49.01484, 49.01479};
  const double true_lon[] = {8.43429, 8.43413, 8.43398, 8.43384, 8.43369, 8.43355};
  const double true_lat[] = {49.01500, 49.01494, 49.01489, 49.01484, 49.01479, 49.01475};
  std::vector<GeoPoint> z;
  for (int i = 0; i < 6; ++i) z.emplace_back(meas_lat[i], meas_lon[i]);
  const FilterConfig cfg;
  const auto states = FilterTrack(z, cfg);
  std::vector<double> me, ee;
  std::string row;
  for (int i = 0; i < 6; ++i) {
    const GeoPoint truth(true_lat[i], true_lon[i]);
    me.push_back(HaversineM(z[static_cast<std::size_t>(i)], truth));
    ee.push_back(HaversineM(
        ReportedEstimate(states[static_cast<std::size_t>(i)], cfg, EstimateMode::kPredicted),
        truth));
    row += Fmt(" %d:%.2f/%.2f", i + 1, me.back(), ee.back());
  }
  Report(7, ee[1] > me[1] && ee[5] < me[5],
         Fmt("reversing measurement sequence, meas/est m:%s; step 2 est > meas, final est "
             "< meas",
             row.c_str()));
}

void RoundTrip() {
  std::mt19937_64 rng(808);
  testing::TempDir dir("accept");
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const Database db = testing::RandomDatabase(rng() % 8, rng);
    const fs::path p = dir.path() / ("db" + std::to_string(i) + ".vldb");
    SaveDatabase(db, p);
    if (!testing::FramesBitwiseEqual(db, LoadDatabase(p))) ++bad;
  }
  testing::WriteKittiFixture(dir.path() / "drive", testing::kKittiFixtureCoords, rng);
  const Database k = IngestKitti(dir.path() / "drive");
  bool geotags = k.size() == 3;
  for (std::size_t i = 0; geotags && i < 3; ++i) {
    geotags = k[i].geotag == GeoPoint(std::stod(testing::kKittiFixtureCoords[i].first),
                                      std::stod(testing::kKittiFixtureCoords[i].second));
  }
  Report(8, bad == 0 && geotags,
         Fmt("50 random databases saved and reloaded, %d not bit-exact; 3-frame KITTI "
             "fixture geotags %s",
             bad, geotags ? "verbatim" : "wrong"));
}

void WindowSoundness() {
  std::mt19937_64 rng(909);
  int outside = 0, differ = 0, empty = 0;
  for (int i = 0; i < 100; ++i) {
    // A short synthetic drive per scan, so matches are informative.
    WorldConfig w;
    w.seed = rng();
    w.keypoints_per_frame = 60;
    w.duration_s = 30.0;
    const SyntheticWorld world = GenWorld(w);
    const auto q = GenQueries(world, SecondsToNanos(2.0 + 26.0 * (rng() % 1000) / 1000.0), 1,
                              1.0, w, rng());
    ScanConfig cfg;
    cfg.window_s = 1.0 + static_cast<double>(rng() % 150) / 10.0;
    cfg.exclusion_s = static_cast<double>(rng() % 30) / 10.0;
    cfg.center_ts_ns = world.db[rng() % world.db.size()].timestamp_ns;
    const std::int64_t qt = q[0].timestamp_ns;
    try {
      const ScanResult r = Scan(world.db, q[0].descriptors, qt, cfg, {});
      if (std::abs(r.frame->timestamp_ns - *cfg.center_ts_ns) > SecondsToNanos(*cfg.window_s) ||
          std::abs(r.frame->timestamp_ns - qt) <= SecondsToNanos(*cfg.exclusion_s)) {
        ++outside;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCandidates) throw;
      ++empty;
    }
    ScanConfig whole;
    whole.exclusion_s.reset();
    whole.window_s = 1e6;
    whole.center_ts_ns = qt;
    ScanConfig full = whole;
    full.window_s.reset();
    const ScanResult a = Scan(world.db, q[0].descriptors, qt, whole, {});
    const ScanResult b = Scan(world.db, q[0].descriptors, qt, full, {});
    if (a.frame != b.frame || a.count != b.count || a.candidates != b.candidates) ++differ;
  }
  Report(9, outside == 0 && differ == 0,
         Fmt("100 windowed scans: %d results outside window or inside exclusion (%d had no "
             "candidates); whole-range window vs full scan: %d differences",
             outside, empty, differ));
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Determinism() {
  testing::TempDir dir("accept");
  std::string csv[3];
  int codes = 0;
  for (int i = 0; i < 3; ++i) {
    const std::string out = (dir.path() / std::to_string(i)).string();
    std::vector<const char*> argv = {"vloc", "simulate", "--trials", "25", "--seed", "1234",
                                     "--out-dir", out.c_str()};
    if (i == 2) {
      argv.push_back("--threads");
      argv.push_back("4");
    }
    std::ostringstream o, e;
    codes |= cli::Run(static_cast<int>(argv.size()), argv.data(), o, e);
    csv[i] = Slurp(fs::path(out) / "errors.csv");
  }
  const bool cli_same = codes == 0 && !csv[0].empty() && csv[0] == csv[1] && csv[0] == csv[2];

  MonteCarloConfig mc;
  mc.trials = 40;
  WorldConfig w;
  w.seed = 99;
  const MonteCarloResult s = RunMonteCarlo(w, {}, mc);
  mc.num_threads = 4;
  const MonteCarloResult p = RunMonteCarlo(w, {}, mc);
  bool traces_same = s.traces.size() == p.traces.size();
  for (std::size_t t = 0; traces_same && t < s.traces.size(); ++t) {
    for (std::size_t k = 0; k < s.traces[t].steps.size(); ++k) {
      const TraceStep &x = s.traces[t].steps[k], &y = p.traces[t].steps[k];
      traces_same = traces_same && x.matched_frame_id == y.matched_frame_id &&
                    x.estimate == y.estimate && x.state.p == y.state.p;
    }
  }
  Report(10, cli_same && traces_same,
         Fmt("simulate --seed 1234 twice (and with --threads 4): errors.csv %s; 40 trials "
             "serial vs 4 threads: %s",
             cli_same ? "byte-identical" : "differs", traces_same ? "identical" : "differ"));
}

}  // namespace
}  // namespace vloc

int main(int argc, char** argv) {
  using namespace vloc;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::pair<int, void (*)()> criteria[] = {
      {1, MatchingOracle}, {2, SelfMatch},  {3, Geodesy},          {4, FirstStep},
      {5, CovarianceHealth}, {6, MonteCarlo}, {7, ReversingSequence}, {8, RoundTrip},
      {9, WindowSoundness},  {10, Determinism}};
  int ran = 0;
  for (const auto& [n, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    ++ran;
    try {
      fn();
    } catch (const std::exception& e) {
      Report(n, false, std::string("exception: ") + e.what());
    }
  }
  if (ran == 0) {
    std::fprintf(stderr, "no such criterion\n");
    return 2;
  }
  std::printf("%d of %d criteria failed\n", g_failures, ran);
  return g_failures == 0 ? 0 : 1;
}
