// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Every tolerance and time limit is pinned below.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "support/cases.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "unit_binaries.hpp"
#include "vns/fitting.hpp"
#include "vns/metrics.hpp"
#include "vns/scorer.hpp"
#include "vns/synthetic.hpp"
#include "vns/tuning.hpp"

namespace {

using namespace vns;
using oracle::Rng;

// Criterion 1
constexpr int kParityInstances = 200;
constexpr Index kParityMaxN = 50;
constexpr Index kParityMaxD = 8;
constexpr double kParityTol = 1e-8;
constexpr double kParityLimitS = 5;

// Criterion 2
constexpr int kRankSamples = 1000;
constexpr double kRankMinGap = 10.0;
constexpr double kRankMeanRelErr = 0.05;
constexpr double kRankAurocTol = 0.01;
constexpr double kRankLimitS = 30;

// Criterion 3
constexpr int kErrorOrderTrials = 20;
constexpr double kErrorOrderSlope = -2.0;
constexpr double kErrorOrderSlopeTol = 0.3;
constexpr double kRayleighSlack = 1e-12;
constexpr double kErrorOrderLimitS = 20;

// Criterion 4
constexpr double kScalingLambda = 0.6;
constexpr double kScalingAlpha = 0.3;
constexpr double kScalingSlope = -1.0;
constexpr double kScalingSlopeTol = 0.15;
constexpr double kScalingLimitS = 1;

// Criterion 5
constexpr int kMetricPairs = 100;
constexpr double kAurocTol = 1e-12;
constexpr double kMetricLimitS = 10;

// Criterion 6
constexpr int kEfficiencyClasses = 10;
constexpr Index kEfficiencyDim = 32;
constexpr Index kEfficiencyPerClass = 5000;
constexpr double kEfficiencyFraction = 0.01;
constexpr double kEfficiencyTol = 0.02;
constexpr double kEfficiencyLimitS = 60;

// Criterion 7
constexpr double kAggregationMargin = 0.0;
constexpr double kAggregationLimitS = 10;

// Criterion 8
constexpr int kMinPropertyCases = 200;
static_assert(oracle::kPropertyCases >= kMinPropertyCases);

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

Rng CaseRng(std::uint64_t seed, int i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(i), 0xacce97u};
  return Rng(seq);
}

// Least-squares slope of log y against log x.
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

Verdict ExactDeltaParity() {
  double worst = 0.0;
  for (int i = 0; i < kParityInstances; ++i) {
    Rng rng = CaseRng(1, i);
    const Index n = oracle::UniformInt(rng, 1, kParityMaxN);
    const Index d = oracle::UniformInt(rng, 1, kParityMaxD);
    const RowMatrix x = oracle::ClusteredRows(rng, n, oracle::RandomUnit(rng, d),
                                              oracle::Uniform(rng, 0.05, 2.0));
    // Half the test samples are fresh directions, half are perturbed training rows.
    Vector h = oracle::RandomUnit(rng, d);
    if (i % 2 == 1) {
      h = x.row(oracle::UniformInt(rng, 0, static_cast<int>(n) - 1)).transpose() +
          0.05 * oracle::GaussianVector(rng, d);
      h.normalize();
    }
    const auto spectrum = full_eigendecomposition(density_matrix(FeatureMatrix(x, true)));
    const double got = class_delta_exact(spectrum, n, h);
    const double want = oracle::LogVs2FromRows(oracle::AppendRow(x, h)) - oracle::LogVs2FromRows(x);
    worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= kParityTol,
          Format("max |delta_exact - log VS2 recomputed| = %.2e (tol %.0e) over %d instances",
                 worst, kParityTol, kParityInstances)};
}

Verdict RankOneVersusExact() {
  SyntheticSpec spec;
  spec.classes = 10;
  spec.dim = 32;
  spec.seed = 2;
  const SyntheticBenchmark bench = make_synthetic_benchmark(spec);
  const auto rows = class_row_indices(bench.train);

  double min_gap = INFINITY, rel_sum = 0.0;
  Rng rng(2);
  for (int c = 0; c < spec.classes; ++c) {
    const EmbeddingDataset cls = bench.train.Subset(rows[static_cast<size_t>(c)]);
    const auto spectrum = full_eigendecomposition(density_matrix(l2_normalize_rows(cls.features)));
    min_gap = std::min(min_gap, spectrum.eigenvalues[0] / spectrum.eigenvalues[1]);
    ClassSpectralModel m;
    m.n_c = cls.size();
    m.eigenvalues = {spectrum.eigenvalues[0]};
    m.eigenvectors = spectrum.eigenvectors.leftCols(1);
    for (int s = 0; s < kRankSamples / spec.classes; ++s) {
      const Vector h = oracle::RandomUnit(rng, spec.dim);
      const double exact = class_delta_exact(spectrum, m.n_c, h);
      rel_sum += std::abs(class_delta_rank1(m, h) - exact) / std::abs(exact);
    }
  }
  const double mean_rel = rel_sum / kRankSamples;

  BenchOptions opts;
  opts.detectors = {DetectorKind::kVns};
  opts.rank = 1;
  const auto r1 = run_benchmark(bench, opts);
  opts.rank = static_cast<int>(spec.dim);
  const auto rfull = run_benchmark(bench, opts);
  double worst_auroc = 0.0;
  std::string aurocs;
  for (size_t i = 0; i < r1.size(); ++i) {
    worst_auroc = std::max(worst_auroc, std::abs(r1[i].report.auroc - rfull[i].report.auroc));
    aurocs += Format(" %s %.4f/%.4f", r1[i].report.dataset_tag.c_str(), r1[i].report.auroc,
                     rfull[i].report.auroc);
  }
  const bool pass = min_gap >= kRankMinGap && mean_rel <= kRankMeanRelErr &&
                    worst_auroc <= kRankAurocTol;
  return {pass, Format("min lambda1/lambda2 = %.1f (need >= %.0f), mean rel err = %.4f "
                       "(tol %.2f) over %d samples; AUROC r=1/r=%d:%s, max diff %.2e (tol %.2f)",
                       min_gap, kRankMinGap, mean_rel, kRankMeanRelErr, kRankSamples,
                       static_cast<int>(spec.dim), aurocs.c_str(), worst_auroc, kRankAurocTol)};
}

Verdict ErrorOrder() {
  const Index d = 8;
  Vector sigma(d);
  sigma << 0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05;
  std::vector<double> ns, errs;
  double worst_excess = -INFINITY;
  int trial = 0;
  for (Index n : {16, 64, 256, 1024}) {
    for (int t = 0; t < kErrorOrderTrials; ++t, ++trial) {
      Rng rng = CaseRng(3, trial);
      const RowMatrix x = oracle::Cloud(rng, n, oracle::RandomUnit(rng, d), sigma);
      const Vector h = oracle::RandomUnit(rng, d);
      EmbeddingDataset data;
      data.features = FeatureMatrix(x, true);
      data.labels = std::vector<int>(static_cast<size_t>(n), 0);
      data.class_count = 1;
      const GlobalModel g = fit_detector(data, 1).global_model;
      // The global term is -n log(estimate / lambda); invert it.
      const double nd = static_cast<double>(n);
      const double estimate = g.lambda_max * std::exp(-global_score(g, h) / nd);
      const double exact = oracle::JacobiEigen(oracle::DensityFromRows(oracle::AppendRow(x, h))).first[0];
      worst_excess = std::max(worst_excess, estimate - exact);
      ns.push_back(nd);
      errs.push_back(std::max(std::abs(estimate - exact), 1e-300));
    }
  }
  const double slope = LogLogSlope(ns, errs);
  const bool pass = std::abs(slope - kErrorOrderSlope) <= kErrorOrderSlopeTol &&
                    worst_excess <= kRayleighSlack;
  return {pass, Format("slope = %.3f (want %.1f +- %.1f) over N in {16,64,256,1024} x %d trials; "
                       "max(estimate - exact) = %.2e (tol %.0e)",
                       slope, kErrorOrderSlope, kErrorOrderSlopeTol, kErrorOrderTrials,
                       worst_excess, kRayleighSlack)};
}

Verdict ClassSizeScaling() {
  const double local_limit = 2.0 - 2.0 * kScalingAlpha / kScalingLambda;
  const double global_limit = 1.0 - kScalingAlpha / kScalingLambda;
  std::vector<double> ns, local_dev, global_dev;
  for (double n : {1e2, 1e3, 1e4, 1e5}) {
    ns.push_back(n);
    local_dev.push_back(std::abs(n * class_delta_rank1(n, kScalingLambda, kScalingAlpha) - local_limit));
    global_dev.push_back(std::abs(global_score(n, kScalingLambda, kScalingAlpha) - global_limit));
  }
  const double local_slope = LogLogSlope(ns, local_dev);
  const double global_slope = LogLogSlope(ns, global_dev);
  const bool pass = std::abs(local_slope - kScalingSlope) <= kScalingSlopeTol &&
                    std::abs(global_slope - kScalingSlope) <= kScalingSlopeTol;
  return {pass, Format("local: limit %.3f, slope %.3f; global: limit %.3f, slope %.3f "
                       "(want %.1f +- %.2f); |N delta - L| at 1e5 = %.2e",
                       local_limit, local_slope, global_limit, global_slope, kScalingSlope,
                       kScalingSlopeTol, local_dev.back())};
}

Verdict MetricOracles() {
  double worst = 0.0;
  int fpr_mismatch = 0;
  for (int i = 0; i < kMetricPairs; ++i) {
    Rng rng = CaseRng(5, i);
    const bool coarse = i % 2 == 0;
    auto draw = [&](int n, double shift) {
      std::normal_distribution<double> normal(shift, 1.0);
      std::vector<double> v(static_cast<size_t>(n));
      for (double& s : v) {
        s = normal(rng);
        if (coarse) s = std::round(s * 2.0) / 2.0;
      }
      return v;
    };
    const auto id = draw(oracle::UniformInt(rng, 1, 200), oracle::Uniform(rng, -1.0, 2.0));
    const auto ood = draw(oracle::UniformInt(rng, 1, 200), 0.0);
    worst = std::max(worst, std::abs(auroc(id, ood) - oracle::AurocAllPairs(id, ood)));
    for (double tpr : {0.95, oracle::Uniform(rng, 0.01, 1.0)}) {
      const auto [fpr, threshold] = oracle::FprAtTprSweep(id, ood, tpr);
      const FprAtTpr got = fpr_at_tpr(id, ood, tpr);
      if (got.fpr != fpr || got.threshold != threshold) ++fpr_mismatch;
    }
  }
  return {worst <= kAurocTol && fpr_mismatch == 0,
          Format("max |auroc - all-pairs| = %.2e (tol %.0e); fpr@tpr mismatches = %d of %d "
                 "(exact match required) over %d score-set pairs",
                 worst, kAurocTol, fpr_mismatch, 2 * kMetricPairs, kMetricPairs)};
}

Verdict DataEfficiency() {
  SyntheticSpec spec;
  spec.classes = kEfficiencyClasses;
  spec.dim = kEfficiencyDim;
  spec.per_class = kEfficiencyPerClass;
  spec.seed = 6;
  const SyntheticBenchmark bench = make_synthetic_benchmark(spec);
  BenchOptions opts;
  opts.detectors = {DetectorKind::kVns};
  const auto full = run_benchmark(bench, opts);
  opts.fit_fraction = kEfficiencyFraction;
  opts.subsample_seed = 6;
  const auto sub = run_benchmark(bench, opts);
  double worst = 0.0;
  std::string aurocs;
  for (size_t i = 0; i < full.size(); ++i) {
    worst = std::max(worst, std::abs(full[i].report.auroc - sub[i].report.auroc));
    aurocs += Format(" %s %.4f/%.4f", full[i].report.dataset_tag.c_str(), full[i].report.auroc,
                     sub[i].report.auroc);
  }
  return {worst <= kEfficiencyTol,
          Format("AUROC full/%g%% fit:%s; max diff %.2e (tol %.2f); C=%d D=%d %d/class",
                 100 * kEfficiencyFraction, aurocs.c_str(), worst, kEfficiencyTol,
                 kEfficiencyClasses, static_cast<int>(kEfficiencyDim),
                 static_cast<int>(kEfficiencyPerClass))};
}

Verdict AggregationBenefit() {
  const oracle::Scenario s = oracle::AmbiguousPairScenario(7);
  const FittedDetector f = fit_detector(s.train, 1);
  double best[3] = {-1, -1, -1};
  for (int k : {1, 2}) {
    for (double gamma : gamma_grid()) {
      const DetectorConfig cfg{k, gamma, false, 1};
      const auto id = vns_score(f, s.id, cfg).vns;
      const auto ood = vns_score(f, s.ood, cfg).vns;
      std::vector<double> id_conf(id.size()), ood_conf(ood.size());
      std::transform(id.begin(), id.end(), id_conf.begin(), std::negate<>());
      std::transform(ood.begin(), ood.end(), ood_conf.begin(), std::negate<>());
      best[k] = std::max(best[k], auroc(id_conf, ood_conf));
    }
  }
  return {best[2] - best[1] > kAggregationMargin,
          Format("best AUROC over gamma: K=2 %.4f, K=1 %.4f, margin %.4f (need > %g)", best[2],
                 best[1], best[2] - best[1], kAggregationMargin)};
}

// Runs every property suite in the unit binaries.
Verdict InvariantSuite() {
  int failed = 0;
  std::string detail;
  for (const char* bin : kUnitBinaries) {
    const std::string cmd = std::string("'") + bin + "' --gtest_filter='*Property.*' >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    if (!ok) ++failed;
    std::string name = bin;
    name = name.substr(name.find_last_of('/') + 1);
    detail += Format(" %s:%s", name.c_str(), ok ? "ok" : "FAILED");
  }
  return {failed == 0, Format("%d cases per property;%s", oracle::kPropertyCases, detail.c_str())};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // <= 0: no time limit
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "exact-delta oracle parity", kParityLimitS, ExactDeltaParity},
      {2, "rank-1 vs exact novelty", kRankLimitS, RankOneVersusExact},
      {3, "global estimate error order", kErrorOrderLimitS, ErrorOrder},
      {4, "class-size scaling", kScalingLimitS, ClassSizeScaling},
      {5, "metric oracles", kMetricLimitS, MetricOracles},
      {6, "data efficiency", kEfficiencyLimitS, DataEfficiency},
      {7, "top-K aggregation benefit", kAggregationLimitS, AggregationBenefit},
      {8, "invariant suite", 0.0, InvariantSuite},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s <= 0 || secs < c.limit_s;
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::string timing = c.limit_s > 0 ? Format("%.2f s, limit %g s", secs, c.limit_s)
                                       : Format("%.2f s", secs);
    std::printf("%s criterion %d (%s): %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
