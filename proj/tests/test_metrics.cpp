#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support/expect_error.hpp"
#include "support/oracles.hpp"
#include "support/property.hpp"
#include "vns/metrics.hpp"

namespace vns {
namespace {

using oracle::ExpectCode;
using oracle::ForAllCases;
using oracle::Rng;

std::vector<double> RandomScores(Rng& rng, int n, double shift, bool coarse) {
  std::vector<double> v(static_cast<size_t>(n));
  std::normal_distribution<double> normal(shift, 1.0);
  for (double& s : v) {
    s = normal(rng);
    // Coarse scores produce plenty of ties.
    if (coarse) s = std::round(s * 2.0) / 2.0;
  }
  return v;
}

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.1, 0.2}), 1.0);
  EXPECT_EQ(auroc(std::vector<double>{0.5}, std::vector<double>{0.5}), 0.5);
  EXPECT_EQ(auroc(std::vector<double>{0.1}, std::vector<double>{0.5, 0.7}), 0.0);
}

TEST(Auroc, MatchesAllPairsOnRandomScores) {
  Rng rng(81);
  const auto id = RandomScores(rng, 30, 0.7, false);
  const auto ood = RandomScores(rng, 30, 0.0, false);
  EXPECT_NEAR(auroc(id, ood), oracle::AurocAllPairs(id, ood), 1e-12);
}

TEST(Auroc, BadInput) {
  ExpectCode(ErrorCode::kEmptyInput, [] { auroc(std::vector<double>{}, std::vector<double>{1.0}); });
  ExpectCode(ErrorCode::kDomainError, [] { auroc(std::vector<double>{NAN}, std::vector<double>{1.0}); });
}

TEST(FprAtTpr, RankArithmetic) {
  std::vector<double> id(100);
  std::iota(id.begin(), id.end(), 1.0);
  // 95 of 100 must pass, so the threshold is the 95th largest value.
  const FprAtTpr none = fpr_at_tpr(id, std::vector<double>{0.5, 5.9, -3.0}, 0.95);
  EXPECT_EQ(none.threshold, 6.0);
  EXPECT_EQ(none.fpr, 0.0);
  const FprAtTpr some = fpr_at_tpr(id, std::vector<double>{6.0, 50.0, 1.0, 2.0}, 0.95);
  EXPECT_EQ(some.fpr, 0.5);
}

TEST(FprAtTpr, IndistinguishableSets) {
  std::vector<double> id(200);
  std::iota(id.begin(), id.end(), 0.0);
  const FprAtTpr r = fpr_at_tpr(id, id, 0.95);
  EXPECT_NEAR(r.fpr * 200.0, 0.95 * 200.0, 1.0);
}

TEST(FprAtTpr, MatchesThresholdSweep) {
  Rng rng(82);
  const auto id = RandomScores(rng, 57, 1.0, true);
  const auto ood = RandomScores(rng, 43, 0.0, true);
  const auto [fpr, t] = oracle::FprAtTprSweep(id, ood, 0.95);
  const FprAtTpr got = fpr_at_tpr(id, ood, 0.95);
  EXPECT_EQ(got.fpr, fpr);
  EXPECT_EQ(got.threshold, t);
}

TEST(FprAtTpr, BadTpr) {
  ExpectCode(ErrorCode::kDomainError,
             [] { fpr_at_tpr(std::vector<double>{1.0}, std::vector<double>{0.0}, 0.0); });
  ExpectCode(ErrorCode::kDomainError,
             [] { fpr_at_tpr(std::vector<double>{1.0}, std::vector<double>{0.0}, 1.5); });
}

TEST(Evaluate, ReportRow) {
  const EvalReport r = evaluate(std::vector<double>{0.9, 0.8}, std::vector<double>{0.1, 0.85},
                                "vns", "far");
  EXPECT_EQ(r.n_id, 2u);
  EXPECT_EQ(r.n_ood, 2u);
  EXPECT_EQ(report_row(r), "vns,far,0.750000,0.500000,0.80000000000000004,2,2");
  EXPECT_EQ(std::string(kReportHeader), "detector,dataset,auroc,fpr95,threshold,n_id,n_ood");
}

// Properties

TEST(MetricsProperty, AurocMatchesAllPairs) {
  ForAllCases(501, [](Rng& rng, int) {
    const bool coarse = oracle::UniformInt(rng, 0, 1) == 1;
    const auto id = RandomScores(rng, oracle::UniformInt(rng, 1, 80), oracle::Uniform(rng, -1, 2), coarse);
    const auto ood = RandomScores(rng, oracle::UniformInt(rng, 1, 80), 0.0, coarse);
    ASSERT_NEAR(auroc(id, ood), oracle::AurocAllPairs(id, ood), 1e-12);
  });
}

TEST(MetricsProperty, FprMatchesThresholdSweep) {
  ForAllCases(502, [](Rng& rng, int) {
    const bool coarse = oracle::UniformInt(rng, 0, 1) == 1;
    const auto id = RandomScores(rng, oracle::UniformInt(rng, 1, 80), oracle::Uniform(rng, -1, 2), coarse);
    const auto ood = RandomScores(rng, oracle::UniformInt(rng, 1, 80), 0.0, coarse);
    const double tpr = oracle::UniformInt(rng, 0, 1) ? 0.95 : oracle::Uniform(rng, 0.01, 1.0);
    const auto [fpr, t] = oracle::FprAtTprSweep(id, ood, tpr);
    const FprAtTpr got = fpr_at_tpr(id, ood, tpr);
    ASSERT_EQ(got.fpr, fpr);
    ASSERT_EQ(got.threshold, t);
  });
}

TEST(MetricsProperty, AurocInvariantUnderIncreasingMaps) {
  ForAllCases(503, [](Rng& rng, int) {
    const bool coarse = oracle::UniformInt(rng, 0, 1) == 1;
    auto id = RandomScores(rng, oracle::UniformInt(rng, 1, 60), 0.5, coarse);
    auto ood = RandomScores(rng, oracle::UniformInt(rng, 1, 60), 0.0, coarse);
    const double base = auroc(id, ood);
    const double a = oracle::Uniform(rng, 0.1, 10.0), b = oracle::Uniform(rng, -5.0, 5.0);
    auto map = [](std::vector<double> v, auto f) {
      for (double& s : v) s = f(s);
      return v;
    };
    auto ex = [](double s) { return std::exp(s); };
    auto af = [&](double s) { return a * s + b; };
    ASSERT_NEAR(auroc(map(id, ex), map(ood, ex)), base, 1e-12);
    ASSERT_NEAR(auroc(map(id, af), map(ood, af)), base, 1e-12);
  });
}

TEST(MetricsProperty, FprNonIncreasingAsOodShiftsDown) {
  ForAllCases(504, [](Rng& rng, int) {
    const auto id = RandomScores(rng, oracle::UniformInt(rng, 1, 60), 0.5, false);
    auto ood = RandomScores(rng, oracle::UniformInt(rng, 1, 60), 0.0, false);
    double prev = fpr_at_tpr(id, ood, 0.95).fpr;
    for (int step = 0; step < 5; ++step) {
      const double c = oracle::Uniform(rng, 0.0, 1.0);
      for (double& s : ood) s -= c;
      const double cur = fpr_at_tpr(id, ood, 0.95).fpr;
      ASSERT_LE(cur, prev);
      prev = cur;
    }
  });
}

TEST(MetricsProperty, SwappedAurocSumsToOne) {
  ForAllCases(505, [](Rng& rng, int) {
    // Continuous scores: ties have probability zero.
    const auto a = RandomScores(rng, oracle::UniformInt(rng, 1, 60), oracle::Uniform(rng, -1, 1), false);
    const auto b = RandomScores(rng, oracle::UniformInt(rng, 1, 60), 0.0, false);
    ASSERT_NEAR(auroc(a, b) + auroc(b, a), 1.0, 1e-12);
  });
}

}  // namespace
}  // namespace vns
