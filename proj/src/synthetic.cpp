#include "vns/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "vns/error.hpp"
#include "vns/fitting.hpp"
#include "vns/tuning.hpp"

namespace vns {
namespace {

std::mt19937_64 SplitEngine(std::uint64_t seed, std::uint64_t split) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(split)};
  return std::mt19937_64(seq);
}

RowMatrix GaussianRows(Index n, Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = normal(rng);
  }
  return x;
}

void NormalizeRows(RowMatrix& x) {
  for (Index i = 0; i < x.rows(); ++i) x.row(i).normalize();
}

RowMatrix RandomCenters(Index count, Index d, std::mt19937_64& rng) {
  RowMatrix c = GaussianRows(count, d, rng);
  NormalizeRows(c);
  return c;
}

// per_center rows around each center, grouped by center.
RowMatrix ClusterRows(const RowMatrix& centers, Index per_center, double concentration,
                      std::mt19937_64& rng) {
  const Index d = centers.cols();
  const double sigma = 1.0 / std::sqrt(concentration * static_cast<double>(d));
  RowMatrix x = GaussianRows(centers.rows() * per_center, d, rng) * sigma;
  for (Index c = 0; c < centers.rows(); ++c) {
    for (Index k = 0; k < per_center; ++k) x.row(c * per_center + k) += centers.row(c);
  }
  NormalizeRows(x);
  return x;
}

EmbeddingDataset MakeSet(RowMatrix x, const RowMatrix& centers, double beta,
                         std::vector<int> labels) {
  EmbeddingDataset out;
  out.class_count = static_cast<int>(centers.rows());
  out.logits = cosine_logits(x, centers, beta);
  out.features = FeatureMatrix(std::move(x), true);
  if (!labels.empty()) out.labels = std::move(labels);
  return out;
}

std::vector<int> BlockLabels(Index classes, Index per_class) {
  std::vector<int> y;
  y.reserve(static_cast<size_t>(classes * per_class));
  for (Index c = 0; c < classes; ++c) y.insert(y.end(), static_cast<size_t>(per_class), static_cast<int>(c));
  return y;
}

}  // namespace

RowMatrix cosine_logits(const RowMatrix& x, const RowMatrix& centers, double beta) {
  return beta * (x * centers.transpose());
}

SyntheticBenchmark make_synthetic_benchmark(const SyntheticSpec& spec) {
  if (spec.classes < 1 || spec.dim < 2 || spec.per_class < 1 || spec.test_per_class < 1 ||
      spec.val_per_class < 1 || !(spec.concentration > 0.0) ||
      !(spec.near_angle > 0.0 && spec.near_angle <= kPi / 2)) {
    throw Error(ErrorCode::kConfigError, "synthetic", "invalid benchmark shape");
  }
  const Index c = spec.classes;
  const Index d = spec.dim;
  SyntheticBenchmark b;

  auto rng_centers = SplitEngine(spec.seed, 1);
  b.centers = RandomCenters(c, d, rng_centers);
  // Unseen centers, each tilted away from an ID center by near_angle.
  const Index near_classes = std::max<Index>(2, c / 2);
  RowMatrix near_centers = RandomCenters(near_classes, d, rng_centers);
  for (Index k = 0; k < near_classes; ++k) {
    const auto anchor = b.centers.row(k % c);
    Eigen::RowVectorXd perp = near_centers.row(k) - near_centers.row(k).dot(anchor) * anchor;
    perp.normalize();
    near_centers.row(k) = std::cos(spec.near_angle) * anchor + std::sin(spec.near_angle) * perp;
  }

  auto rng_train = SplitEngine(spec.seed, 2);
  b.train = MakeSet(ClusterRows(b.centers, spec.per_class, spec.concentration, rng_train),
                    b.centers, spec.beta, BlockLabels(c, spec.per_class));

  // Validation ID rows come from the training split.
  auto rng_val = SplitEngine(spec.seed, 3);
  std::vector<Index> val_rows;
  const Index val_per_class = std::min(spec.val_per_class, spec.per_class);
  for (Index k = 0; k < c; ++k) {
    std::vector<Index> pool(static_cast<size_t>(spec.per_class));
    for (Index i = 0; i < spec.per_class; ++i) pool[static_cast<size_t>(i)] = k * spec.per_class + i;
    std::shuffle(pool.begin(), pool.end(), rng_val);
    val_rows.insert(val_rows.end(), pool.begin(), pool.begin() + val_per_class);
  }
  std::sort(val_rows.begin(), val_rows.end());
  b.val_id = b.train.Subset(val_rows);

  RowMatrix noise = GaussianRows(static_cast<Index>(val_rows.size()), d, rng_val);
  NormalizeRows(noise);
  b.val_ood = MakeSet(std::move(noise), b.centers, spec.beta, {});

  auto rng_test = SplitEngine(spec.seed, 4);
  b.test_id = MakeSet(ClusterRows(b.centers, spec.test_per_class, spec.concentration, rng_test),
                      b.centers, spec.beta, BlockLabels(c, spec.test_per_class));

  const Index n_ood = c * spec.test_per_class;
  RowMatrix far = GaussianRows(n_ood, d, rng_test);
  NormalizeRows(far);
  b.test_far = MakeSet(std::move(far), b.centers, spec.beta, {});

  const Index near_per = (n_ood + near_classes - 1) / near_classes;
  RowMatrix near = ClusterRows(near_centers, near_per, spec.concentration, rng_test);
  b.test_near = MakeSet(near.topRows(n_ood), b.centers, spec.beta, {});
  return b;
}

std::vector<BenchRow> run_benchmark(const SyntheticBenchmark& bench, const BenchOptions& opts) {
  EmbeddingDataset train = bench.train;
  if (opts.fit_fraction < 1.0) {
    train = subsample_per_class(train, opts.fit_fraction, opts.subsample_seed);
  }
  const bool need_baselines =
      std::any_of(opts.detectors.begin(), opts.detectors.end(), needs_baseline_stats);
  FitOptions fit_opts;
  fit_opts.rank = opts.rank;
  fit_opts.with_baselines = need_baselines;
  const FittedDetector fitted = fit_detector(train, fit_opts);
  const int knn_k = static_cast<int>(std::min<Index>(opts.knn_k, train.size()));

  std::vector<BenchRow> rows;
  for (DetectorKind kind : opts.detectors) {
    const TuneResult tuned = tune(fitted, bench.val_id, bench.val_ood, kind, knn_k);
    const DetectorScores id = score_detector(kind, fitted, bench.test_id, tuned.best, knn_k);
    for (const auto& [name, set] : {std::pair<const char*, const EmbeddingDataset*>{"far", &bench.test_far},
                                    {"near", &bench.test_near}}) {
      const DetectorScores ood = score_detector(kind, fitted, *set, tuned.best, knn_k);
      rows.push_back({evaluate(id.confidence, ood.confidence, std::string(detector_name(kind)),
                               name, opts.tpr),
                      tuned.best});
    }
  }
  return rows;
}

std::string bench_table_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << kBenchHeader << '\n';
  for (const BenchRow& row : rows) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), ",%d,%g,%d", row.config.k_top, row.config.gamma,
                  row.config.use_global ? 1 : 0);
    os << report_row(row.report) << buf << '\n';
  }
  return os.str();
}

}  // namespace vns
