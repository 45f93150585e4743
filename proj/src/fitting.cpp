#include "vns/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vns/error.hpp"
#include "vns/parallel.hpp"

namespace vns {
namespace {

constexpr const char* kModule = "fitting";

// Above this dimension a rank-1 fit never forms the D x D density matrix.
constexpr Index kMatrixFreeDim = 256;

FeatureMatrix NormalizedFeatures(const EmbeddingDataset& data) {
  return data.features.normalized() ? data.features
                                    : l2_normalize_rows(data.features);
}

// Top-r spectrum of X^T X / n for the given rows of x.
EigenSpectrum RowSpectrum(const RowMatrix& x, int rank,
                          const PowerIterationOptions& opts) {
  const Index d = x.cols();
  const double n = static_cast<double>(x.rows());
  Vector start = x.colwise().mean().transpose();
  if (rank == 1 && d > kMatrixFreeDim) {
    Vector tmp(x.rows());
    return top_eigenpairs(
        [&x, &tmp, n](const Vector& in, Vector& out) {
          tmp.noalias() = x * in;
          out.noalias() = x.transpose() * tmp;
          out /= n;
        },
        d, rank, start, opts);
  }
  Matrix rho = x.transpose() * x;
  rho /= n;
  rho = 0.5 * (rho + rho.transpose()).eval();
  return top_eigenpairs(
      [&rho](const Vector& in, Vector& out) { out.noalias() = rho * in; }, d,
      rank, start, opts);
}

RowMatrix GatherRows(const FeatureMatrix& x, const std::vector<Index>& rows) {
  RowMatrix out(static_cast<Index>(rows.size()), x.cols());
  for (size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = x.row(rows[k]);
  return out;
}

}  // namespace

std::vector<std::vector<Index>> class_row_indices(const EmbeddingDataset& data) {
  if (!data.labels) {
    throw Error(ErrorCode::kMissingLabels, kModule, "dataset has no labels");
  }
  data.Validate();
  std::vector<std::vector<Index>> rows(static_cast<size_t>(data.class_count));
  for (size_t i = 0; i < data.labels->size(); ++i) {
    const int y = (*data.labels)[i];
    if (y == kUnlabeled) {
      throw Error(ErrorCode::kMissingLabels, kModule,
                  "row " + std::to_string(i) + " is unlabeled");
    }
    rows[static_cast<size_t>(y)].push_back(static_cast<Index>(i));
  }
  return rows;
}

FittedDetector fit_detector(const EmbeddingDataset& data, int rank) {
  FitOptions opts;
  opts.rank = rank;
  return fit_detector(data, opts);
}

FittedDetector fit_detector(const EmbeddingDataset& data, const FitOptions& opts) {
  const auto by_class = class_row_indices(data);
  if (data.class_count < 1) {
    throw Error(ErrorCode::kConfigError, kModule, "class_count must be >= 1");
  }
  for (size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) {
      throw Error(ErrorCode::kEmptyClass, kModule, "class " + std::to_string(c));
    }
  }
  if (opts.rank < 1 || opts.rank > data.dim()) {
    throw Error(ErrorCode::kConfigError, kModule,
                "rank " + std::to_string(opts.rank) + " outside [1, D]");
  }

  const FeatureMatrix x = NormalizedFeatures(data);
  FittedDetector out;
  out.dim = x.cols();
  out.rank = opts.rank;
  out.class_models.resize(by_class.size());

  ParallelFor(by_class.size(), [&](std::size_t c) {
    const RowMatrix xc = GatherRows(x, by_class[c]);
    EigenSpectrum s = RowSpectrum(xc, opts.rank, opts.power);
    ClassSpectralModel& m = out.class_models[c];
    m.class_id = static_cast<int>(c);
    m.n_c = xc.rows();
    m.eigenvalues = std::move(s.eigenvalues);
    // Tail eigenvalues of rank-deficient classes can land a hair below zero.
    for (double& l : m.eigenvalues) l = std::max(l, 0.0);
    m.eigenvectors = std::move(s.eigenvectors);
    m.mean = xc.colwise().mean().transpose();
  });

  GlobalModel& g = out.global_model;
  g.n = x.rows();
  EigenSpectrum top = RowSpectrum(x.data(), 1, opts.power);
  g.lambda_max = top.eigenvalues.front();
  g.u_max = top.eigenvectors.col(0);
  g.mean = x.data().colwise().mean().transpose();

  if (opts.with_baselines) {
    CovarianceStats stats = fit_baseline_stats(data);
    g.shared_covariance = std::move(stats.shared_covariance);
    g.global_covariance = std::move(stats.global_covariance);
    out.train_features = x;
  }
  return out;
}

CovarianceStats fit_baseline_stats(const EmbeddingDataset& data, double ridge) {
  const auto by_class = class_row_indices(data);
  for (size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) {
      throw Error(ErrorCode::kEmptyClass, kModule, "class " + std::to_string(c));
    }
  }
  const FeatureMatrix x = NormalizedFeatures(data);
  const Index d = x.cols();
  const double n = static_cast<double>(x.rows());

  Matrix shared = Matrix::Zero(d, d);
  for (const auto& rows : by_class) {
    RowMatrix xc = GatherRows(x, rows);
    const Eigen::RowVectorXd mu = xc.colwise().mean();
    xc.rowwise() -= mu;
    shared.noalias() += xc.transpose() * xc;
  }
  shared /= n;

  RowMatrix centered = x.data();
  centered.rowwise() -= x.data().colwise().mean();
  Matrix global = centered.transpose() * centered;
  global /= n;

  CovarianceStats out;
  out.shared_covariance = 0.5 * (shared + shared.transpose());
  out.global_covariance = 0.5 * (global + global.transpose());
  out.shared_covariance.diagonal().array() += ridge;
  out.global_covariance.diagonal().array() += ridge;
  return out;
}

EmbeddingDataset subsample_per_class(const EmbeddingDataset& data, double fraction,
                                     std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorCode::kConfigError, kModule,
                "fraction " + std::to_string(fraction) + " outside (0, 1]");
  }
  const auto by_class = class_row_indices(data);
  std::mt19937_64 rng(seed);
  std::vector<Index> keep;
  for (const auto& rows : by_class) {
    if (rows.empty()) continue;
    const double want = std::ceil(fraction * static_cast<double>(rows.size()) - 1e-9);
    const size_t count = std::clamp<size_t>(static_cast<size_t>(want), 1, rows.size());
    if (count == rows.size()) {
      keep.insert(keep.end(), rows.begin(), rows.end());
      continue;
    }
    std::vector<Index> pool = rows;
    std::shuffle(pool.begin(), pool.end(), rng);
    keep.insert(keep.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
  }
  std::sort(keep.begin(), keep.end());
  return data.Subset(keep);
}

}  // namespace vns
