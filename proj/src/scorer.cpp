#include "vns/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vns/error.hpp"
#include "vns/parallel.hpp"

namespace vns {
namespace {

constexpr const char* kModule = "vns_scorer";

double TraceDelta(double n, double sum_sq, double weighted_alignment) {
  return 2.0 * std::log1p(1.0 / n) -
         std::log1p(2.0 * weighted_alignment / (n * sum_sq) + 1.0 / (n * n * sum_sq));
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule, "empty logit row");
  }
  for (double z : logits) {
    if (!std::isfinite(z)) throw Error(ErrorCode::kNonFiniteLogit, kModule, "");
  }
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - zmax);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double alignment(const VectorRef& u, const VectorRef& h) {
  const double dot = u.dot(h);
  return dot * dot;
}

double class_delta_rank1(double n_c, double lambda, double alpha) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kDegenerateModel, kModule,
                "top eigenvalue " + std::to_string(lambda) + " <= 0");
  }
  return TraceDelta(n_c, lambda * lambda, lambda * alpha);
}

double class_delta_rank1(const ClassSpectralModel& model, const VectorRef& h) {
  if (model.eigenvalues.empty()) {
    throw Error(ErrorCode::kDegenerateModel, kModule, "class model has no eigenpairs");
  }
  return class_delta_rank1(static_cast<double>(model.n_c), model.top_eigenvalue(),
                           alignment(model.top_eigenvector(), h));
}

double class_delta(const ClassSpectralModel& model, const VectorRef& h) {
  if (model.eigenvalues.empty() || !(model.eigenvalues.front() > 0.0)) {
    throw Error(ErrorCode::kDegenerateModel, kModule,
                "class " + std::to_string(model.class_id));
  }
  double sum_sq = 0.0;
  double weighted = 0.0;
  for (size_t i = 0; i < model.eigenvalues.size(); ++i) {
    const double l = model.eigenvalues[i];
    sum_sq += l * l;
    weighted += l * alignment(model.eigenvectors.col(static_cast<Index>(i)), h);
  }
  return TraceDelta(static_cast<double>(model.n_c), sum_sq, weighted);
}

double class_delta_exact(const EigenSpectrum& spectrum, Index n_c, const VectorRef& h) {
  const double total =
      std::accumulate(spectrum.eigenvalues.begin(), spectrum.eigenvalues.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) {
    throw Error(ErrorCode::kIncompleteSpectrum, kModule,
                "eigenvalues sum to " + std::to_string(total));
  }
  double sum_sq = 0.0;
  double weighted = 0.0;
  for (Index i = 0; i < spectrum.rank(); ++i) {
    const double l = spectrum.eigenvalues[static_cast<size_t>(i)];
    sum_sq += l * l;
    weighted += l * alignment(spectrum.eigenvectors.col(i), h);
  }
  return TraceDelta(static_cast<double>(n_c), sum_sq, weighted);
}

std::vector<int> top_k_classes(std::span<const double> probs, int k) {
  std::vector<int> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto kk = static_cast<std::ptrdiff_t>(std::min<size_t>(static_cast<size_t>(k), probs.size()));
  std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(), [&](int a, int b) {
    if (probs[static_cast<size_t>(a)] != probs[static_cast<size_t>(b)]) {
      return probs[static_cast<size_t>(a)] > probs[static_cast<size_t>(b)];
    }
    return a < b;
  });
  idx.resize(static_cast<size_t>(kk));
  return idx;
}

void validate_config(const DetectorConfig& cfg, int class_count) {
  if (cfg.k_top < 1 || cfg.k_top > class_count) {
    throw Error(ErrorCode::kConfigError, kModule,
                "K=" + std::to_string(cfg.k_top) + " outside [1, " +
                    std::to_string(class_count) + "]");
  }
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) {
    throw Error(ErrorCode::kConfigError, kModule, "gamma must be finite and >= 0");
  }
}

double local_score(const FittedDetector& fitted, std::span<const double> probs,
                   const VectorRef& h, const DetectorConfig& cfg) {
  validate_config(cfg, fitted.class_count());
  if (static_cast<int>(probs.size()) != fitted.class_count()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "probability vector length");
  }
  double s = 0.0;
  for (int c : top_k_classes(probs, cfg.k_top)) {
    const ClassSpectralModel& m = fitted.class_models[static_cast<size_t>(c)];
    s += static_cast<double>(m.n_c) * std::pow(probs[static_cast<size_t>(c)], cfg.gamma) *
         class_delta(m, h);
  }
  return s;
}

double global_score(double n, double lambda_max, double alpha) {
  if (!(lambda_max > 0.0)) {
    throw Error(ErrorCode::kDegenerateModel, kModule,
                "global lambda_max " + std::to_string(lambda_max) + " <= 0");
  }
  // n * (log1p(1/n) - log1p(alpha / (n lambda))), the same quantity as the
  // log-ratio form but without cancellation at large n.
  return n * (std::log1p(1.0 / n) - std::log1p(alpha / (n * lambda_max)));
}

double global_score(const GlobalModel& gm, const VectorRef& h) {
  return global_score(static_cast<double>(gm.n), gm.lambda_max, alignment(gm.u_max, h));
}

FeatureMatrix scoring_features(const EmbeddingDataset& data, Index expected_dim,
                               int expected_classes, bool need_logits) {
  if (data.dim() != expected_dim) {
    throw Error(ErrorCode::kDimensionMismatch, kModule,
                "data dim " + std::to_string(data.dim()) + " vs fitted " +
                    std::to_string(expected_dim));
  }
  if (need_logits) {
    if (!data.logits) throw Error(ErrorCode::kMissingLogits, kModule, "");
    if (data.logits->cols() != expected_classes) {
      throw Error(ErrorCode::kDimensionMismatch, kModule,
                  "logit columns " + std::to_string(data.logits->cols()) + " vs " +
                      std::to_string(expected_classes) + " classes");
    }
  }
  return data.features.normalized() ? data.features : l2_normalize_rows(data.features);
}

ScoreBatch vns_score(const FittedDetector& fitted, const EmbeddingDataset& data,
                     const DetectorConfig& cfg, bool keep_class_deltas) {
  validate_config(cfg, fitted.class_count());
  const FeatureMatrix x =
      scoring_features(data, fitted.dim, fitted.class_count(), /*need_logits=*/true);
  const auto n = static_cast<size_t>(x.rows());

  ScoreBatch out;
  out.vns.assign(n, 0.0);
  out.local.assign(n, 0.0);
  out.global_corr.assign(n, 0.0);
  if (keep_class_deltas) out.per_class_delta.emplace(n);

  ParallelFor(n, [&](size_t i) {
    const auto row = static_cast<Index>(i);
    const Vector h = x.row(row).transpose();
    const Eigen::RowVectorXd z = data.logits->row(row);
    const std::vector<double> p = softmax(std::span<const double>(z.data(), static_cast<size_t>(z.size())));
    out.local[i] = local_score(fitted, p, h, cfg);
    if (cfg.use_global) out.global_corr[i] = global_score(fitted.global_model, h);
    out.vns[i] = out.local[i] - (cfg.use_global ? out.global_corr[i] : 0.0);
    if (keep_class_deltas) {
      auto& slot = (*out.per_class_delta)[i];
      for (int c : top_k_classes(p, cfg.k_top)) {
        slot.emplace_back(c, class_delta(fitted.class_models[static_cast<size_t>(c)], h));
      }
    }
  });
  return out;
}

}  // namespace vns
