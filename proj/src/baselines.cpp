#include "vns/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vns/error.hpp"

namespace vns {
namespace {

constexpr const char* kModule = "baselines";

Eigen::LLT<Matrix> Factor(const Matrix& cov, const char* which) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance, kModule,
                std::string(which) + " covariance is not positive definite");
  }
  return llt;
}

double Quadratic(const Eigen::LLT<Matrix>& llt, const VectorRef& h, const VectorRef& mu) {
  // |L^{-1}(h - mu)|^2 == (h - mu)^T Sigma^{-1} (h - mu)
  const Vector diff = h - mu;
  return llt.matrixL().solve(diff).squaredNorm();
}

double CosineDistance(const VectorRef& h, const VectorRef& mu, int class_id) {
  const double norm = mu.norm();
  if (!(norm > kZeroRowNorm)) {
    throw Error(ErrorCode::kDegenerateMean, kModule,
                class_id < 0 ? "global mean" : "class " + std::to_string(class_id));
  }
  return 1.0 - h.dot(mu) / norm;
}

}  // namespace

double msp_score(std::span<const double> probs) {
  if (probs.empty()) throw Error(ErrorCode::kEmptyInput, kModule, "empty probabilities");
  return *std::max_element(probs.begin(), probs.end());
}

double gen_score(std::span<const double> probs, double gamma, int k_top) {
  if (k_top < 1 || k_top > static_cast<int>(probs.size())) {
    throw Error(ErrorCode::kConfigError, kModule, "K=" + std::to_string(k_top));
  }
  if (!(gamma >= 0.0)) throw Error(ErrorCode::kConfigError, kModule, "gamma < 0");
  double s = 0.0;
  for (int c : top_k_classes(probs, k_top)) {
    const double p = probs[static_cast<size_t>(c)];
    s += std::pow(p, gamma) * std::pow(1.0 - p, gamma);
  }
  return s;
}

double cosine_novelty(const FittedDetector& fitted, std::span<const double> probs,
                      const VectorRef& h, const DetectorConfig& cfg) {
  validate_config(cfg, fitted.class_count());
  double s = 0.0;
  for (int c : top_k_classes(probs, cfg.k_top)) {
    s += std::pow(probs[static_cast<size_t>(c)], cfg.gamma) *
         CosineDistance(h, fitted.class_models[static_cast<size_t>(c)].mean, c);
  }
  if (cfg.use_global) s -= CosineDistance(h, fitted.global_model.mean, -1);
  return s;
}

MahalanobisModel::MahalanobisModel(const FittedDetector& fitted) {
  const GlobalModel& g = fitted.global_model;
  if (!g.shared_covariance || !g.global_covariance) {
    throw Error(ErrorCode::kConfigError, kModule,
                "detector was fitted without baseline statistics");
  }
  shared_ = Factor(*g.shared_covariance, "shared");
  global_ = Factor(*g.global_covariance, "global");
}

MahalanobisModel::MahalanobisModel(const Matrix& shared_covariance,
                                   const Matrix& global_covariance)
    : shared_(Factor(shared_covariance, "shared")),
      global_(Factor(global_covariance, "global")) {}

double MahalanobisModel::shared_distance(const VectorRef& h, const VectorRef& mu) const {
  return Quadratic(shared_, h, mu);
}

double MahalanobisModel::global_distance(const VectorRef& h, const VectorRef& mu) const {
  return Quadratic(global_, h, mu);
}

double maha_novelty(const FittedDetector& fitted, const MahalanobisModel& maha,
                    std::span<const double> probs, const VectorRef& h,
                    const DetectorConfig& cfg) {
  validate_config(cfg, fitted.class_count());
  double s = 0.0;
  for (int c : top_k_classes(probs, cfg.k_top)) {
    s += std::pow(probs[static_cast<size_t>(c)], cfg.gamma) *
         maha.shared_distance(h, fitted.class_models[static_cast<size_t>(c)].mean);
  }
  if (cfg.use_global) s -= maha.global_distance(h, fitted.global_model.mean);
  return s;
}

double rmdspp_score(const FittedDetector& fitted, const MahalanobisModel& maha,
                    const VectorRef& h) {
  const double background = maha.global_distance(h, fitted.global_model.mean);
  double best = std::numeric_limits<double>::infinity();
  for (const ClassSpectralModel& m : fitted.class_models) {
    best = std::min(best, maha.shared_distance(h, m.mean) - background);
  }
  return best;
}

double knn_novelty(const FeatureMatrix& train, const VectorRef& h, int k) {
  if (k < 1 || k > train.rows()) {
    throw Error(ErrorCode::kConfigError, kModule,
                "k=" + std::to_string(k) + " with " + std::to_string(train.rows()) +
                    " training rows");
  }
  const double hn = h.norm();
  if (!(hn > kZeroRowNorm)) throw Error(ErrorCode::kZeroRow, kModule, "query");
  const Vector q = h / hn;
  std::vector<double> dist(static_cast<size_t>(train.rows()));
  for (Index i = 0; i < train.rows(); ++i) {
    const auto row = train.row(i);
    const double rn = train.normalized() ? 1.0 : row.norm();
    dist[static_cast<size_t>(i)] = (row.transpose() / rn - q).squaredNorm();
  }
  const auto kth = dist.begin() + (k - 1);
  std::nth_element(dist.begin(), kth, dist.end());
  return std::sqrt(*kth);
}

}  // namespace vns
