#pragma once

// Logit- and embedding-space baselines: MSP, GEN, cosine and Mahalanobis
// class novelty, RMDS++ and KNN.

#include <span>

#include "vns/fitting.hpp"
#include "vns/scorer.hpp"

namespace vns {

// max_c p_c. An ID confidence, not a novelty.
double msp_score(std::span<const double> probs);

// sum over the top-K classes of p^gamma (1 - p)^gamma.
double gen_score(std::span<const double> probs, double gamma, int k_top);

// sum_{c in T_K} p_c^gamma (1 - h.mu_c/|mu_c|) - g (1 - h.mu/|mu|)
double cosine_novelty(const FittedDetector& fitted, std::span<const double> probs,
                      const VectorRef& h, const DetectorConfig& cfg);

// Cholesky factors of the regularized shared and global covariances.
class MahalanobisModel {
 public:
  // Throws kConfigError when the detector was fitted without baseline stats
  // and kSingularCovariance when a factorization fails.
  explicit MahalanobisModel(const FittedDetector& fitted);
  MahalanobisModel(const Matrix& shared_covariance, const Matrix& global_covariance);

  // (h - mu)^T Sigma^{-1} (h - mu)
  double shared_distance(const VectorRef& h, const VectorRef& mu) const;
  double global_distance(const VectorRef& h, const VectorRef& mu) const;

 private:
  Eigen::LLT<Matrix> shared_;
  Eigen::LLT<Matrix> global_;
};

// sum_{c in T_K} p_c^gamma d(h, mu_c) - g d_g(h, mu)
double maha_novelty(const FittedDetector& fitted, const MahalanobisModel& maha,
                    std::span<const double> probs, const VectorRef& h,
                    const DetectorConfig& cfg);

// min_c [d(h, mu_c) - d_g(h, mu_g)]
double rmdspp_score(const FittedDetector& fitted, const MahalanobisModel& maha,
                    const VectorRef& h);

// Euclidean distance from h to its k-th nearest training row (both
// normalized). Brute force.
double knn_novelty(const FeatureMatrix& train, const VectorRef& h, int k);

}  // namespace vns
