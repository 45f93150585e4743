#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vns/dataset.hpp"
#include "vns/spectral.hpp"

namespace vns {

inline constexpr double kCovarianceRidge = 1e-6;

// Top-r eigenpairs of a class density matrix X_c^T X_c / N_c plus the class
// mean (used by the cosine and Mahalanobis baselines).
struct ClassSpectralModel {
  int class_id = 0;
  Index n_c = 0;
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // D x r
  Vector mean;

  double top_eigenvalue() const { return eigenvalues.front(); }
  auto top_eigenvector() const { return eigenvectors.col(0); }
};

struct GlobalModel {
  Index n = 0;
  double lambda_max = 0.0;
  Vector u_max;
  Vector mean;
  std::optional<Matrix> shared_covariance;  // within-class, ridge added
  std::optional<Matrix> global_covariance;  // about the global mean, ridge added
};

struct FittedDetector {
  std::vector<ClassSpectralModel> class_models;
  GlobalModel global_model;
  Index dim = 0;
  int rank = 1;
  // Normalized training rows, retained only for the KNN baseline.
  std::optional<FeatureMatrix> train_features;

  int class_count() const { return static_cast<int>(class_models.size()); }
};

struct FitOptions {
  int rank = 1;
  bool with_baselines = false;  // covariances + retained training rows
  PowerIterationOptions power;
};

FittedDetector fit_detector(const EmbeddingDataset& data, int rank);
FittedDetector fit_detector(const EmbeddingDataset& data, const FitOptions& opts);

struct CovarianceStats {
  Matrix shared_covariance;
  Matrix global_covariance;
};

// Shared within-class covariance sum_c sum_{y_i=c} (h_i - mu_c)(h_i - mu_c)^T / N
// and the global covariance about mu, each plus ridge * I. Features are
// normalized first when needed.
CovarianceStats fit_baseline_stats(const EmbeddingDataset& data,
                                   double ridge = kCovarianceRidge);

// Keeps ceil(fraction * N_c) rows of every class (at least one), drawn
// uniformly without replacement; retained rows keep their original order.
EmbeddingDataset subsample_per_class(const EmbeddingDataset& data, double fraction,
                                     std::uint64_t seed);

// Row indices of each class; throws kMissingLabels on absent or -1 labels.
std::vector<std::vector<Index>> class_row_indices(const EmbeddingDataset& data);

}  // namespace vns
