#pragma once

// Vendi Novelty Score: class-conditional VS2 novelty, probability-weighted
// top-K aggregation and the first-order VS-infinity global correction.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vns/dataset.hpp"
#include "vns/fitting.hpp"

namespace vns {

using VectorRef = Eigen::Ref<const Vector>;

struct DetectorConfig {
  int k_top = 1;
  double gamma = 1.0;
  bool use_global = false;
  int rank = 1;
};

// vns[i] == local[i] - g * global_corr[i].
struct ScoreBatch {
  std::vector<double> vns;
  std::vector<double> local;
  std::vector<double> global_corr;
  // (class, delta) for the top-K classes of each sample, when requested.
  std::optional<std::vector<std::vector<std::pair<int, double>>>> per_class_delta;
};

std::vector<double> softmax(std::span<const double> logits);

// (u^T h)^2
double alignment(const VectorRef& u, const VectorRef& h);

// Closed-form rank-1 novelty for a class of n_c samples whose density matrix
// has top eigenvalue lambda, at squared alignment alpha:
//   -log((n^2 l^2 + 2 n l a + 1) / (n + 1)^2) + log(l^2)
// evaluated as 2 log1p(1/n) - log1p(2a/(n l) + 1/(n l)^2).
double class_delta_rank1(double n_c, double lambda, double alpha);
double class_delta_rank1(const ClassSpectralModel& model, const VectorRef& h);

// Same trace update using every retained eigenpair of the model:
//   S = sum l_i^2, T = sum l_i a_i,
//   delta = 2 log1p(1/n) - log1p(2T/(nS) + 1/(n^2 S)).
// Equals class_delta_rank1 for rank-1 models and class_delta_exact for
// full-rank ones.
double class_delta(const ClassSpectralModel& model, const VectorRef& h);

// log VS2(rho') - log VS2(rho) from the full spectrum of rho_c.
double class_delta_exact(const EigenSpectrum& spectrum, Index n_c, const VectorRef& h);

// Indices of the k largest probabilities; ties go to the lower class index.
std::vector<int> top_k_classes(std::span<const double> probs, int k);

double local_score(const FittedDetector& fitted, std::span<const double> probs,
                   const VectorRef& h, const DetectorConfig& cfg);

// n-scaled first-order change in log VS-infinity:
//   -n log((n lambda + alpha) / (n + 1)) + n log(lambda), alpha = (u^T h)^2.
double global_score(double n, double lambda_max, double alpha);
double global_score(const GlobalModel& gm, const VectorRef& h);

// Scores every row of `data` (features normalized here, logits softmaxed).
// Larger VNS means more novel; ID confidence is -VNS.
ScoreBatch vns_score(const FittedDetector& fitted, const EmbeddingDataset& data,
                     const DetectorConfig& cfg, bool keep_class_deltas = false);

// Shared argument checks for scorers that aggregate over top-K classes.
void validate_config(const DetectorConfig& cfg, int class_count);

// Normalized features of a scoring set after shape and logits checks.
FeatureMatrix scoring_features(const EmbeddingDataset& data, Index expected_dim,
                               int expected_classes, bool need_logits);

}  // namespace vns
