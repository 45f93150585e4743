#pragma once

// Desk-scale stand-in for an image benchmark: tight clusters on the unit
// sphere as ID classes, noise and held-out clusters as OOD, and logits from
// scaled cosine similarity to the ID cluster centers.

#include <cstdint>
#include <vector>

#include "vns/dataset.hpp"
#include "vns/detectors.hpp"
#include "vns/metrics.hpp"

namespace vns {

inline constexpr double kPi = 3.14159265358979323846;

struct SyntheticSpec {
  int classes = 10;
  Index dim = 32;
  Index per_class = 500;       // training rows per class
  Index test_per_class = 100;  // ID test rows per class
  Index val_per_class = 20;    // validation ID rows drawn from the training split
  // Rows are normalize(center + z / sqrt(concentration * dim)), z ~ N(0, I),
  // so the expected noise norm is about 1 / sqrt(concentration).
  double concentration = 10.0;
  double beta = 25.0;  // logit_c = beta * cos(x, center_c)
  // Angle (radians) between each near-OOD center and the ID center it is
  // derived from.
  double near_angle = 0.3;
  std::uint64_t seed = 0;
};

struct SyntheticBenchmark {
  RowMatrix centers;      // classes x dim, unit rows
  EmbeddingDataset train;
  EmbeddingDataset val_id;
  EmbeddingDataset val_ood;   // isotropic Gaussian noise
  EmbeddingDataset test_id;
  EmbeddingDataset test_far;  // uniform on the sphere
  EmbeddingDataset test_near; // clusters around unseen centers near ID ones
};

SyntheticBenchmark make_synthetic_benchmark(const SyntheticSpec& spec);

// Synthetic logits beta * X * centers^T for unit rows of x.
RowMatrix cosine_logits(const RowMatrix& x, const RowMatrix& centers, double beta);

struct BenchOptions {
  int rank = 1;
  std::vector<DetectorKind> detectors = all_detectors();
  int knn_k = kDefaultKnnK;
  double tpr = 0.95;
  double fit_fraction = 1.0;  // per-class subsample of the training split
  std::uint64_t subsample_seed = 0;
};

struct BenchRow {
  EvalReport report;
  DetectorConfig config;
};

// fit -> tune on (val_id, val_ood) -> score -> evaluate, for each detector
// against the far and near OOD sets.
std::vector<BenchRow> run_benchmark(const SyntheticBenchmark& bench, const BenchOptions& opts);

inline constexpr const char* kBenchHeader =
    "detector,dataset,auroc,fpr95,threshold,n_id,n_ood,K,gamma,g";

std::string bench_table_csv(const std::vector<BenchRow>& rows);

}  // namespace vns
