#pragma once

#include <string>
#include <vector>

#include "vns/dataset.hpp"
#include "vns/detectors.hpp"
#include "vns/fitting.hpp"
#include "vns/metrics.hpp"
#include "vns/scorer.hpp"

namespace vns {

// {C/100, C/40, C/20, C/10}, rounded half-up, clamped to [1, C], deduplicated.
std::vector<int> k_grid(int class_count);

// {0.1, 0.5, 1, 2}
std::vector<double> gamma_grid();

struct TuneRow {
  DetectorConfig config;
  EvalReport report;
};

struct TuneResult {
  DetectorConfig best;
  std::vector<TuneRow> table;  // empty for detectors without parameters
};

// Grid search maximizing validation AUROC (ID confidence = -score for
// novelty-style detectors). Ties keep the smaller K, then the smaller gamma,
// then g = 0.
TuneResult tune(const FittedDetector& fitted, const EmbeddingDataset& val_id,
                const EmbeddingDataset& val_ood, DetectorKind kind,
                int knn_k = kDefaultKnnK);

inline constexpr const char* kTuneTableHeader =
    "detector,dataset,auroc,fpr95,threshold,n_id,n_ood,K,gamma,g";

std::string tune_table_csv(const TuneResult& result);

}  // namespace vns
