#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "vns/dataset.hpp"
#include "vns/fitting.hpp"
#include "vns/scorer.hpp"

namespace vns {

enum class DetectorKind { kVns, kMsp, kGen, kCosine, kMaha, kRmdsPlusPlus, kKnn };

inline constexpr int kDefaultKnnK = 50;

std::string_view detector_name(DetectorKind kind);
std::optional<DetectorKind> parse_detector(std::string_view name);
const std::vector<DetectorKind>& all_detectors();

// MSP reports a confidence; everything else is novelty-style.
bool is_novelty_style(DetectorKind kind);
// Which of (K, gamma, g) the tuner sweeps for this detector.
bool tunes_k_gamma(DetectorKind kind);
bool tunes_global(DetectorKind kind);
// MAHA, RMDS++ and KNN read statistics produced by fit(..., with_baselines).
bool needs_baseline_stats(DetectorKind kind);

struct DetectorScores {
  std::vector<double> score;       // detector's native output
  std::vector<double> confidence;  // ID confidence: -score for novelty-style
};

DetectorScores score_detector(DetectorKind kind, const FittedDetector& fitted,
                              const EmbeddingDataset& data, const DetectorConfig& cfg,
                              int knn_k = kDefaultKnnK);

}  // namespace vns
