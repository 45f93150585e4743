#include "vns/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vns/error.hpp"
#include "vns/parallel.hpp"

namespace vns {

std::vector<int> k_grid(int class_count) {
  if (class_count < 1) {
    throw Error(ErrorCode::kConfigError, "tuning", "class_count must be >= 1");
  }
  std::vector<int> out;
  for (double divisor : {100.0, 40.0, 20.0, 10.0}) {
    const double k = std::floor(static_cast<double>(class_count) / divisor + 0.5);
    out.push_back(std::clamp(static_cast<int>(k), 1, class_count));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> gamma_grid() { return {0.1, 0.5, 1.0, 2.0}; }

TuneResult tune(const FittedDetector& fitted, const EmbeddingDataset& val_id,
                const EmbeddingDataset& val_ood, DetectorKind kind, int knn_k) {
  if (val_id.size() < 1 || val_ood.size() < 1) {
    throw Error(ErrorCode::kEmptyInput, "tuning", "empty validation set");
  }
  TuneResult result;
  result.best.rank = fitted.rank;
  if (!tunes_k_gamma(kind)) return result;

  std::vector<DetectorConfig> grid;
  for (int k : k_grid(fitted.class_count())) {
    for (double gamma : gamma_grid()) {
      for (int g = 0; g <= (tunes_global(kind) ? 1 : 0); ++g) {
        grid.push_back({k, gamma, g == 1, fitted.rank});
      }
    }
  }

  result.table.resize(grid.size());
  ParallelFor(grid.size(), [&](size_t i) {
    const DetectorScores id = score_detector(kind, fitted, val_id, grid[i], knn_k);
    const DetectorScores ood = score_detector(kind, fitted, val_ood, grid[i], knn_k);
    result.table[i].config = grid[i];
    result.table[i].report = evaluate(id.confidence, ood.confidence,
                                      std::string(detector_name(kind)), "validation");
  });

  // The grid is ordered by (K, gamma, g), so the first maximum wins ties.
  size_t best = 0;
  for (size_t i = 1; i < result.table.size(); ++i) {
    if (result.table[i].report.auroc > result.table[best].report.auroc) best = i;
  }
  result.best = result.table[best].config;
  return result;
}

std::string tune_table_csv(const TuneResult& result) {
  std::ostringstream os;
  os << kTuneTableHeader << '\n';
  for (const TuneRow& row : result.table) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), ",%d,%g,%d", row.config.k_top, row.config.gamma,
                  row.config.use_global ? 1 : 0);
    os << report_row(row.report) << buf << '\n';
  }
  return os.str();
}

}  // namespace vns
