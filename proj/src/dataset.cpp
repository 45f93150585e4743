#include "vns/dataset.hpp"

#include <string>

#include "vns/error.hpp"

namespace vns {

void EmbeddingDataset::Validate() const {
  const Index n = size();
  if (labels) {
    if (static_cast<Index>(labels->size()) != n) {
      throw Error(ErrorCode::kDimensionMismatch, "dataset",
                  "label count " + std::to_string(labels->size()) +
                      " != rows " + std::to_string(n));
    }
    for (size_t i = 0; i < labels->size(); ++i) {
      const int y = (*labels)[i];
      if (y < kUnlabeled || y >= class_count) {
        throw Error(ErrorCode::kLabelOutOfRange, "dataset",
                    "row " + std::to_string(i) + " label " + std::to_string(y) +
                        " with class_count " + std::to_string(class_count));
      }
    }
  }
  if (logits) {
    if (class_count < 1) {
      throw Error(ErrorCode::kConfigError, "dataset", "logits require class_count >= 1");
    }
    if (logits->rows() != n || logits->cols() != class_count) {
      throw Error(ErrorCode::kDimensionMismatch, "dataset",
                  "logits shape " + std::to_string(logits->rows()) + "x" +
                      std::to_string(logits->cols()) + " vs " + std::to_string(n) +
                      "x" + std::to_string(class_count));
    }
  }
}

EmbeddingDataset EmbeddingDataset::Subset(std::span<const Index> rows) const {
  RowMatrix feats(static_cast<Index>(rows.size()), dim());
  for (size_t k = 0; k < rows.size(); ++k) feats.row(static_cast<Index>(k)) = features.row(rows[k]);
  EmbeddingDataset out;
  out.features = FeatureMatrix(std::move(feats), features.normalized());
  out.class_count = class_count;
  if (labels) {
    out.labels.emplace();
    out.labels->reserve(rows.size());
    for (Index r : rows) out.labels->push_back((*labels)[static_cast<size_t>(r)]);
  }
  if (logits) {
    RowMatrix l(static_cast<Index>(rows.size()), logits->cols());
    for (size_t k = 0; k < rows.size(); ++k) l.row(static_cast<Index>(k)) = logits->row(rows[k]);
    out.logits = std::move(l);
  }
  return out;
}

}  // namespace vns
