#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vns/spectral.hpp"

namespace vns {

inline constexpr int kUnlabeled = -1;

// N x D features with optional labels (kUnlabeled allowed) and N x C logits.
struct EmbeddingDataset {
  FeatureMatrix features;
  std::optional<std::vector<int>> labels;
  std::optional<RowMatrix> logits;
  int class_count = 0;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  // Throws kDimensionMismatch / kLabelOutOfRange / kConfigError on a
  // structurally inconsistent dataset.
  void Validate() const;

  // Rows in the given order; labels and logits follow.
  EmbeddingDataset Subset(std::span<const Index> rows) const;
};

}  // namespace vns
