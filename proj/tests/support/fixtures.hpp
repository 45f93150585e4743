#pragma once

// Constructed scenarios where one knob provably changes the ranking.

#include <cmath>

#include "support/oracles.hpp"
#include "vns/dataset.hpp"

namespace vns::oracle {

struct Scenario {
  EmbeddingDataset train;
  EmbeddingDataset id;
  EmbeddingDataset ood;
};

inline EmbeddingDataset MakeSet(RowMatrix x, RowMatrix logits, std::vector<int> labels, int classes) {
  EmbeddingDataset d;
  d.features = FeatureMatrix(std::move(x), true);
  d.logits = std::move(logits);
  if (!labels.empty()) d.labels = std::move(labels);
  d.class_count = classes;
  return d;
}

// Rows normalize(center + noise) with per-axis noise scales.
inline RowMatrix Cloud(Rng& rng, Index n, const Vector& center, const Vector& sigma) {
  RowMatrix x(n, center.size());
  for (Index i = 0; i < n; ++i) {
    Vector v = center + sigma.cwiseProduct(GaussianVector(rng, center.size()));
    x.row(i) = (v / v.norm()).transpose();
  }
  return x;
}

inline RowMatrix ConstantLogits(Index n, std::initializer_list<double> z) {
  RowMatrix l(n, static_cast<Index>(z.size()));
  Index j = 0;
  for (double v : z) l.col(j++).setConstant(v);
  return l;
}

// Class 0: 300 rows tight around e1. Class 1: 100 rows around e2, widely
// spread into e3/e4, so the global top direction is e1 (lambda ~ 0.75).
// OOD rows sit near e1 tilted toward e3 and are confidently class 0. Locally
// they look less novel than the spread-out tail of class 1, but class 1 rows
// are nearly orthogonal to e1 and so carry a large global correction; only
// g = 1 separates the sets.
inline Scenario GlobalHelpsScenario(std::uint64_t seed, Index per_set = 60) {
  Rng rng(seed);
  const Index d = 4;
  Vector e1 = Vector::Unit(d, 0), e2 = Vector::Unit(d, 1), e3 = Vector::Unit(d, 2);
  const Vector tight = Vector::Constant(d, 0.05);
  Vector wide(d);
  wide << 0.05, 0.05, 0.6, 0.6;

  Scenario s;
  RowMatrix train(400, d);
  train.topRows(300) = Cloud(rng, 300, e1, tight);
  train.bottomRows(100) = Cloud(rng, 100, e2, wide);
  std::vector<int> labels(400, 0);
  std::fill(labels.begin() + 300, labels.end(), 1);
  RowMatrix train_logits(400, 2);
  train_logits.topRows(300) = ConstantLogits(300, {8.0, 0.0});
  train_logits.bottomRows(100) = ConstantLogits(100, {0.0, 8.0});
  s.train = MakeSet(train, train_logits, labels, 2);

  const Index half = per_set / 2;
  RowMatrix id(per_set, d);
  id.topRows(half) = Cloud(rng, half, e1, tight);
  id.bottomRows(per_set - half) = Cloud(rng, per_set - half, e2, wide);
  RowMatrix id_logits(per_set, 2);
  id_logits.topRows(half) = ConstantLogits(half, {8.0, 0.0});
  id_logits.bottomRows(per_set - half) = ConstantLogits(per_set - half, {0.0, 8.0});
  s.id = MakeSet(id, id_logits, {}, 2);

  const Vector tilted = std::cos(0.5) * e1 + std::sin(0.5) * e3;
  s.ood = MakeSet(Cloud(rng, per_set, tilted, Vector::Constant(d, 0.02)),
                  ConstantLogits(per_set, {8.0, 0.0}), {}, 2);
  return s;
}

// Two tight classes on e1 and e2. Every test row gets near-uniform logits, so
// the top-1 class is a coin flip. ID rows come from the classes; OOD rows lie
// in the orthogonal complement. With K = 1 half the ID rows are scored against
// the wrong class and look as novel as OOD; K = 2 always includes the right one.
inline Scenario AmbiguousPairScenario(std::uint64_t seed, Index per_set = 100) {
  Rng rng(seed);
  const Index d = 6;
  const Vector tight = Vector::Constant(d, 0.03);
  const Vector e1 = Vector::Unit(d, 0), e2 = Vector::Unit(d, 1);

  Scenario s;
  RowMatrix train(200, d);
  train.topRows(100) = Cloud(rng, 100, e1, tight);
  train.bottomRows(100) = Cloud(rng, 100, e2, tight);
  std::vector<int> labels(200, 0);
  std::fill(labels.begin() + 100, labels.end(), 1);
  s.train = MakeSet(train, ConstantLogits(200, {0.0, 0.0}), labels, 2);

  auto ambiguous = [&](Index n) {
    RowMatrix l(n, 2);
    for (Index i = 0; i < n; ++i) {
      l(i, 0) = Uniform(rng, -0.1, 0.1);
      l(i, 1) = Uniform(rng, -0.1, 0.1);
    }
    return l;
  };

  RowMatrix id(per_set, d);
  for (Index i = 0; i < per_set; ++i) {
    id.row(i) = Cloud(rng, 1, i % 2 == 0 ? e1 : e2, tight).row(0);
  }
  s.id = MakeSet(id, ambiguous(per_set), {}, 2);

  RowMatrix ood(per_set, d);
  for (Index i = 0; i < per_set; ++i) {
    Vector v = GaussianVector(rng, d);
    v[0] = v[1] = 0.0;
    ood.row(i) = (v / v.norm()).transpose();
  }
  s.ood = MakeSet(ood, ambiguous(per_set), {}, 2);
  return s;
}

}  // namespace vns::oracle
