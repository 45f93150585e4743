#include "vns/detectors.hpp"

#include <optional>
#include <string>

#include "vns/baselines.hpp"
#include "vns/error.hpp"
#include "vns/parallel.hpp"

namespace vns {

std::string_view detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kVns: return "vns";
    case DetectorKind::kMsp: return "msp";
    case DetectorKind::kGen: return "gen";
    case DetectorKind::kCosine: return "cosine";
    case DetectorKind::kMaha: return "maha";
    case DetectorKind::kRmdsPlusPlus: return "rmdspp";
    case DetectorKind::kKnn: return "knn";
  }
  return "unknown";
}

const std::vector<DetectorKind>& all_detectors() {
  static const std::vector<DetectorKind> kAll = {
      DetectorKind::kVns,    DetectorKind::kMsp,  DetectorKind::kGen,
      DetectorKind::kCosine, DetectorKind::kMaha, DetectorKind::kRmdsPlusPlus,
      DetectorKind::kKnn};
  return kAll;
}

std::optional<DetectorKind> parse_detector(std::string_view name) {
  for (DetectorKind k : all_detectors()) {
    if (detector_name(k) == name) return k;
  }
  if (name == "rmds++") return DetectorKind::kRmdsPlusPlus;
  return std::nullopt;
}

bool is_novelty_style(DetectorKind kind) { return kind != DetectorKind::kMsp; }

bool tunes_k_gamma(DetectorKind kind) {
  return kind == DetectorKind::kVns || kind == DetectorKind::kGen ||
         kind == DetectorKind::kCosine || kind == DetectorKind::kMaha;
}

bool tunes_global(DetectorKind kind) {
  return kind == DetectorKind::kVns || kind == DetectorKind::kCosine ||
         kind == DetectorKind::kMaha;
}

bool needs_baseline_stats(DetectorKind kind) {
  return kind == DetectorKind::kMaha || kind == DetectorKind::kRmdsPlusPlus ||
         kind == DetectorKind::kKnn;
}

DetectorScores score_detector(DetectorKind kind, const FittedDetector& fitted,
                              const EmbeddingDataset& data, const DetectorConfig& cfg,
                              int knn_k) {
  DetectorScores out;
  if (kind == DetectorKind::kVns) {
    out.score = vns_score(fitted, data, cfg).vns;
  } else {
    const bool need_logits = kind != DetectorKind::kKnn && kind != DetectorKind::kRmdsPlusPlus;
    const FeatureMatrix x =
        scoring_features(data, fitted.dim, fitted.class_count(), need_logits);
    std::optional<MahalanobisModel> maha;
    if (kind == DetectorKind::kMaha || kind == DetectorKind::kRmdsPlusPlus) {
      maha.emplace(fitted);
    }
    if (kind == DetectorKind::kKnn && !fitted.train_features) {
      throw Error(ErrorCode::kConfigError, "baselines",
                  "knn requires training features (fit with baselines)");
    }
    if (kind == DetectorKind::kGen || kind == DetectorKind::kCosine ||
        kind == DetectorKind::kMaha) {
      validate_config(cfg, fitted.class_count());
    }
    const auto n = static_cast<size_t>(x.rows());
    out.score.assign(n, 0.0);
    ParallelFor(n, [&](size_t i) {
      const auto row = static_cast<Index>(i);
      const Vector h = x.row(row).transpose();
      std::vector<double> p;
      if (need_logits) {
        const Eigen::RowVectorXd z = data.logits->row(row);
        p = softmax(std::span<const double>(z.data(), static_cast<size_t>(z.size())));
      }
      double s = 0.0;
      switch (kind) {
        case DetectorKind::kMsp: s = msp_score(p); break;
        case DetectorKind::kGen: s = gen_score(p, cfg.gamma, cfg.k_top); break;
        case DetectorKind::kCosine: s = cosine_novelty(fitted, p, h, cfg); break;
        case DetectorKind::kMaha: s = maha_novelty(fitted, *maha, p, h, cfg); break;
        case DetectorKind::kRmdsPlusPlus: s = rmdspp_score(fitted, *maha, h); break;
        case DetectorKind::kKnn: s = knn_novelty(*fitted.train_features, h, knn_k); break;
        case DetectorKind::kVns: break;
      }
      out.score[i] = s;
    });
  }
  out.confidence.resize(out.score.size());
  const double sign = is_novelty_style(kind) ? -1.0 : 1.0;
  for (size_t i = 0; i < out.score.size(); ++i) out.confidence[i] = sign * out.score[i];
  return out;
}

}  // namespace vns
