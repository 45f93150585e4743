#include "vns/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "vns/error.hpp"

namespace vns {
namespace {

constexpr const char* kModule = "metrics";

void CheckInputs(std::span<const double> id_conf, std::span<const double> ood_conf) {
  if (id_conf.empty() || ood_conf.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule,
                "n_id=" + std::to_string(id_conf.size()) +
                    " n_ood=" + std::to_string(ood_conf.size()));
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(id_conf.begin(), id_conf.end(), finite) ||
      !std::all_of(ood_conf.begin(), ood_conf.end(), finite)) {
    throw Error(ErrorCode::kDomainError, kModule, "non-finite score");
  }
}

}  // namespace

double auroc(std::span<const double> id_conf, std::span<const double> ood_conf) {
  CheckInputs(id_conf, ood_conf);
  struct Item {
    double value;
    bool is_id;
  };
  std::vector<Item> all;
  all.reserve(id_conf.size() + ood_conf.size());
  for (double v : id_conf) all.push_back({v, true});
  for (double v : ood_conf) all.push_back({v, false});
  std::sort(all.begin(), all.end(),
            [](const Item& a, const Item& b) { return a.value < b.value; });

  // Mann-Whitney U over ID ranks with ties sharing their average rank.
  double id_rank_sum = 0.0;
  size_t i = 0;
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) {
      if (all[k].is_id) id_rank_sum += avg_rank;
    }
    i = j;
  }
  const double n_id = static_cast<double>(id_conf.size());
  const double n_ood = static_cast<double>(ood_conf.size());
  const double u = id_rank_sum - n_id * (n_id + 1.0) / 2.0;
  return u / (n_id * n_ood);
}

FprAtTpr fpr_at_tpr(std::span<const double> id_conf, std::span<const double> ood_conf,
                    double tpr) {
  CheckInputs(id_conf, ood_conf);
  if (!(tpr > 0.0) || tpr > 1.0) {
    throw Error(ErrorCode::kDomainError, kModule, "tpr outside (0, 1]");
  }
  std::vector<double> sorted(id_conf.begin(), id_conf.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double n_id = static_cast<double>(sorted.size());
  // Guard against tpr * n landing a rounding step above an integer.
  auto keep = static_cast<size_t>(std::ceil(tpr * n_id - 1e-9));
  keep = std::clamp<size_t>(keep, 1, sorted.size());
  FprAtTpr out;
  out.threshold = sorted[keep - 1];
  const auto above = std::count_if(ood_conf.begin(), ood_conf.end(),
                                   [&](double v) { return v >= out.threshold; });
  out.fpr = static_cast<double>(above) / static_cast<double>(ood_conf.size());
  return out;
}

EvalReport evaluate(std::span<const double> id_conf, std::span<const double> ood_conf,
                    std::string detector_tag, std::string dataset_tag, double tpr) {
  EvalReport r;
  r.auroc = auroc(id_conf, ood_conf);
  const FprAtTpr f = fpr_at_tpr(id_conf, ood_conf, tpr);
  r.fpr_at_95 = f.fpr;
  r.threshold = f.threshold;
  r.n_id = id_conf.size();
  r.n_ood = ood_conf.size();
  r.detector_tag = std::move(detector_tag);
  r.dataset_tag = std::move(dataset_tag);
  return r;
}

std::string report_row(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.17g,%zu,%zu", r.auroc, r.fpr_at_95,
                r.threshold, r.n_id, r.n_ood);
  return r.detector_tag + "," + r.dataset_tag + buf;
}

}  // namespace vns
