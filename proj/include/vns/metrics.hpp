#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>

namespace vns {

// All inputs are ID confidences: larger means "more in-distribution".

// P(id > ood) + 0.5 P(id == ood), via average ranks.
double auroc(std::span<const double> id_conf, std::span<const double> ood_conf);

struct FprAtTpr {
  double fpr = 0.0;
  double threshold = 0.0;
};

// tau is the ceil(tpr * n_id)-th largest ID confidence; a sample is called ID
// when conf >= tau, and fpr is the fraction of OOD samples called ID.
FprAtTpr fpr_at_tpr(std::span<const double> id_conf, std::span<const double> ood_conf,
                    double tpr = 0.95);

struct EvalReport {
  double auroc = 0.0;
  double fpr_at_95 = 0.0;
  double threshold = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  std::string detector_tag;
  std::string dataset_tag;
};

EvalReport evaluate(std::span<const double> id_conf, std::span<const double> ood_conf,
                    std::string detector_tag, std::string dataset_tag,
                    double tpr = 0.95);

inline constexpr const char* kReportHeader =
    "detector,dataset,auroc,fpr95,threshold,n_id,n_ood";

// One CSV row matching kReportHeader (no trailing newline).
std::string report_row(const EvalReport& r);

}  // namespace vns
