// vns: fit, tune, score, evaluate and benchmark Vendi Novelty Score detectors
// over EMBX embedding files.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vns/detectors.hpp"
#include "vns/error.hpp"
#include "vns/fitting.hpp"
#include "vns/metrics.hpp"
#include "vns/storage.hpp"
#include "vns/synthetic.hpp"
#include "vns/tuning.hpp"

namespace fs = std::filesystem;

namespace {

// Library errors map to 10 + code so scripts can tell failures apart.
constexpr int kErrorExitBase = 10;

struct CommandError {
  std::string input;
};

vns::DetectorKind ParseDetectorOrThrow(const std::string& name) {
  auto kind = vns::parse_detector(name);
  if (!kind) {
    throw vns::Error(vns::ErrorCode::kConfigError, "cli", "unknown detector '" + name + "'");
  }
  return *kind;
}

void WriteConfig(const vns::DetectorConfig& cfg, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw vns::Error(vns::ErrorCode::kIoError, "cli", path.string());
  out << "K=" << cfg.k_top << "\ngamma=" << cfg.gamma << "\ng=" << (cfg.use_global ? 1 : 0)
      << "\n";
}

vns::DetectorConfig ReadConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw vns::Error(vns::ErrorCode::kIoError, "cli", path.string());
  vns::DetectorConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw vns::Error(vns::ErrorCode::kParseError, "cli",
                       path.string() + " line " + std::to_string(line_no));
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "K") cfg.k_top = std::stoi(value);
      else if (key == "gamma") cfg.gamma = std::stod(value);
      else if (key == "g") cfg.use_global = std::stoi(value) != 0;
      else throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw vns::Error(vns::ErrorCode::kParseError, "cli",
                       path.string() + " line " + std::to_string(line_no) + ": " + line);
    }
  }
  return cfg;
}

std::vector<double> ReadConfidenceColumn(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw vns::Error(vns::ErrorCode::kIoError, "cli", path.string());
  std::vector<double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    const auto last = line.rfind(',');
    try {
      out.push_back(std::stod(line.substr(last == std::string::npos ? 0 : last + 1)));
    } catch (const std::exception&) {
      throw vns::Error(vns::ErrorCode::kParseError, "cli",
                       path.string() + " line " + std::to_string(line_no));
    }
  }
  return out;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw vns::Error(vns::ErrorCode::kIoError, "cli", path.string());
  out << text;
}

int RunFit(const std::string& train_path, int rank, const std::string& out_path,
           bool with_baselines) {
  const vns::EmbeddingDataset train = vns::read_embx(train_path);
  vns::FitOptions opts;
  opts.rank = rank;
  opts.with_baselines = with_baselines;
  const vns::FittedDetector fitted = vns::fit_detector(train, opts);
  vns::write_model(fitted, out_path);

  std::printf("fitted %d classes, D=%td, rank=%d, N=%td\n", fitted.class_count(),
              fitted.dim, fitted.rank, fitted.global_model.n);
  for (const vns::ClassSpectralModel& m : fitted.class_models) {
    std::printf("class %d: n=%td lambda1=%.6f", m.class_id, m.n_c, m.top_eigenvalue());
    if (m.eigenvalues.size() > 1 && m.eigenvalues[1] > 0.0) {
      std::printf(" gap=%.2f", m.eigenvalues[0] / m.eigenvalues[1]);
    }
    std::printf("\n");
  }
  std::printf("global: lambda_max=%.6f\n", fitted.global_model.lambda_max);
  return 0;
}

int RunTune(const std::string& model_path, const std::string& val_id_path,
            const std::string& val_ood_path, const std::string& detector,
            const std::string& out_path, const std::string& table_path, int knn_k) {
  const vns::DetectorKind kind = ParseDetectorOrThrow(detector);
  const vns::FittedDetector fitted = vns::read_model(model_path);
  const vns::EmbeddingDataset val_id = vns::read_embx(val_id_path);
  const vns::EmbeddingDataset val_ood = vns::read_embx(val_ood_path);
  const vns::TuneResult result = vns::tune(fitted, val_id, val_ood, kind, knn_k);
  if (result.table.empty()) {
    std::printf("%s: no tunable parameters\n", std::string(vns::detector_name(kind)).c_str());
  } else {
    const auto& best = result.best;
    std::printf("best: K=%d gamma=%g g=%d\n", best.k_top, best.gamma, best.use_global ? 1 : 0);
  }
  WriteConfig(result.best, out_path);
  if (!table_path.empty()) WriteText(table_path, vns::tune_table_csv(result));
  return 0;
}

int RunScore(const std::string& model_path, const std::string& test_path,
             const std::string& config_path, const std::string& detector,
             const std::string& out_path, int knn_k) {
  const vns::DetectorKind kind = ParseDetectorOrThrow(detector);
  const vns::FittedDetector fitted = vns::read_model(model_path);
  const vns::EmbeddingDataset test = vns::read_embx(test_path);
  vns::DetectorConfig cfg;
  if (!config_path.empty()) cfg = ReadConfig(config_path);
  cfg.rank = fitted.rank;
  const vns::DetectorScores scores = vns::score_detector(kind, fitted, test, cfg, knn_k);

  std::ostringstream os;
  os << "index,score,confidence\n";
  char buf[96];
  for (size_t i = 0; i < scores.score.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, scores.score[i],
                  scores.confidence[i]);
    os << buf;
  }
  WriteText(out_path, os.str());
  return 0;
}

int RunEval(const std::string& id_path, const std::string& ood_path, double tpr,
            const std::string& report_path, const std::string& detector_tag,
            const std::string& dataset_tag) {
  const auto id = ReadConfidenceColumn(id_path);
  const auto ood = ReadConfidenceColumn(ood_path);
  const vns::EvalReport report = vns::evaluate(id, ood, detector_tag, dataset_tag, tpr);
  std::printf("%s\n%s\n", vns::kReportHeader, vns::report_row(report).c_str());
  if (!report_path.empty()) {
    const bool fresh = !fs::exists(report_path) || fs::file_size(report_path) == 0;
    std::ofstream out(report_path, std::ios::app);
    if (!out) throw vns::Error(vns::ErrorCode::kIoError, "cli", report_path);
    if (fresh) out << vns::kReportHeader << '\n';
    out << vns::report_row(report) << '\n';
  }
  return 0;
}

int RunBench(const vns::SyntheticSpec& spec, vns::BenchOptions opts,
             const std::vector<std::string>& detectors, const std::string& out_path) {
  if (!detectors.empty()) {
    opts.detectors.clear();
    for (const auto& name : detectors) opts.detectors.push_back(ParseDetectorOrThrow(name));
  }
  const vns::SyntheticBenchmark bench = vns::make_synthetic_benchmark(spec);
  const std::string table = vns::bench_table_csv(vns::run_benchmark(bench, opts));
  std::fputs(table.c_str(), stdout);
  if (!out_path.empty()) WriteText(out_path, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vendi Novelty Score out-of-distribution detection"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit class and global spectral models");
  std::string fit_train, fit_out;
  int fit_rank = 1;
  bool fit_baselines = false;
  fit->add_option("train", fit_train, "Labeled training EMBX file")->required()->check(CLI::ExistingFile);
  fit->add_option("--rank", fit_rank, "Eigenpairs kept per class")->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_out, "Model output path")->required();
  fit->add_flag("--with-baselines", fit_baselines,
                "Also store covariances and training rows (maha, rmdspp, knn)");

  // tune
  auto* tune = app.add_subcommand("tune", "Grid-search (K, gamma, g) on validation data");
  std::string tune_model, tune_id, tune_ood, tune_detector = "vns", tune_out = "tuned.cfg",
                                                  tune_table;
  int tune_knn = vns::kDefaultKnnK;
  tune->add_option("model", tune_model)->required()->check(CLI::ExistingFile);
  tune->add_option("val_id", tune_id)->required()->check(CLI::ExistingFile);
  tune->add_option("val_ood", tune_ood)->required()->check(CLI::ExistingFile);
  tune->add_option("--detector", tune_detector, "vns|msp|gen|cosine|maha|rmdspp|knn");
  tune->add_option("--out", tune_out, "Tuned config output");
  tune->add_option("--table", tune_table, "Grid table CSV output");
  tune->add_option("--knn-k", tune_knn)->check(CLI::PositiveNumber);

  // score
  auto* score = app.add_subcommand("score", "Score a test set");
  std::string score_model, score_test, score_config, score_detector = "vns", score_out;
  int score_knn = vns::kDefaultKnnK;
  score->add_option("model", score_model)->required()->check(CLI::ExistingFile);
  score->add_option("test", score_test)->required()->check(CLI::ExistingFile);
  score->add_option("--config", score_config, "Config written by tune")->check(CLI::ExistingFile);
  score->add_option("--detector", score_detector, "vns|msp|gen|cosine|maha|rmdspp|knn");
  score->add_option("--out", score_out, "Scores CSV output")->required();
  score->add_option("--knn-k", score_knn)->check(CLI::PositiveNumber);

  // eval
  auto* eval = app.add_subcommand("eval", "AUROC and FPR@TPR from two score files");
  std::string eval_id, eval_ood, eval_report, eval_detector = "vns", eval_dataset = "ood";
  double eval_tpr = 0.95;
  eval->add_option("id_scores", eval_id)->required()->check(CLI::ExistingFile);
  eval->add_option("ood_scores", eval_ood)->required()->check(CLI::ExistingFile);
  eval->add_option("--tpr", eval_tpr)->check(CLI::Range(1e-9, 1.0));
  eval->add_option("--report", eval_report, "Append the report row to this CSV");
  eval->add_option("--detector-tag", eval_detector);
  eval->add_option("--dataset-tag", eval_dataset);

  // bench
  auto* bench = app.add_subcommand("bench", "Run every detector on a synthetic benchmark");
  vns::SyntheticSpec spec;
  vns::BenchOptions bench_opts;
  std::vector<std::string> bench_detectors;
  std::string bench_out;
  bench->add_option("--classes", spec.classes)->check(CLI::PositiveNumber);
  bench->add_option("--dim", spec.dim)->check(CLI::Range(2, 1 << 20));
  bench->add_option("--per-class", spec.per_class)->check(CLI::PositiveNumber);
  bench->add_option("--test-per-class", spec.test_per_class)->check(CLI::PositiveNumber);
  bench->add_option("--val-per-class", spec.val_per_class)->check(CLI::PositiveNumber);
  bench->add_option("--concentration", spec.concentration)->check(CLI::PositiveNumber);
  bench->add_option("--beta", spec.beta);
  bench->add_option("--near-angle", spec.near_angle, "Near-OOD tilt from an ID center (radians)")
      ->check(CLI::Range(1e-6, vns::kPi / 2));
  bench->add_option("--seed", spec.seed);
  bench->add_option("--rank", bench_opts.rank)->check(CLI::PositiveNumber);
  bench->add_option("--fit-fraction", bench_opts.fit_fraction)->check(CLI::Range(1e-9, 1.0));
  bench->add_option("--knn-k", bench_opts.knn_k)->check(CLI::PositiveNumber);
  bench->add_option("--tpr", bench_opts.tpr)->check(CLI::Range(1e-9, 1.0));
  bench->add_option("--detectors", bench_detectors, "Subset of detectors")->delimiter(',');
  bench->add_option("--out", bench_out, "Table CSV output");

  CLI11_PARSE(app, argc, argv);

  std::string input;
  try {
    if (*fit) {
      input = fit_train;
      return RunFit(fit_train, fit_rank, fit_out, fit_baselines);
    }
    if (*tune) {
      input = tune_model;
      return RunTune(tune_model, tune_id, tune_ood, tune_detector, tune_out, tune_table,
                     tune_knn);
    }
    if (*score) {
      input = score_test;
      return RunScore(score_model, score_test, score_config, score_detector, score_out,
                      score_knn);
    }
    if (*eval) {
      input = eval_id;
      return RunEval(eval_id, eval_ood, eval_tpr, eval_report, eval_detector, eval_dataset);
    }
    if (*bench) {
      input = "synthetic";
      return RunBench(spec, bench_opts, bench_detectors, bench_out);
    }
  } catch (const vns::Error& e) {
    std::fprintf(stderr, "error [%s] %s: %s\n", app.get_subcommands().front()->get_name().c_str(),
                 input.c_str(), e.what());
    return kErrorExitBase + static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [%s] %s: %s\n", app.get_subcommands().front()->get_name().c_str(),
                 input.c_str(), e.what());
    return 1;
  }
  return 0;
}
