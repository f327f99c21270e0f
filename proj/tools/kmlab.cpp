#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kmlab/experiments.hpp"
#include "kmlab/margin.hpp"
#include "kmlab/models.hpp"
#include "kmlab/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

void print_codebook(const kmlab::Codebook& c) {
  std::cout.precision(17);
  for (int j = 0; j < c.k(); ++j) {
    std::cout << "c" << j << " =";
    for (double v : c.point(j)) std::cout << ' ' << v;
    std::cout << "\n";
  }
}

void write_study_outputs(const std::vector<kmlab::RateRow>& rows, const std::string& out_dir,
                         const std::string& stem, const std::string& column, bool svg) {
  std::filesystem::create_directories(out_dir);
  const auto csv_path = std::filesystem::path(out_dir) / (stem + ".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw kmlab::InputError("cannot write " + csv_path.string());
  csv << kmlab::to_csv(rows);
  std::cout << "wrote " << csv_path.string() << "\n";
  if (svg) {
    const auto svg_path = std::filesystem::path(out_dir) / (stem + ".svg");
    std::ofstream out(svg_path);
    if (!out) throw kmlab::InputError("cannot write " + svg_path.string());
    kmlab::write_svg_loglog(out, rows, column, stem);
    std::cout << "wrote " << svg_path.string() << "\n";
  }
}

void print_slope(const kmlab::SlopeFit& fit) {
  std::cout.precision(17);
  std::cout << "slope = " << fit.slope << "\n";
  std::cout << "band95 = " << fit.half_band << "\n";
  std::cout << "intercept = " << fit.intercept << "\n";
  std::cout << "rows_used = " << fit.rows_used << "\n";
  for (long long n : fit.excluded_n) std::cout << "excluded_n = " << n << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-means quantization and clustering laboratory"};
  app.require_subcommand(1);

  std::string dataset_path, config_path, out_dir = ".", out_file, column = "mean_excess_distortion";
  std::string csv_path;
  int k = 2, restarts = 20, threads = 0;
  long long n_override = 0;
  std::uint64_t seed = 1;
  bool svg = false;

  auto* fit_cmd = app.add_subcommand("fit", "run multi-start Lloyd on a dataset file");
  fit_cmd->add_option("dataset", dataset_path)->required();
  fit_cmd->add_option("--k", k)->required();
  fit_cmd->add_option("--restarts", restarts);
  fit_cmd->add_option("--seed", seed);

  auto* erm_cmd = app.add_subcommand("erm-exact", "exact empirical risk minimizer (tiny instances)");
  erm_cmd->add_option("dataset", dataset_path)->required();
  erm_cmd->add_option("--k", k)->required();

  auto* diag_cmd = app.add_subcommand("diagnose", "margin and clusterability report for a dataset");
  diag_cmd->add_option("dataset", dataset_path)->required();
  diag_cmd->add_option("--k", k)->required();
  diag_cmd->add_option("--restarts", restarts);
  diag_cmd->add_option("--seed", seed);
  diag_cmd->add_option("--out", out_file, "write the report to a file instead of stdout");

  auto* sample_cmd = app.add_subcommand("sample", "draw a dataset file from a model spec");
  sample_cmd->add_option("--config", config_path)->required();
  sample_cmd->add_option("--out", out_file)->required();
  sample_cmd->add_option("--n", n_override, "overrides the model's n");
  sample_cmd->add_option("--seed", seed, "overrides the model's seed");

  auto* rate_cmd = app.add_subcommand("rate", "excess-distortion rate study");
  rate_cmd->add_option("--config", config_path)->required();
  rate_cmd->add_option("--out", out_dir);
  rate_cmd->add_option("--threads", threads);
  rate_cmd->add_flag("--svg", svg);

  auto* classif_cmd = app.add_subcommand("classif", "classification-risk rate study");
  classif_cmd->add_option("--config", config_path)->required();
  classif_cmd->add_option("--out", out_dir);
  classif_cmd->add_option("--threads", threads);
  classif_cmd->add_flag("--svg", svg);

  auto* cluster_cmd = app.add_subcommand("clusterability", "clusterability frequency study");
  cluster_cmd->add_option("--config", config_path)->required();
  cluster_cmd->add_option("--out", out_dir);
  cluster_cmd->add_option("--threads", threads);
  cluster_cmd->add_flag("--svg", svg);

  auto* slope_cmd = app.add_subcommand("slope", "log-log slope of a study CSV column");
  slope_cmd->add_option("csv", csv_path)->required();
  slope_cmd->add_option("--column", column);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) {
      const kmlab::Dataset data = kmlab::read_dataset_file(dataset_path);
      const kmlab::LloydResult result = kmlab::multi_start_erm(data, k, restarts, seed);
      std::cout.precision(17);
      std::cout << "distortion = " << result.distortion_trace.back() << "\n";
      std::cout << "iterations = " << result.iterations << "\n";
      std::cout << "converged = " << (result.converged ? 1 : 0) << "\n";
      print_codebook(result.codebook);
    } else if (*erm_cmd) {
      const kmlab::Dataset data = kmlab::read_dataset_file(dataset_path);
      const auto [codebook, distortion] = kmlab::exact_erm(data, k);
      std::cout.precision(17);
      std::cout << "distortion = " << distortion << "\n";
      print_codebook(codebook);
    } else if (*diag_cmd) {
      const kmlab::Dataset data = kmlab::read_dataset_file(dataset_path);
      const kmlab::LloydResult erm = kmlab::multi_start_erm(data, k, restarts, seed);
      const kmlab::MarginDiagnostics base = kmlab::margin_diagnostics(data, erm.codebook);
      const double f_emp = std::sqrt(base.p_min_hat * static_cast<double>(data.size()));
      const double fs[] = {32.0, f_emp};
      const kmlab::MarginDiagnostics diag = kmlab::margin_diagnostics(data, erm.codebook, fs);
      std::string report = kmlab::serialize_diagnostics(diag);
      std::ostringstream extra;
      extra.precision(17);
      extra << "erm_distortion = " << erm.distortion_trace.back() << "\n";
      report = extra.str() + report;
      if (out_file.empty()) {
        std::cout << report;
      } else {
        std::ofstream out(out_file);
        if (!out) throw kmlab::InputError("cannot write " + out_file);
        out << report;
        std::cout << "wrote " << out_file << "\n";
      }
    } else if (*sample_cmd) {
      kmlab::Model model = kmlab::load_model_file(config_path);
      const long long n = n_override > 0 ? n_override : model.default_n;
      const std::uint64_t use_seed = sample_cmd->count("--seed") ? seed : model.default_seed;
      const kmlab::Model concrete = kmlab::concretize(model, n, use_seed);
      const kmlab::SampleWithTruth s = kmlab::sample(concrete, n, use_seed);
      kmlab::write_dataset_file(out_file, s.dataset);
      std::cout << "wrote " << out_file << " (n = " << n << ")\n";
    } else if (*rate_cmd || *classif_cmd || *cluster_cmd) {
      kmlab::ExperimentConfig config = kmlab::load_experiment_config(config_path);
      if (threads > 0) config.threads = threads;
      if (*rate_cmd) {
        const auto rows = kmlab::rate_study(config);
        write_study_outputs(rows, out_dir, "rate", "mean_excess_distortion", svg);
        print_slope(kmlab::fit_loglog_slope(rows, "mean_excess_distortion"));
      } else if (*classif_cmd) {
        const auto rows = kmlab::classif_study(config);
        if (!rows.empty() && rows.front().warning)
          std::cerr << "warning: model outside the symmetric two-component hypotheses; "
                       "a classification bias term is possible\n";
        write_study_outputs(rows, out_dir, "classif", "mean_classif_risk", svg);
        print_slope(kmlab::fit_loglog_slope(rows, "mean_classif_risk"));
      } else {
        const auto rows = kmlab::clusterability_study(config);
        write_study_outputs(rows, out_dir, "clusterability", "clusterable_fraction", svg);
      }
    } else if (*slope_cmd) {
      std::ifstream in(csv_path);
      if (!in) throw kmlab::InputError("cannot open CSV: " + csv_path);
      const auto rows = kmlab::parse_csv(in);
      print_slope(kmlab::fit_loglog_slope(rows, column));
    }
  } catch (const kmlab::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
