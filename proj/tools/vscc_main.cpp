// Command-line front end: dataset ingestion, pipeline execution, and report
// emission. See README.md for the output formats.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "vscc/vscc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string mode;
  std::string input;
  std::optional<std::string> label_col;
  std::optional<std::string> truth_col;
  int g_min = 1;
  int g_max = 9;
  std::uint64_t seed = 1;
  bool no_full_set = false;
  bool emit_plots = true;
  std::string out_dir = ".";
  int restarts = 10;
  int max_iter = 500;
  // simulate mode
  int reps = 25;
  double separation = 0.7;
  int signal = 10;
  int noise = 5;
  int groups = 4;
  int n_min = 100;
  int n_max = 150;
  std::string pipeline = "vscc";
};

vscc::FitConfig fit_config(const Options& opt) {
  vscc::FitConfig cfg;
  cfg.g_min = opt.g_min;
  cfg.g_max = opt.g_max;
  cfg.seed = opt.seed;
  cfg.n_restarts = opt.restarts;
  cfg.max_iter = opt.max_iter;
  return cfg;
}

json candidate_json(const vscc::ReportRow& row) {
  json j{{"relationship", row.relationship}, {"n_vars", row.n_vars},
         {"vars", row.vars},                 {"G", row.G},
         {"model", row.model},               {"bic", row.bic},
         {"uncertainty", row.uncertainty},   {"runtime_s", row.runtime_s},
         {"status", row.status}};
  if (row.ari) j["ari"] = *row.ari;
  return j;
}

void write_summary(const fs::path& path, const Options& opt,
                   const vscc::Dataset& ds, const vscc::VsccReport& report,
                   const std::vector<vscc::ReportRow>& rows) {
  json j;
  j["mode"] = vscc::pipeline_mode_name(report.mode);
  j["input"] = opt.input;
  j["seed"] = opt.seed;
  j["n"] = ds.n();
  j["p"] = ds.p();
  j["g_range"] = {opt.g_min, opt.g_max};
  j["include_full_set"] = report.include_full_set;
  j["chosen"] = candidate_json(rows[report.chosen_index]);
  j["n_candidates"] = rows.size();
  j["timings"] = {{"standardize_s", report.timings.standardize_s},
                  {"init_fit_s", report.timings.init_fit_s},
                  {"selection_s", report.timings.selection_s},
                  {"refits_s", report.timings.refits_s},
                  {"total_s", report.timings.total_s}};
  std::ofstream out(path);
  if (!out)
    throw vscc::Error(vscc::ErrorCode::IoError,
                      "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

int run_dataset_mode(const Options& opt) {
  const auto ingest = vscc::ingest_csv(opt.input, opt.label_col);
  const auto cfg = fit_config(opt);

  vscc::VsccReport report;
  std::optional<vscc::PartialPartition> truth;
  if (opt.mode == "cluster") {
    report = vscc::run_clustering(ingest.dataset, cfg, !opt.no_full_set);
    truth = ingest.labels;  // evaluation only
  } else {
    if (!ingest.labels)
      throw vscc::Error(vscc::ErrorCode::InvalidConfig,
                        "--labels is required for mode " + opt.mode);
    if (opt.mode == "supervised")
      report = vscc::run_supervised(ingest.dataset, *ingest.labels, cfg);
    else
      report = vscc::run_semisupervised(ingest.dataset, *ingest.labels, cfg);
    if (opt.truth_col) {
      const auto truth_ingest = vscc::ingest_csv(opt.input, opt.truth_col);
      truth = truth_ingest.labels;
    }
  }

  const auto rows = vscc::build_report_rows(report, ingest.dataset, truth);
  fs::create_directories(opt.out_dir);
  vscc::write_report_csv((fs::path(opt.out_dir) / "report.csv").string(),
                         rows);
  write_summary(fs::path(opt.out_dir) / "summary.json", opt, ingest.dataset,
                report, rows);
  if (opt.emit_plots && report.chosen().subset.size() == 2)
    vscc::write_plot_data((fs::path(opt.out_dir) / "plot.csv").string(),
                          ingest.dataset, report.chosen());

  const auto& chosen = rows[report.chosen_index];
  std::cout << "chosen: " << chosen.relationship << " (" << chosen.n_vars
            << " vars: " << chosen.vars << ")\n"
            << "G = " << chosen.G << ", model = " << chosen.model
            << ", uncertainty = " << chosen.uncertainty << "\n";
  if (chosen.ari) std::cout << "ari = " << *chosen.ari << "\n";
  std::cout << "report: " << (fs::path(opt.out_dir) / "report.csv").string()
            << "\n";
  return 0;
}

int run_simulate_mode(const Options& opt) {
  vscc::SimSpec spec;
  spec.groups = opt.groups;
  spec.n_per_group_min = opt.n_min;
  spec.n_per_group_max = opt.n_max;
  spec.p_signal = opt.signal;
  spec.p_noise = opt.noise;
  spec.separation = opt.separation;
  spec.seed = opt.seed;

  const auto base_cfg = fit_config(opt);
  vscc::Pipeline pipeline;
  if (opt.pipeline == "vscc") {
    // the reference simulation protocol does not let the full set compete
    pipeline = [base_cfg](const vscc::SimInstance& instance,
                          std::uint64_t seed) {
      auto cfg = base_cfg;
      cfg.seed = seed;
      const auto report = vscc::run_clustering(instance.dataset, cfg, false);
      return vscc::PipelineOutcome{
          vscc::harden(report.chosen().fit.assignment),
          static_cast<int>(report.chosen().subset.size()),
          report.chosen().subset.relationship};
    };
  } else if (opt.pipeline == "fullset") {
    pipeline = [base_cfg](const vscc::SimInstance& instance,
                          std::uint64_t seed) {
      auto cfg = base_cfg;
      cfg.seed = seed;
      const auto fit =
          vscc::select_bic(vscc::standardize(instance.dataset), cfg);
      return vscc::PipelineOutcome{vscc::harden(fit.assignment),
                                   static_cast<int>(instance.dataset.p()),
                                   vscc::Relationship::FullSet};
    };
  } else {
    throw vscc::Error(vscc::ErrorCode::InvalidConfig,
                      "--pipeline must be vscc or fullset");
  }

  const auto summary = vscc::replicate_study(spec, opt.reps, pipeline);

  fs::create_directories(opt.out_dir);
  const fs::path path = fs::path(opt.out_dir) / "sim_results.csv";
  std::ofstream out(path);
  if (!out)
    throw vscc::Error(vscc::ErrorCode::IoError,
                      "cannot write " + path.string());
  out << "rep_index,ari,runtime_s,n_vars_chosen,relationship,status\n";
  for (const auto& rep : summary.reps) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.3f,%d,%s,%s", rep.rep_index,
                  rep.ari, rep.runtime_s, rep.n_vars_chosen,
                  vscc::relationship_name(rep.relationship),
                  rep.status.c_str());
    out << buf << "\n";
  }

  std::printf("pipeline = %s, reps = %d\n", opt.pipeline.c_str(), opt.reps);
  std::printf("mean ARI = %.4f, sd ARI = %.4f, mean runtime = %.2fs\n",
              summary.mean_ari, summary.sd_ari, summary.mean_runtime_s);
  std::cout << "results: " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{
      "vscc: variable selection for model-based clustering and "
      "classification"};
  app.add_option("--mode", opt.mode,
                 "cluster | supervised | semisupervised | simulate")
      ->required()
      ->check(CLI::IsMember(
          {"cluster", "supervised", "semisupervised", "simulate"}));
  app.add_option("--input", opt.input, "input CSV with a header row");
  app.add_option("--labels", opt.label_col,
                 "label column: known classes (blank cell = unknown); in "
                 "cluster mode used for evaluation only");
  app.add_option("--truth", opt.truth_col,
                 "fully known reference column for evaluating the "
                 "classification modes");
  app.add_option("--g-min", opt.g_min, "smallest number of groups");
  app.add_option("--g-max", opt.g_max, "largest number of groups");
  app.add_option("--seed", opt.seed, "RNG seed");
  app.add_flag("--no-full-set", opt.no_full_set,
               "do not let the full variable set compete (cluster mode)");
  app.add_flag("--emit-plots,!--no-emit-plots", opt.emit_plots,
               "write plot.csv when the chosen subset has 2 variables");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--restarts", opt.restarts, "EM restarts per (G, model)");
  app.add_option("--max-iter", opt.max_iter, "EM iteration cap");
  app.add_option("--reps", opt.reps, "simulate: replicates");
  app.add_option("--separation", opt.separation,
                 "simulate: group separation in (0,1]");
  app.add_option("--signal", opt.signal, "simulate: signal variables");
  app.add_option("--noise", opt.noise, "simulate: noise variables");
  app.add_option("--groups", opt.groups, "simulate: planted groups");
  app.add_option("--n-min", opt.n_min, "simulate: min observations per group");
  app.add_option("--n-max", opt.n_max, "simulate: max observations per group");
  app.add_option("--pipeline", opt.pipeline, "simulate: vscc | fullset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (opt.mode == "simulate") return run_simulate_mode(opt);
    if (opt.input.empty())
      throw vscc::Error(vscc::ErrorCode::InvalidConfig,
                        "--input is required for mode " + opt.mode);
    return run_dataset_mode(opt);
  } catch (const vscc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == vscc::ErrorCode::InitialSolutionHasOneGroup)
      std::cerr << "hint: rerun with --g-min 2 to require group structure\n";
    switch (e.category()) {
      case vscc::ErrorCategory::Config: return 1;
      case vscc::ErrorCategory::Data: return 2;
      case vscc::ErrorCategory::Pipeline: return 3;
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
