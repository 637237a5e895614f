// latval: validate inference-latency runs against an external transition capture.
//
//   latval analyze   <run_dir>             classify one run, exit code = validity
//   latval condition <run_dir>... [--baseline <run_dir>...]
//   latval synth     <preset> | --spec <file>  --out <dir>

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "latval/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Inference latency measurement validation"};
  app.require_subcommand(1);

  std::string format = "text";
  latval::AnalyzeOptions analyze_opts;
  double threshold_override = 0.0;

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Pair, classify and summarize one run directory");
  fs::path run_dir;
  fs::path analyze_out;
  analyze->add_option("run_dir", run_dir, "Directory with software.csv, transitions.csv, metadata.json")
      ->required();
  analyze->add_option("--out", analyze_out, "Directory for report.json and report.txt");
  analyze->add_option("--marker-threshold-ms", threshold_override, "Override the marker classifier threshold")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--min-margin", analyze_opts.min_margin, "Minimum marker/inference width ratio");
  analyze->add_option("--format", format, "Report printed to stdout")->check(CLI::IsMember({"json", "text"}));

  // condition
  auto* condition = app.add_subcommand("condition", "Summarize a condition across run directories");
  std::vector<fs::path> run_dirs;
  std::vector<fs::path> baseline_dirs;
  fs::path condition_out;
  latval::ConditionReportOptions cond_opts;
  condition->add_option("run_dirs", run_dirs, "Run directories of one condition")->required();
  condition->add_option("--baseline", baseline_dirs, "Baseline run directories for the detectors");
  condition->add_option("--out", condition_out, "Directory for condition.json, condition.txt, ecdf/");
  condition->add_option("--marker-threshold-ms", threshold_override, "Override the marker classifier threshold")
      ->check(CLI::PositiveNumber);
  condition->add_option("--min-margin", cond_opts.analyze.min_margin, "Minimum marker/inference width ratio");
  condition->add_option("--p99-ratio-threshold", cond_opts.p99_ratio_threshold,
                        "Tail-inflation flag threshold on mean P99 ratio");
  condition->add_option("--sd-collapse-threshold", cond_opts.sd_collapse_threshold,
                        "Regime-shift flag threshold on run SD / baseline median SD");
  condition->add_option("--format", format, "Report printed to stdout")->check(CLI::IsMember({"json", "text"}));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic run directories");
  std::string preset_name;
  fs::path spec_file;
  fs::path synth_out;
  std::uint64_t seed = latval::synth::kDefaultSeed;
  bool list = false;
  auto* preset_opt = synth->add_option("preset", preset_name, "Named scenario");
  auto* spec_opt = synth->add_option("--spec", spec_file, "Scenario JSON file")->check(CLI::ExistingFile);
  preset_opt->excludes(spec_opt);
  auto* seed_opt = synth->add_option("--seed", seed, "Master seed");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_flag("--list", list, "List presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*analyze) {
      if (threshold_override > 0.0) analyze_opts.marker_threshold_ms = threshold_override;
      const auto report = latval::analyze_run_dir(run_dir, analyze_opts);
      if (!analyze_out.empty()) {
        fs::create_directories(analyze_out);
        latval::write_file(analyze_out / "report.json", latval::run_report_json(report));
        latval::write_file(analyze_out / "report.txt", latval::run_report_text(report));
      }
      std::cout << (format == "json" ? latval::run_report_json(report)
                                     : latval::run_report_text(report));
      return latval::exit_code(report.validity);
    }

    if (*condition) {
      if (threshold_override > 0.0) cond_opts.analyze.marker_threshold_ms = threshold_override;
      const auto report = latval::analyze_condition(run_dirs, baseline_dirs, cond_opts);
      if (!condition_out.empty()) latval::write_condition_outputs(report, condition_out);
      std::cout << (format == "json" ? latval::condition_report_json(report)
                                     : latval::condition_report_text(report));
      return 0;
    }

    if (*synth) {
      if (list) {
        for (const auto& name : latval::synth::preset_names()) std::cout << name << "\n";
        return 0;
      }
      if (synth_out.empty()) {
        std::cerr << "synth: --out is required\n";
        return 1;
      }
      latval::synth::Scenario scenario;
      if (!spec_file.empty()) {
        scenario = latval::load_scenario_file(
            spec_file, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt);
      } else if (!preset_name.empty()) {
        scenario = latval::synth::preset(preset_name, seed);
      } else {
        std::cerr << "synth: give a preset name or --spec <file>\n";
        return 1;
      }
      for (const auto& dir : latval::write_scenario(scenario, synth_out)) {
        std::cout << dir.string() << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
