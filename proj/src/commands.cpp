#include "latval/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>
#include <stdexcept>

#include "latval/serialize.hpp"

namespace latval {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ValidityClass c) {
  switch (c) {
    case ValidityClass::A_valid_runtime_and_sync:
    case ValidityClass::B_valid_runtime_incomplete_sync: return 0;
    case ValidityClass::C_invalid_runtime: return 2;
    case ValidityClass::D_methodology_failure: return 3;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Single run
// ---------------------------------------------------------------------------

RunReport analyze_run(const SoftwareTimingLog& log, const TransitionStream& stream,
                      const RunMetadata& meta_in, const AnalyzeOptions& options) {
  RunReport report;
  report.meta = meta_in;
  if (options.marker_threshold_ms) report.meta.marker_threshold_ms = *options.marker_threshold_ms;
  const auto& meta = report.meta;
  if (meta.marker_threshold_ms >= meta.marker_width_ms) {
    report.warnings.push_back("marker threshold is not below the configured marker width");
  }

  const auto extracted = extract_pulses(stream);
  report.edges = extracted.edges;
  report.pulses = extracted.pulses.size();
  report.orphan_edges = extracted.orphans();
  if (extracted.orphans() > 0) {
    report.warnings.push_back(std::to_string(extracted.orphans()) +
                              " orphan edge(s) discarded at capture boundaries");
  }

  const auto classified = classify_pulses(extracted.pulses, meta.marker_threshold_ms);
  report.pairing = pair_intervals(log, classified);
  for (const auto& w : report.pairing.warnings) report.warnings.push_back(w);

  const auto observed = observed_inference_widths(log, report.pairing);
  report.separation = validate_marker_separation(meta.marker_width_ms, observed, options.min_margin);
  if (!report.separation.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "marker width %.3f ms is only %.2fx the widest inference (%.3f ms); "
                  "minimum margin is %.2fx",
                  report.separation.marker_width_ms, report.separation.margin_ratio,
                  report.separation.inference_max_observed_ms, report.separation.min_margin);
    report.warnings.push_back(buf);
  }

  report.decoupling = detect_decoupling(log, report.pairing, meta, extracted.edges);
  report.validity = classify_run_validity(report.decoupling, report.separation);
  report.decoupling.validity = report.validity;
  if (report.decoupling.decoupled()) {
    report.warnings.push_back(std::string("observability decoupling: software log complete, "
                                          "external channel shows ") +
                              to_string(report.decoupling.failure_mode.kind));
  }
  if (!log.complete()) {
    report.warnings.push_back("software log has " + std::to_string(log.rows().size()) + " of " +
                              std::to_string(log.iterations_expected()) + " iterations");
  }

  const bool software_claims = report.validity == ValidityClass::A_valid_runtime_and_sync ||
                               report.validity == ValidityClass::B_valid_runtime_incomplete_sync;
  if (software_claims && !log.rows().empty()) {
    report.software_latencies_ms = log.latencies();
    report.software =
        run_summary(report.software_latencies_ms, meta.run_id, meta.condition.label);
  }
  if (report.validity == ValidityClass::A_valid_runtime_and_sync && !report.pairing.pairs.empty()) {
    report.external_widths_ms = report.pairing.external_widths();
    report.external = run_summary(report.external_widths_ms, meta.run_id, meta.condition.label);
  }
  return report;
}

RunReport analyze_run_dir(const fs::path& dir, const AnalyzeOptions& options) {
  const auto meta = load_run_metadata(dir / kMetadataJson);
  const auto log = load_software_log(dir / kSoftwareCsv, meta.iterations_expected, meta.run_id);
  const auto stream = load_transition_stream(dir / kTransitionsCsv, meta.sample_period);
  return analyze_run(log, stream, meta, options);
}

namespace {

json run_report_object(const RunReport& r) {
  json j;
  j["metadata"] = metadata_json(r.meta);
  j["extraction"] = json{{"edges", r.edges}, {"pulses", r.pulses}, {"orphan_edges", r.orphan_edges}};
  j["pairing"] = r.pairing;
  j["separation"] = r.separation;
  j["decoupling"] = r.decoupling;
  j["validity"] = r.validity;
  j["software_summary"] = r.software ? json(*r.software) : json(nullptr);
  j["external_summary"] = r.external ? json(*r.external) : json(nullptr);
  j["warnings"] = r.warnings;
  return j;
}

std::string summary_line(const char* tag, const RunSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "  %-9s n=%zu mean=%.3f sd=%.3f p50=%.3f p95=%.3f p99=%.3f max=%.3f ms\n", tag,
                s.n, s.mean, s.sd, s.p50, s.p95, s.p99, s.max);
  return buf;
}

std::string failure_text(const FailureMode& m) {
  std::string s = to_string(m.kind);
  if (m.loss_fraction) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " (loss %.3f)", *m.loss_fraction);
    s += buf;
  }
  return s;
}

}  // namespace

std::string run_report_json(const RunReport& report) {
  return run_report_object(report).dump(2) + "\n";
}

std::string run_report_text(const RunReport& r) {
  std::ostringstream out;
  char buf[256];
  out << "run " << r.meta.run_id << " [" << r.meta.architecture.label << ", "
      << r.meta.condition.label << "]\n";
  out << "  validity  " << code(r.validity) << " (" << label(r.validity) << ")\n";
  out << "  failure   " << failure_text(r.decoupling.failure_mode) << "\n";
  std::snprintf(buf, sizeof buf,
                "  software  %zu/%zu rows%s\n"
                "  external  %zu edges (expected %zu), marker %s, %zu warmup, %zu pairs\n",
                r.decoupling.software_rows, r.meta.iterations_expected,
                r.decoupling.software_complete ? " (complete)" : " (incomplete)", r.edges,
                r.decoupling.transitions_expected, r.pairing.marker_found ? "found" : "absent",
                r.pairing.pre_marker_pulses, r.pairing.pairs.size());
  out << buf;
  if (std::isfinite(r.separation.margin_ratio)) {
    std::snprintf(buf, sizeof buf, "  marker    %.3f ms vs widest inference %.3f ms: %.2fx (%s)\n",
                  r.separation.marker_width_ms, r.separation.inference_max_observed_ms,
                  r.separation.margin_ratio, r.separation.pass ? "ok" : "FAIL");
  } else {
    std::snprintf(buf, sizeof buf, "  marker    %.3f ms, no inference observed\n",
                  r.separation.marker_width_ms);
  }
  out << buf;
  if (r.software) out << summary_line("software", *r.software);
  if (r.external) out << summary_line("external", *r.external);
  for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Condition
// ---------------------------------------------------------------------------

namespace {

std::vector<RunSummary> collect(const std::vector<RunReport>& runs,
                                std::span<const std::size_t> indices, bool external) {
  std::vector<RunSummary> out;
  for (auto i : indices) {
    const auto& s = external ? runs[i].external : runs[i].software;
    if (s) out.push_back(*s);
  }
  return out;
}

std::vector<ValidityClass> classes_of(const std::vector<RunReport>& runs) {
  std::vector<ValidityClass> out;
  for (const auto& r : runs) out.push_back(r.validity);
  return out;
}

void require_single_condition(const std::vector<RunReport>& runs, const char* what) {
  for (const auto& r : runs) {
    if (r.meta.condition.label != runs.front().meta.condition.label) {
      throw std::invalid_argument(std::string("mixed condition labels among ") + what + ": '" +
                                  runs.front().meta.condition.label + "' and '" +
                                  r.meta.condition.label + "'");
    }
  }
}

}  // namespace

ConditionReport build_condition_report(std::vector<RunReport> runs,
                                       std::vector<RunReport> baseline_runs,
                                       const ConditionReportOptions& options) {
  if (runs.empty()) throw std::invalid_argument("no runs to summarize");
  require_single_condition(runs, "runs");
  if (!baseline_runs.empty()) require_single_condition(baseline_runs, "baseline runs");

  ConditionReport report;
  report.runs = std::move(runs);
  report.baseline_runs = std::move(baseline_runs);
  const auto classes = classes_of(report.runs);
  report.views = filter_for_external_claims(classes);

  const auto external = collect(report.runs, report.views.external, true);
  const auto software = collect(report.runs, report.views.software_only, false);
  if (!external.empty()) report.external = condition_summary(external);
  if (!software.empty()) report.software_only = condition_summary(software);
  report.external_claims_defensible = report.external.has_value();

  const auto& cond = report.runs.front().meta.condition.label;
  if (!report.external_claims_defensible) {
    report.warnings.push_back("no defensible external claims: no class A run in condition '" +
                              cond + "'");
  }
  if (!report.software_only) {
    report.warnings.push_back("no defensible software claims: no class A or B run in condition '" +
                              cond + "'");
  } else if (report.software_only->single_run) {
    report.warnings.push_back("single run in software-only view; run-mean SD reported as 0");
  }
  if (report.views.software_only.size() > report.views.external.size()) {
    report.warnings.push_back(std::to_string(report.views.software_only.size() -
                                             report.views.external.size()) +
                              " class B run(s) contribute software timing only");
  }

  if (!report.baseline_runs.empty()) {
    const auto base_views = filter_for_external_claims(classes_of(report.baseline_runs));
    const auto base = collect(report.baseline_runs, base_views.software_only, false);
    if (base.empty()) {
      report.warnings.push_back("baseline has no class A or B run; detectors skipped");
    } else {
      report.baseline = condition_summary(base);
      if (report.software_only) {
        report.tail_inflation =
            detect_tail_inflation(*report.baseline, *report.software_only, options.p99_ratio_threshold);
      }
      if (base.size() >= 2) {
        for (const auto& s : software) {
          report.regime_shift.push_back(detect_regime_shift(base, s, options.sd_collapse_threshold));
        }
      } else {
        report.warnings.push_back("regime-shift detection needs at least two baseline runs");
      }
    }
  }
  return report;
}

ConditionReport analyze_condition(std::span<const fs::path> run_dirs,
                                  std::span<const fs::path> baseline_dirs,
                                  const ConditionReportOptions& options) {
  if (run_dirs.empty()) throw std::invalid_argument("no run directories given");
  auto analyze_all = [&](std::span<const fs::path> dirs) {
    std::vector<std::future<RunReport>> pending;
    for (const auto& d : dirs) {
      pending.push_back(std::async(std::launch::async,
                                   [&options, d] { return analyze_run_dir(d, options.analyze); }));
    }
    std::vector<RunReport> out;
    for (auto& f : pending) out.push_back(f.get());
    return out;
  };
  auto runs = analyze_all(run_dirs);
  auto baseline = analyze_all(baseline_dirs);
  return build_condition_report(std::move(runs), std::move(baseline), options);
}

std::string condition_report_json(const ConditionReport& r) {
  json j;
  json runs = json::array();
  for (const auto& run : r.runs) runs.push_back(run_report_object(run));
  j["runs"] = std::move(runs);
  json baseline_runs = json::array();
  for (const auto& run : r.baseline_runs) {
    baseline_runs.push_back(json{{"run_id", run.meta.run_id},
                                 {"validity", run.validity},
                                 {"software_summary",
                                  run.software ? json(*run.software) : json(nullptr)}});
  }
  j["baseline_runs"] = std::move(baseline_runs);
  auto ids = [&](std::span<const std::size_t> idx) {
    json a = json::array();
    for (auto i : idx) a.push_back(r.runs[i].meta.run_id);
    return a;
  };
  j["views"] = json{{"external", ids(r.views.external)},
                    {"software_only", ids(r.views.software_only)},
                    {"excluded", ids(r.views.excluded)}};
  j["external_summary"] = r.external ? json(*r.external) : json(nullptr);
  j["software_only_summary"] = r.software_only ? json(*r.software_only) : json(nullptr);
  j["baseline_summary"] = r.baseline ? json(*r.baseline) : json(nullptr);
  j["tail_inflation"] = r.tail_inflation ? json(*r.tail_inflation) : json(nullptr);
  j["regime_shift"] = r.regime_shift;
  j["external_claims_defensible"] = r.external_claims_defensible;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string condition_report_text(const ConditionReport& r) {
  std::ostringstream out;
  const auto& cond = r.runs.front().meta.condition.label;
  out << "condition " << cond << ": " << r.runs.size() << " run(s), " << r.views.external.size()
      << " class A, " << (r.views.software_only.size() - r.views.external.size()) << " class B, "
      << r.views.excluded.size() << " excluded (C/D)\n";
  if (!r.external_claims_defensible) out << "NO DEFENSIBLE EXTERNAL CLAIMS\n";
  out << "\n";

  std::vector<ConditionSummary> rows;
  auto add_row = [&](const std::optional<ConditionSummary>& s, const std::string& name) {
    if (!s) return;
    auto row = *s;
    row.condition = name;
    rows.push_back(row);
  };
  add_row(r.external, cond + " [external, A]");
  add_row(r.software_only, cond + " [software, A+B]");
  if (r.baseline) add_row(r.baseline, r.baseline->condition + " [baseline software]");
  if (!rows.empty()) out << format_condition_table(rows) << "\n";

  char buf[256];
  out << "runs:\n";
  for (const auto& run : r.runs) {
    std::snprintf(buf, sizeof buf, "  %-32s %s  %-28s", run.meta.run_id.c_str(), code(run.validity),
                  failure_text(run.decoupling.failure_mode).c_str());
    out << buf;
    if (run.software) {
      std::snprintf(buf, sizeof buf, " n=%zu mean=%.3f sd=%.3f p99=%.3f", run.software->n,
                    run.software->mean, run.software->sd, run.software->p99);
      out << buf;
    }
    out << "\n";
  }
  if (r.tail_inflation) {
    const auto& t = *r.tail_inflation;
    std::snprintf(buf, sizeof buf,
                  "\ntail inflation: P99 ratio %.3f (mean %.3f, max %.3f), threshold %.2f -> %s\n",
                  t.p99_ratio, t.mean_ratio, t.max_ratio, t.threshold,
                  t.flagged ? "FLAGGED" : "not flagged");
    out << buf;
  }
  if (!r.regime_shift.empty()) {
    out << "\nregime shift (sd / baseline median sd, mean vs baseline mean):\n";
    for (const auto& f : r.regime_shift) {
      std::snprintf(buf, sizeof buf, "  %-32s sd ratio %.3f, mean %.3f vs %.3f -> %s\n",
                    f.run_id.c_str(), f.sd_collapse_ratio, f.run_mean, f.baseline_mean,
                    f.flagged ? "FLAGGED" : "ok");
      out << buf;
    }
  }
  if (!r.warnings.empty()) {
    out << "\n";
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  }
  return out.str();
}

namespace {

std::string file_safe(std::string s) {
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

}  // namespace

void write_condition_outputs(const ConditionReport& r, const fs::path& out_dir) {
  fs::create_directories(out_dir / "ecdf");
  write_file(out_dir / "condition.json", condition_report_json(r));
  write_file(out_dir / "condition.txt", condition_report_text(r));
  std::vector<double> pooled_software, pooled_external;
  for (auto i : r.views.software_only) {
    const auto& run = r.runs[i];
    write_file(out_dir / "ecdf" / ("software_" + file_safe(run.meta.run_id) + ".csv"),
               ecdf_csv(ecdf(run.software_latencies_ms)));
    pooled_software.insert(pooled_software.end(), run.software_latencies_ms.begin(),
                           run.software_latencies_ms.end());
  }
  for (auto i : r.views.external) {
    const auto& run = r.runs[i];
    if (run.external_widths_ms.empty()) continue;
    write_file(out_dir / "ecdf" / ("external_" + file_safe(run.meta.run_id) + ".csv"),
               ecdf_csv(ecdf(run.external_widths_ms)));
    pooled_external.insert(pooled_external.end(), run.external_widths_ms.begin(),
                           run.external_widths_ms.end());
  }
  if (!pooled_software.empty())
    write_file(out_dir / "ecdf" / "software_pooled.csv", ecdf_csv(ecdf(pooled_software)));
  if (!pooled_external.empty())
    write_file(out_dir / "ecdf" / "external_pooled.csv", ecdf_csv(ecdf(pooled_external)));
}

// ---------------------------------------------------------------------------
// Synthesis output
// ---------------------------------------------------------------------------

void write_run_dir(const synth::GeneratedRun& run, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / kSoftwareCsv, serialize_software_csv(run.log));
  write_file(dir / kTransitionsCsv, serialize_transition_csv(run.stream));
  write_file(dir / kMetadataJson, serialize_run_metadata(run.meta));
  write_file(dir / kGroundTruthJson, json(run.truth).dump(2) + "\n");
}

std::vector<fs::path> write_scenario(const synth::Scenario& scenario, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<synth::GeneratedRun> generated(scenario.runs.size());
  {
    std::vector<std::future<synth::GeneratedRun>> pending;
    for (const auto& plan : scenario.runs) {
      pending.push_back(std::async(std::launch::async, [&plan] { return synth::generate(plan); }));
    }
    for (std::size_t i = 0; i < pending.size(); ++i) generated[i] = pending[i].get();
  }
  json runs = json::array();
  std::vector<fs::path> dirs;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto& plan = scenario.runs[i];
    const auto& run = generated[i];
    const fs::path dir = out_dir / run.meta.run_id;
    write_run_dir(run, dir);
    dirs.push_back(dir);
    runs.push_back(json{{"run_id", run.meta.run_id},
                        {"distribution", plan.dist},
                        {"fault", plan.fault},
                        {"seed", plan.seed},
                        {"expected_class", code(run.truth.expected_class)},
                        {"expected_failure_mode", run.truth.expected_mode}});
  }
  json j{{"scenario", scenario.name}, {"description", scenario.description}, {"runs", runs}};
  write_file(out_dir / "scenario.json", j.dump(2) + "\n");
  return dirs;
}

synth::Scenario load_scenario_file(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  try {
    const auto j = json::parse(read_file(path));
    synth::Scenario s;
    s.name = j.value("name", path.stem().string());
    s.description = j.value("description", std::string("scenario file ") + path.filename().string());
    const auto dist = j.at("distribution").get<synth::LatencyDistSpec>();
    const auto meta = metadata_from_json(j.at("metadata"));
    const auto n_runs = j.value("runs", std::size_t{1});
    const auto seed = seed_override.value_or(j.value("seed", synth::kDefaultSeed));
    std::vector<synth::FaultSpec> faults;
    if (j.contains("faults")) {
      for (const auto& f : j.at("faults")) faults.push_back(f.get<synth::FaultSpec>());
    } else {
      faults.push_back(j.contains("fault") ? j.at("fault").get<synth::FaultSpec>()
                                           : synth::FaultSpec{synth::NoFault{}});
    }
    synth::ConditionOptions opts;
    opts.run_offset_sd_ms = j.value("run_offset_sd_ms", 0.0);
    opts.gen.gap_ms = j.value("gap_ms", opts.gen.gap_ms);
    opts.gen.capture_warmup = j.value("capture_warmup", true);
    if (j.contains("first_warmup_ms")) opts.gen.first_warmup_ms = j.at("first_warmup_ms").get<double>();
    s.runs = synth::plan_condition(dist, meta, n_runs, seed, faults, opts);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario file: ") + e.what(), 1);
  }
}

}  // namespace latval
