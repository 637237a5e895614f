#include <gtest/gtest.h>

#include <random>

#include "latval/commands.hpp"
#include "latval/synth.hpp"
#include "latval/validity.hpp"

using namespace latval;
using K = FailureMode::Kind;
using VC = ValidityClass;

namespace {

RunReport run_with(const synth::FaultSpec& fault, std::uint64_t seed = 1,
                   synth::GenOptions opts = {}) {
  const auto meta = synth::gpu_engine_meta("r", Condition::storage_stress());
  const auto g = synth::gen_run(synth::gpu_storage_dist(), meta, fault, seed, opts);
  return analyze_run(g.log, g.stream, g.meta);
}

}  // namespace

TEST(Decoupling, StorageStressRunsAreClassB) {
  synth::GenOptions no_warmup;
  no_warmup.capture_warmup = false;

  auto collapse = run_with(synth::PostMarkerCollapse{}, 1, no_warmup);
  EXPECT_EQ(collapse.decoupling.failure_mode.kind, K::post_marker_collapse);
  EXPECT_EQ(collapse.edges, 2u);
  EXPECT_EQ(collapse.validity, VC::B_valid_runtime_incomplete_sync);

  auto partial = run_with(synth::PartialLoss{0.4}, 2, no_warmup);
  ASSERT_EQ(partial.decoupling.failure_mode.kind, K::partial_transition_loss);
  EXPECT_NEAR(*partial.decoupling.failure_mode.loss_fraction, 0.40, 1e-12);
  EXPECT_EQ(partial.edges, 122u);
  EXPECT_EQ(partial.validity, VC::B_valid_runtime_incomplete_sync);

  auto empty = run_with(synth::EmptyCapture{}, 3, no_warmup);
  EXPECT_EQ(empty.decoupling.failure_mode.kind, K::complete_acquisition_failure);
  EXPECT_EQ(empty.validity, VC::B_valid_runtime_incomplete_sync);

  for (const auto* r : {&collapse, &partial, &empty}) {
    EXPECT_TRUE(r->decoupling.software_complete);
    EXPECT_EQ(r->decoupling.software_rows, 100u);
    EXPECT_TRUE(r->decoupling.decoupled());
    EXPECT_EQ(exit_code(r->validity), 0);
  }
}

TEST(Decoupling, GpioFlagTurnsEmptyCaptureIntoMethodologyFailure) {
  auto meta = synth::gpu_engine_meta("r", Condition::baseline());
  meta.gpio_line_misobserved = true;
  const auto g = synth::gen_run(synth::gpu_baseline_dist(), meta, synth::EmptyCapture{}, 4);
  const auto r = analyze_run(g.log, g.stream, g.meta);
  EXPECT_EQ(r.decoupling.failure_mode.kind, K::gpio_line_misobservation);
  EXPECT_EQ(r.validity, VC::D_methodology_failure);
}

TEST(Decoupling, MarkerOverlapIsMethodologyFailure) {
  const auto meta = synth::cpu_runtime_meta("r", Condition::baseline());
  const auto g = synth::gen_run(synth::cpu_baseline_dist(), meta, synth::MarkerOverlap{200.0}, 5);
  const auto r = analyze_run(g.log, g.stream, g.meta);
  EXPECT_EQ(r.decoupling.failure_mode.kind, K::marker_overlap);
  EXPECT_EQ(r.validity, VC::D_methodology_failure);
  EXPECT_FALSE(r.separation.pass);
  EXPECT_EQ(exit_code(r.validity), 3);
  EXPECT_FALSE(r.software.has_value());
}

TEST(Decoupling, IncompleteSoftwareLogIsClassC) {
  const auto meta = synth::gpu_engine_meta("r", Condition::baseline());
  const auto g = synth::gen_run(synth::gpu_baseline_dist(), meta, synth::NoFault{}, 6);
  std::vector<TimingRow> rows(g.log.rows().begin(), g.log.rows().end());
  rows.resize(87);
  const SoftwareTimingLog short_log(g.log.run_id(), 100, rows);
  const auto r = analyze_run(short_log, g.stream, g.meta);
  EXPECT_EQ(r.validity, VC::C_invalid_runtime);
  EXPECT_EQ(exit_code(r.validity), 2);
  EXPECT_FALSE(r.decoupling.decoupled());
}

TEST(Decoupling, IncompleteLogWithDegradedStreamStaysC) {
  const auto meta = synth::gpu_engine_meta("r", Condition::baseline());
  const auto g = synth::gen_run(synth::gpu_baseline_dist(), meta, synth::PartialLoss{0.3}, 7);
  std::vector<TimingRow> rows(g.log.rows().begin(), g.log.rows().end());
  rows.resize(50);
  const auto r = analyze_run(SoftwareTimingLog(g.log.run_id(), 100, rows), g.stream, g.meta);
  EXPECT_EQ(r.validity, VC::C_invalid_runtime);
}

TEST(Decoupling, RunIdMismatchThrows) {
  const auto meta = synth::gpu_engine_meta("r", Condition::baseline());
  const auto g = synth::gen_run(synth::gpu_baseline_dist(), meta, synth::NoFault{}, 8);
  const SoftwareTimingLog other(
      "someone_else", 100, std::vector<TimingRow>(g.log.rows().begin(), g.log.rows().end()));
  EXPECT_THROW(detect_decoupling(other, PairingResult{}, g.meta, 0), std::exception);
}

TEST(Validity, PrecedenceTable) {
  DecouplingReport rep;
  rep.software_complete = true;
  rep.failure_mode = FailureMode::healthy();
  EXPECT_EQ(classify_run_validity(rep, std::nullopt), VC::A_valid_runtime_and_sync);

  MarkerSeparationCheck failed;
  failed.pass = false;
  EXPECT_EQ(classify_run_validity(rep, failed), VC::D_methodology_failure);

  rep.failure_mode = FailureMode::partial_loss(0.2);
  EXPECT_EQ(classify_run_validity(rep, std::nullopt), VC::B_valid_runtime_incomplete_sync);

  rep.software_complete = false;
  EXPECT_EQ(classify_run_validity(rep, std::nullopt), VC::C_invalid_runtime);
  EXPECT_EQ(classify_run_validity(rep, failed), VC::D_methodology_failure);

  rep.failure_mode = FailureMode::of(K::marker_overlap);
  EXPECT_EQ(classify_run_validity(rep, std::nullopt), VC::D_methodology_failure);
}

// Degrading any input never improves the class.
TEST(Validity, MonotoneUnderDegradation) {
  const std::vector<FailureMode> modes{
      FailureMode::healthy(),
      FailureMode::partial_loss(0.1),
      FailureMode::of(K::post_marker_collapse),
      FailureMode::of(K::complete_acquisition_failure),
      FailureMode::of(K::pairing_failure),
      FailureMode::of(K::marker_overlap),
      FailureMode::of(K::gpio_line_misobservation),
  };
  MarkerSeparationCheck ok;
  ok.pass = true;
  MarkerSeparationCheck bad;
  bad.pass = false;
  for (const auto& m : modes) {
    DecouplingReport complete;
    complete.software_complete = true;
    complete.failure_mode = m;
    DecouplingReport incomplete = complete;
    incomplete.software_complete = false;

    const auto base = classify_run_validity(complete, ok);
    EXPECT_GE(classify_run_validity(incomplete, ok), base) << to_string(m.kind);
    EXPECT_GE(classify_run_validity(complete, bad), base) << to_string(m.kind);
    EXPECT_GE(classify_run_validity(incomplete, bad), classify_run_validity(incomplete, ok));
    if (!m.is_healthy()) {
      DecouplingReport healthy = complete;
      healthy.failure_mode = FailureMode::healthy();
      EXPECT_GE(base, classify_run_validity(healthy, ok)) << to_string(m.kind);
    }
  }
}

TEST(ClaimFilter, MixedCorpus) {
  const std::vector<VC> runs{VC::A_valid_runtime_and_sync, VC::B_valid_runtime_incomplete_sync,
                             VC::A_valid_runtime_and_sync, VC::D_methodology_failure};
  const auto v = filter_for_external_claims(runs);
  EXPECT_EQ(v.external, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(v.software_only, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(v.excluded, (std::vector<std::size_t>{3}));
}

TEST(ClaimFilter, PartitionProperty) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<VC> runs(rng() % 30);
    for (auto& r : runs) r = static_cast<VC>(rng() % 4);
    const auto v = filter_for_external_claims(runs);
    EXPECT_EQ(v.software_only.size() + v.excluded.size(), runs.size());
    for (auto i : v.external) EXPECT_EQ(runs[i], VC::A_valid_runtime_and_sync);
    for (auto i : v.excluded) EXPECT_GE(runs[i], VC::C_invalid_runtime);
  }
}

TEST(Codes, RoundTrip) {
  for (auto c : {VC::A_valid_runtime_and_sync, VC::B_valid_runtime_incomplete_sync,
                 VC::C_invalid_runtime, VC::D_methodology_failure}) {
    EXPECT_EQ(validity_from_code(code(c)), c);
  }
  for (int k = 0; k <= static_cast<int>(K::pairing_failure); ++k) {
    EXPECT_EQ(failure_kind_from_string(to_string(static_cast<K>(k))), static_cast<K>(k));
  }
}

// The detector reproduces the generator's own expectation for every fault.
TEST(Decoupling, AgreesWithGeneratorTruth) {
  const std::vector<synth::FaultSpec> faults{
      synth::NoFault{},          synth::PostMarkerCollapse{}, synth::PartialLoss{0.1},
      synth::PartialLoss{0.4},   synth::PartialLoss{0.99},    synth::EmptyCapture{},
      synth::MarkerOverlap{2.0}, synth::Jitter{0.05},
  };
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    for (const auto& f : faults) {
      for (bool warm : {true, false}) {
        synth::GenOptions opts;
        opts.capture_warmup = warm;
        const auto seed = rng();
        const auto meta = synth::gpu_engine_meta("r", Condition::baseline());
        const auto g = synth::gen_run(synth::gpu_storage_dist(), meta, f, seed, opts);
        const auto r = analyze_run(g.log, g.stream, g.meta);
        ASSERT_EQ(r.decoupling.failure_mode.kind, g.truth.expected_mode.kind)
            << synth::fault_name(f) << " seed " << seed;
        if (g.truth.expected_mode.loss_fraction) {
          ASSERT_NEAR(*r.decoupling.failure_mode.loss_fraction, *g.truth.expected_mode.loss_fraction,
                      1e-12);
        }
        ASSERT_EQ(r.validity, g.truth.expected_class) << synth::fault_name(f) << " seed " << seed;
      }
    }
  }
}
