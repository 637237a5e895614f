#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace latval {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text in an input file. line() is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed rows that violate a stream invariant (ordering, alternation).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A value that parses but is outside its domain (negative latency, NaN, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

// Capture timestamps are kept as integer nanoseconds so that the wire format
// (seconds, up to 9 decimals) round-trips exactly.
struct Nanos {
  std::int64_t count = 0;

  friend constexpr auto operator<=>(Nanos, Nanos) = default;
  constexpr Nanos operator-(Nanos o) const { return {count - o.count}; }
  constexpr Nanos operator+(Nanos o) const { return {count + o.count}; }

  constexpr double seconds() const { return static_cast<double>(count) / 1e9; }
  constexpr double millis() const { return static_cast<double>(count) / 1e6; }
};

inline constexpr Nanos kDefaultSamplePeriod{100};  // 10 MS/s

// Parses "<int>[.<up to 9 digits>]" seconds. Throws std::invalid_argument.
Nanos parse_seconds(std::string_view text);
// Canonical form: always 9 decimals.
std::string format_seconds(Nanos t);

// ---------------------------------------------------------------------------
// External transition stream
// ---------------------------------------------------------------------------

enum class Level : std::uint8_t { low = 0, high = 1 };

constexpr Level opposite(Level l) { return l == Level::low ? Level::high : Level::low; }

struct TransitionRecord {
  Nanos time;
  Level level = Level::low;

  friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

class TransitionStream {
 public:
  TransitionStream() = default;

  // Validates strict time monotonicity, non-negative times and level
  // alternation; throws IntegrityError. The initial level is inferred from the
  // first record (a leading falling edge means the line started high).
  explicit TransitionStream(std::vector<TransitionRecord> records,
                            Nanos sample_period = kDefaultSamplePeriod);

  std::span<const TransitionRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  Nanos sample_period() const { return sample_period_; }
  Level initial_level() const { return initial_level_; }

 private:
  std::vector<TransitionRecord> records_;
  Nanos sample_period_ = kDefaultSamplePeriod;
  Level initial_level_ = Level::low;
};

TransitionStream parse_transition_csv(std::string_view text,
                                      Nanos sample_period = kDefaultSamplePeriod);
TransitionStream load_transition_stream(const std::filesystem::path& path,
                                        Nanos sample_period = kDefaultSamplePeriod);
std::string serialize_transition_csv(const TransitionStream& stream);

// ---------------------------------------------------------------------------
// Software timing log
// ---------------------------------------------------------------------------

struct TimingRow {
  std::int64_t iteration = 0;
  double latency_ms = 0.0;

  friend bool operator==(const TimingRow&, const TimingRow&) = default;
};

class SoftwareTimingLog {
 public:
  SoftwareTimingLog() = default;

  // Throws ValueError on duplicate/descending iteration indices or on
  // non-positive / non-finite latencies. Messages name the offending row.
  SoftwareTimingLog(std::string run_id, std::size_t iterations_expected,
                    std::vector<TimingRow> rows);

  const std::string& run_id() const { return run_id_; }
  std::size_t iterations_expected() const { return iterations_expected_; }
  std::span<const TimingRow> rows() const { return rows_; }
  std::vector<double> latencies() const;

  bool complete() const { return rows_.size() == iterations_expected_; }

 private:
  std::string run_id_;
  std::size_t iterations_expected_ = 0;
  std::vector<TimingRow> rows_;
};

SoftwareTimingLog parse_software_csv(std::string_view text, std::string run_id,
                                     std::size_t expected);
SoftwareTimingLog load_software_log(const std::filesystem::path& path, std::size_t expected,
                                    std::optional<std::string> run_id = std::nullopt);
// Latencies are written in shortest round-trip form.
std::string serialize_software_csv(const SoftwareTimingLog& log);

// ---------------------------------------------------------------------------
// Run metadata
// ---------------------------------------------------------------------------

struct Architecture {
  enum class Kind { gpu_engine, cpu_runtime, other };
  Kind kind = Kind::other;
  std::string label;  // wire name; equals the enum name for known kinds

  static Architecture from_string(std::string_view s);
  static Architecture gpu_engine() { return from_string("gpu_engine"); }
  static Architecture cpu_runtime() { return from_string("cpu_runtime"); }
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct Condition {
  enum class Kind { baseline, memory_stress_light, storage_stress, other };
  Kind kind = Kind::other;
  std::string label;

  static Condition from_string(std::string_view s);
  static Condition baseline() { return from_string("baseline"); }
  static Condition memory_stress_light() { return from_string("memory_stress_light"); }
  static Condition storage_stress() { return from_string("storage_stress"); }
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct RunMetadata {
  std::string run_id;
  Architecture architecture;
  Condition condition;
  double marker_width_ms = 0.0;
  double marker_threshold_ms = 0.0;
  std::size_t iterations_expected = 0;
  std::size_t warmup_iterations = 0;
  Nanos sample_period = kDefaultSamplePeriod;
  // Set by the operator when the probed line was found not to be the wired
  // pin. Cannot be inferred from the trace.
  bool gpio_line_misobserved = false;

  // Throws ValueError when the marker/threshold configuration is inconsistent.
  void validate() const;

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

RunMetadata parse_run_metadata(std::string_view json_text);
RunMetadata load_run_metadata(const std::filesystem::path& path);
std::string serialize_run_metadata(const RunMetadata& meta);

// Whole-file read; throws Error when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace latval
