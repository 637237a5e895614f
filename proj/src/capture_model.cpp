#include "latval/capture_model.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace latval {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Splits on '\n'; a trailing newline does not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

bool split_pair(std::string_view line, std::string_view& a, std::string_view& b) {
  auto comma = line.find(',');
  if (comma == std::string_view::npos) return false;
  if (line.find(',', comma + 1) != std::string_view::npos) return false;
  a = trim(line.substr(0, comma));
  b = trim(line.substr(comma + 1));
  return true;
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

// Common header/body walk for both CSV formats. Calls row(fields..., line)
// for each non-blank body line.
template <typename RowFn>
void walk_csv(std::string_view text, std::string_view header, RowFn&& row) {
  auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != header) {
    throw ParseError("expected header '" + std::string(header) + "'", 1);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty()) continue;
    std::string_view a, b;
    if (!split_pair(line, a, b)) throw ParseError("expected two comma-separated fields", i + 1);
    row(a, b, i + 1);
  }
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(at_line(line) + what), line_(line) {}

// ---------------------------------------------------------------------------

Nanos parse_seconds(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty time field");
  auto dot = text.find('.');
  auto int_part = text.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? "" : text.substr(dot + 1);
  if (int_part.empty()) throw std::invalid_argument("missing integer seconds");
  if (dot != std::string_view::npos && frac_part.empty())
    throw std::invalid_argument("missing fractional digits");
  if (frac_part.size() > 9)
    throw std::invalid_argument("more than 9 fractional digits (finer than 1 ns)");
  auto all_digits = [](std::string_view s) {
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (!all_digits(int_part) || !all_digits(frac_part))
    throw std::invalid_argument("time must be an unsigned decimal number");

  std::int64_t whole = 0;
  auto [p, ec] = std::from_chars(int_part.data(), int_part.data() + int_part.size(), whole);
  if (ec != std::errc{} || whole > std::numeric_limits<std::int64_t>::max() / 1'000'000'000)
    throw std::invalid_argument("time out of range");
  std::int64_t frac = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    frac = frac * 10 + (i < frac_part.size() ? frac_part[i] - '0' : 0);
  }
  return Nanos{whole * 1'000'000'000 + frac};
}

std::string format_seconds(Nanos t) {
  const auto whole = t.count / 1'000'000'000;
  const auto frac = t.count % 1'000'000'000;
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%lld.%09lld", static_cast<long long>(whole),
                static_cast<long long>(frac));
  return buf.data();
}

// ---------------------------------------------------------------------------

TransitionStream::TransitionStream(std::vector<TransitionRecord> records, Nanos sample_period)
    : records_(std::move(records)), sample_period_(sample_period) {
  if (sample_period_.count <= 0) throw IntegrityError("sample period must be positive");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].time.count < 0)
      throw IntegrityError("record " + std::to_string(i) + ": negative time");
    if (i == 0) continue;
    if (records_[i].time <= records_[i - 1].time)
      throw IntegrityError("record " + std::to_string(i) + ": time does not strictly increase");
    if (records_[i].level == records_[i - 1].level)
      throw IntegrityError("record " + std::to_string(i) + ": repeated level");
  }
  if (!records_.empty()) initial_level_ = opposite(records_.front().level);
}

TransitionStream parse_transition_csv(std::string_view text, Nanos sample_period) {
  std::vector<TransitionRecord> records;
  walk_csv(text, "time_s,level", [&](std::string_view t, std::string_view l, std::size_t line) {
    TransitionRecord rec;
    try {
      rec.time = parse_seconds(t);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line);
    }
    if (l == "0") {
      rec.level = Level::low;
    } else if (l == "1") {
      rec.level = Level::high;
    } else {
      throw ParseError("level must be 0 or 1", line);
    }
    if (!records.empty()) {
      if (rec.time <= records.back().time)
        throw IntegrityError(at_line(line) + "time does not strictly increase");
      if (rec.level == records.back().level)
        throw IntegrityError(at_line(line) + "repeated level");
    }
    records.push_back(rec);
  });
  return TransitionStream(std::move(records), sample_period);
}

TransitionStream load_transition_stream(const std::filesystem::path& path, Nanos sample_period) {
  return parse_transition_csv(read_file(path), sample_period);
}

std::string serialize_transition_csv(const TransitionStream& stream) {
  std::string out = "time_s,level\n";
  out.reserve(out.size() + stream.size() * 14);
  for (const auto& r : stream.records()) {
    out += format_seconds(r.time);
    out += r.level == Level::high ? ",1\n" : ",0\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

SoftwareTimingLog::SoftwareTimingLog(std::string run_id, std::size_t iterations_expected,
                                     std::vector<TimingRow> rows)
    : run_id_(std::move(run_id)), iterations_expected_(iterations_expected), rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    const std::string where = "row " + std::to_string(i) + " (iteration " +
                              std::to_string(r.iteration) + "): ";
    if (r.iteration < 0) throw ValueError(where + "negative iteration index");
    if (i > 0 && r.iteration <= rows_[i - 1].iteration)
      throw ValueError(where + (r.iteration == rows_[i - 1].iteration
                                    ? "duplicate iteration index"
                                    : "iteration indices not ascending"));
    if (!std::isfinite(r.latency_ms)) throw ValueError(where + "non-finite latency");
    if (r.latency_ms <= 0.0) throw ValueError(where + "latency must be positive");
  }
}

std::vector<double> SoftwareTimingLog::latencies() const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.latency_ms);
  return out;
}

SoftwareTimingLog parse_software_csv(std::string_view text, std::string run_id,
                                     std::size_t expected) {
  std::vector<TimingRow> rows;
  walk_csv(text, "iteration,latency_ms",
           [&](std::string_view it, std::string_view lat, std::size_t line) {
             TimingRow row;
             auto [p1, e1] = std::from_chars(it.data(), it.data() + it.size(), row.iteration);
             if (e1 != std::errc{} || p1 != it.data() + it.size())
               throw ParseError("iteration must be an integer", line);
             auto [p2, e2] = std::from_chars(lat.data(), lat.data() + lat.size(), row.latency_ms);
             if (e2 != std::errc{} || p2 != lat.data() + lat.size())
               throw ParseError("latency must be a decimal number", line);
             if (!std::isfinite(row.latency_ms))
               throw ValueError(at_line(line) + "non-finite latency");
             if (row.latency_ms <= 0.0)
               throw ValueError(at_line(line) + "latency must be positive");
             if (row.iteration < 0)
               throw ValueError(at_line(line) + "negative iteration index");
             if (!rows.empty() && row.iteration == rows.back().iteration)
               throw ValueError(at_line(line) + "duplicate iteration index " + std::string(it));
             if (!rows.empty() && row.iteration < rows.back().iteration)
               throw ValueError(at_line(line) + "iteration indices not ascending");
             rows.push_back(row);
           });
  return SoftwareTimingLog(std::move(run_id), expected, std::move(rows));
}

SoftwareTimingLog load_software_log(const std::filesystem::path& path, std::size_t expected,
                                    std::optional<std::string> run_id) {
  return parse_software_csv(read_file(path), run_id.value_or(path.stem().string()), expected);
}

std::string serialize_software_csv(const SoftwareTimingLog& log) {
  std::string out = "iteration,latency_ms\n";
  std::array<char, 64> buf{};
  for (const auto& r : log.rows()) {
    out += std::to_string(r.iteration);
    out += ',';
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), r.latency_ms);
    out.append(buf.data(), end);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

Architecture Architecture::from_string(std::string_view s) {
  Architecture a;
  a.label = std::string(s);
  if (s == "gpu_engine") a.kind = Kind::gpu_engine;
  else if (s == "cpu_runtime") a.kind = Kind::cpu_runtime;
  else a.kind = Kind::other;
  return a;
}

Condition Condition::from_string(std::string_view s) {
  Condition c;
  c.label = std::string(s);
  if (s == "baseline") c.kind = Kind::baseline;
  else if (s == "memory_stress_light") c.kind = Kind::memory_stress_light;
  else if (s == "storage_stress") c.kind = Kind::storage_stress;
  else c.kind = Kind::other;
  return c;
}

void RunMetadata::validate() const {
  if (!(marker_width_ms > 0.0) || !std::isfinite(marker_width_ms))
    throw ValueError("marker_width_ms must be positive");
  if (!(marker_threshold_ms > 0.0) || !std::isfinite(marker_threshold_ms))
    throw ValueError("marker_threshold_ms must be positive");
  if (!(marker_threshold_ms < marker_width_ms))
    throw ValueError("marker_threshold_ms must be below marker_width_ms");
  if (sample_period.count <= 0) throw ValueError("sample_period_s must be positive");
}

RunMetadata parse_run_metadata(std::string_view json_text) {
  RunMetadata m;
  try {
    const auto j = json::parse(json_text);
    m.run_id = j.at("run_id").get<std::string>();
    m.architecture = Architecture::from_string(j.at("architecture").get<std::string>());
    m.condition = Condition::from_string(j.at("condition").get<std::string>());
    m.marker_width_ms = j.at("marker_width_ms").get<double>();
    m.marker_threshold_ms = j.at("marker_threshold_ms").get<double>();
    m.iterations_expected = j.at("iterations_expected").get<std::size_t>();
    m.warmup_iterations = j.at("warmup_iterations").get<std::size_t>();
    const double period_s = j.value("sample_period_s", kDefaultSamplePeriod.seconds());
    m.sample_period = Nanos{static_cast<std::int64_t>(std::llround(period_s * 1e9))};
    m.gpio_line_misobserved = j.value("gpio_line_misobserved", false);
  } catch (const json::exception& e) {
    throw ParseError(std::string("metadata: ") + e.what(), 1);
  }
  m.validate();
  return m;
}

RunMetadata load_run_metadata(const std::filesystem::path& path) {
  return parse_run_metadata(read_file(path));
}

std::string serialize_run_metadata(const RunMetadata& m) {
  json j;
  j["run_id"] = m.run_id;
  j["architecture"] = m.architecture.label;
  j["condition"] = m.condition.label;
  j["marker_width_ms"] = m.marker_width_ms;
  j["marker_threshold_ms"] = m.marker_threshold_ms;
  j["iterations_expected"] = m.iterations_expected;
  j["warmup_iterations"] = m.warmup_iterations;
  j["sample_period_s"] = m.sample_period.seconds();
  if (m.gpio_line_misobserved) j["gpio_line_misobserved"] = true;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace latval
