#pragma once

// CSV formats.
//
//   events:  time,series,class      integer sample time, series index, class name
//   signal:  sample,value
//   codes:   sample,TS1,...,TSn     per-sample class codes, 0 = no event
//   report:  metric,pair,class_a,class_b,buffer,value

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "mecs/event_model.hpp"
#include "mecs/signal.hpp"

namespace mecs::io {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(ErrorCode::InvalidArgument, "cannot format number");
  return {buf, end};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t at = 0;
  while (true) {
    const auto comma = line.find(',', at);
    fields.push_back(trim(line.substr(at, comma == std::string_view::npos ? std::string_view::npos : comma - at)));
    if (comma == std::string_view::npos) break;
    at = comma + 1;
  }
  return fields;
}

[[noreturn]] inline void fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size() || field.empty())
    fail(line_no, std::string("invalid ") + what + " '" + std::string(field) + "'");
  return value;
}

// Calls on_row(fields, line_no) for each non-empty line after the header. An
// input with no non-blank lines at all reads as empty.
template <typename OnRow>
void read_rows(std::istream& in, std::string_view header, OnRow&& on_row) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (!seen_header) {
      if (view != header) fail(line_no, "expected header '" + std::string(header) + "'");
      seen_header = true;
      continue;
    }
    on_row(split(view), line_no);
  }
}

}  // namespace detail

inline constexpr std::string_view kEventHeader = "time,series,class";
inline constexpr std::string_view kSignalHeader = "sample,value";
inline constexpr std::string_view kReportHeader = "metric,pair,class_a,class_b,buffer,value";

/// Reads an event file. Class names must be registered; series indices must
/// be below `n_series`.
inline EventDataset read_events(std::istream& in, const ClassRegistry& classes, std::size_t n_series) {
  std::vector<RawEvent> raw;
  detail::read_rows(in, kEventHeader, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() != 3) detail::fail(line_no, "expected 3 fields, got " + std::to_string(f.size()));
    const auto time = detail::parse_number<std::int64_t>(f[0], line_no, "time");
    const auto series = detail::parse_number<std::size_t>(f[1], line_no, "series");
    const auto cls = classes.find(std::string(f[2]));
    if (!cls) detail::fail(line_no, "unknown class '" + std::string(f[2]) + "'");
    if (series >= n_series) detail::fail(line_no, "series " + std::to_string(series) + " out of range");
    if (time < 0) detail::fail(line_no, "negative time");
    raw.push_back({time, series, *cls});
  });
  try {
    return EventDataset::from_events(n_series, classes.size(), raw);
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, std::string("event file: ") + e.what());
  }
}

inline void write_events(std::ostream& out, const EventDataset& ds, const ClassRegistry& classes) {
  if (classes.size() != ds.n_classes())
    throw Error(ErrorCode::InvalidArgument, "class registry does not match the dataset");
  out << kEventHeader << '\n';
  for (const auto& e : ds.events()) out << e.time << ',' << e.series << ',' << classes.name(e.class_id.value) << '\n';
}

/// Reads a signal file; rows must be numbered 0, 1, 2, ...
inline Signal read_signal(std::istream& in, double rate = 1.0) {
  Signal s;
  s.rate = rate;
  detail::read_rows(in, kSignalHeader, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() != 2) detail::fail(line_no, "expected 2 fields, got " + std::to_string(f.size()));
    const auto sample = detail::parse_number<std::size_t>(f[0], line_no, "sample index");
    if (sample != s.samples.size()) detail::fail(line_no, "sample indices must be consecutive from 0");
    s.samples.push_back(detail::parse_number<double>(f[1], line_no, "value"));
  });
  s.validate();
  return s;
}

inline void write_signal(std::ostream& out, const Signal& s) {
  out << kSignalHeader << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) out << i << ',' << format_double(s.samples[i]) << '\n';
}

inline void write_codes(std::ostream& out, const std::vector<std::vector<int>>& series) {
  out << "sample";
  for (std::size_t n = 0; n < series.size(); ++n) out << ",TS" << n + 1;
  out << '\n';
  const std::size_t len = series.empty() ? 0 : series.front().size();
  for (std::size_t t = 0; t < len; ++t) {
    out << t;
    for (const auto& s : series) out << ',' << s.at(t);
    out << '\n';
  }
}

inline std::vector<std::vector<int>> read_codes(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<int>> series;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    const auto f = detail::split(view);
    if (series.empty()) {
      if (f.size() < 2 || f[0] != "sample") detail::fail(line_no, "expected header 'sample,TS1,...'");
      series.resize(f.size() - 1);
      continue;
    }
    if (f.size() != series.size() + 1) detail::fail(line_no, "wrong field count");
    const auto sample = detail::parse_number<std::size_t>(f[0], line_no, "sample index");
    if (sample != series.front().size()) detail::fail(line_no, "sample indices must be consecutive from 0");
    for (std::size_t n = 0; n < series.size(); ++n)
      series[n].push_back(detail::parse_number<int>(f[n + 1], line_no, "class code"));
  }
  if (series.empty()) detail::fail(1, "missing header");
  return series;
}

struct ReportRow {
  std::string metric;
  std::string pair;
  std::string class_a;
  std::string class_b;
  std::optional<std::size_t> buffer;
  double value{0.0};

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Long-format rows for one report. Only class pairs present in
/// `s_pairwise` are listed.
inline std::vector<ReportRow> report_rows(const SyncReport& report, const ClassRegistry& classes,
                                          std::optional<std::size_t> buffer = std::nullopt) {
  std::set<std::pair<std::size_t, std::size_t>> computed;
  for (const auto& s : report.s_pairwise) computed.emplace(s.class_a, s.class_b);
  std::vector<ReportRow> rows;
  for (std::size_t k = 0; k < report.q_per_class.size(); ++k)
    if (computed.contains({k, k})) rows.push_back({"Q", "", classes.name(k), classes.name(k), buffer, report.q_per_class[k]});
  for (const auto& [a, b] : computed)
    if (a != b) rows.push_back({"Q_inter", "", classes.name(a), classes.name(b), buffer, report.q_inter[a][b]});
  for (const auto& s : report.s_pairwise)
    rows.push_back({"S", std::to_string(s.series_i) + "-" + std::to_string(s.series_j), classes.name(s.class_a),
                    classes.name(s.class_b), buffer, s.value});
  rows.push_back({"SI", "", "", "", buffer, report.si_global});
  if (report.si_weighted) rows.push_back({"SI_W", "", "", "", buffer, *report.si_weighted});
  rows.push_back({"averaging_dilution", "", "", "", buffer, report.averaging_dilution ? 1.0 : 0.0});
  return rows;
}

inline void write_report_header(std::ostream& out) { out << kReportHeader << '\n'; }

inline void write_report_rows(std::ostream& out, const std::vector<ReportRow>& rows) {
  for (const auto& r : rows) {
    out << r.metric << ',' << r.pair << ',' << r.class_a << ',' << r.class_b << ',';
    if (r.buffer) out << *r.buffer;
    out << ',' << format_double(r.value) << '\n';
  }
}

inline std::vector<ReportRow> read_report(std::istream& in) {
  std::vector<ReportRow> rows;
  detail::read_rows(in, kReportHeader, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() != 6) detail::fail(line_no, "expected 6 fields, got " + std::to_string(f.size()));
    ReportRow r{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]), std::nullopt, 0.0};
    if (!f[4].empty()) r.buffer = detail::parse_number<std::size_t>(f[4], line_no, "buffer index");
    r.value = detail::parse_number<double>(f[5], line_no, "value");
    rows.push_back(std::move(r));
  });
  return rows;
}

}  // namespace mecs::io
