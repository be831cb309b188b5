#include "aed/signal.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace aed {

void SignalSeries::validate(bool checked) const {
  if (timestamps.size() != watts.size())
    fail(errc::shape, "series timestamp/watt lengths differ: " + std::to_string(timestamps.size()) +
                          " vs " + std::to_string(watts.size()));
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] <= timestamps[i - 1])
      fail(errc::parse, "series timestamps not strictly increasing at index " + std::to_string(i));
  if (checked) {
    for (std::size_t i = 0; i < watts.size(); ++i) {
      if (!std::isfinite(watts[i]))
        fail(errc::numeric, "series has non-finite reading at index " + std::to_string(i));
      if (watts[i] < 0.0)
        fail(errc::numeric, "series has negative reading at index " + std::to_string(i));
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line_no,
                             const std::string& what) {
  fail(errc::parse, path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

SignalSeries load_series(const std::filesystem::path& path, SeriesFormat /*format*/,
                         SeriesRole role, bool checked) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open series file: " + path.string());

  SignalSeries series;
  series.role = std::move(role);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;

    // first column: integer unix seconds
    const char* begin = sv.data();
    const char* end = sv.data() + sv.size();
    std::int64_t ts = 0;
    auto [p1, ec1] = std::from_chars(begin, end, ts);
    if (ec1 != std::errc()) parse_fail(path, line_no, "expected integer timestamp");

    // separator: whitespace run, optionally with one comma
    const char* p = p1;
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p < end && *p == ',') ++p;
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == p1 || p >= end) parse_fail(path, line_no, "expected two columns");

    double w = 0.0;
    auto [p2, ec2] = std::from_chars(p, end, w);
    if (ec2 != std::errc()) parse_fail(path, line_no, "expected numeric watts");
    if (trim(std::string_view(p2, static_cast<std::size_t>(end - p2))).size() != 0)
      parse_fail(path, line_no, "trailing garbage after watts column");
    if (!std::isfinite(w)) parse_fail(path, line_no, "non-finite watts");
    if (checked && w < 0.0) parse_fail(path, line_no, "negative watts");

    if (!series.timestamps.empty() && ts <= series.timestamps.back())
      parse_fail(path, line_no, "non-monotonic timestamp " + std::to_string(ts) +
                                    " (previous " + std::to_string(series.timestamps.back()) + ")");
    series.timestamps.push_back(ts);
    series.watts.push_back(w);
  }
  if (series.empty()) fail(errc::parse, "empty series: " + path.string());
  return series;
}

void save_series(const std::filesystem::path& path, const SignalSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io, "cannot write series file: " + path.string());
  std::array<char, 64> buf;
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << series.timestamps[i] << ' ';
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), series.watts[i]);
    out.write(buf.data(), p - buf.data());
    out << '\n';
  }
  if (!out) fail(errc::io, "failed writing series file: " + path.string());
}

std::optional<NormalizationStats> builtin_stats(std::string_view appliance_name) {
  std::string key;
  key.reserve(appliance_name.size());
  for (char c : appliance_name) {
    if (c == ' ' || c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  struct Row {
    std::string_view name;
    double mean, std;
  };
  static constexpr Row rows[] = {
      {"aggregate", 522, 814},  {"mains", 522, 814},          {"kettle", 700, 1000},
      {"microwave", 500, 800},  {"fridge", 200, 400},         {"dishwasher", 700, 1000},
      {"washingmachine", 400, 700},
  };
  for (const Row& r : rows)
    if (key == r.name) return NormalizationStats{r.mean, r.std};
  return std::nullopt;
}

NormalizationStats compute_stats(std::span<const double> watts) {
  if (watts.empty()) fail(errc::config, "cannot compute stats of empty series");
  double sum = 0.0;
  for (double w : watts) sum += w;
  const double mean = sum / static_cast<double>(watts.size());
  double sq = 0.0;
  for (double w : watts) sq += (w - mean) * (w - mean);
  return {mean, std::sqrt(sq / static_cast<double>(watts.size()))};
}

std::vector<double> normalize(std::span<const double> watts, const NormalizationStats& stats) {
  stats.validate();
  std::vector<double> out(watts.size());
  for (std::size_t i = 0; i < watts.size(); ++i) out[i] = (watts[i] - stats.mean) / stats.std;
  return out;
}

std::vector<double> denormalize(std::span<const double> values, const NormalizationStats& stats) {
  stats.validate();
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * stats.std + stats.mean;
  return out;
}

SignalSeries normalize(const SignalSeries& series, const NormalizationStats& stats) {
  SignalSeries out = series;
  out.watts = normalize(std::span<const double>(series.watts), stats);
  return out;
}

SignalSeries denormalize(const SignalSeries& series, const NormalizationStats& stats) {
  SignalSeries out = series;
  out.watts = denormalize(std::span<const double>(series.watts), stats);
  return out;
}

std::pair<SignalSeries, SignalSeries> align_resample(const SignalSeries& mains,
                                                     const SignalSeries& appliance,
                                                     std::int64_t period,
                                                     std::int64_t staleness_mult) {
  if (period <= 0) fail(errc::config, "resample period must be > 0");
  if (staleness_mult < 1) fail(errc::config, "staleness multiplier must be >= 1");
  if (mains.empty() || appliance.empty()) fail(errc::config, "cannot align empty series");

  const std::int64_t t0 = std::max(mains.timestamps.front(), appliance.timestamps.front());
  const std::int64_t t1 = std::min(mains.timestamps.back(), appliance.timestamps.back());
  if (t0 > t1)
    fail(errc::config, "series have no temporal overlap: [" +
                           std::to_string(mains.timestamps.front()) + ", " +
                           std::to_string(mains.timestamps.back()) + "] vs [" +
                           std::to_string(appliance.timestamps.front()) + ", " +
                           std::to_string(appliance.timestamps.back()) + "]");

  const std::int64_t stale = staleness_mult * period;
  SignalSeries out_m, out_a;
  out_m.role = mains.role;
  out_a.role = appliance.role;

  std::size_t im = 0, ia = 0;
  for (std::int64_t t = t0; t <= t1; t += period) {
    while (im + 1 < mains.size() && mains.timestamps[im + 1] <= t) ++im;
    while (ia + 1 < appliance.size() && appliance.timestamps[ia + 1] <= t) ++ia;
    // forward fill from the latest sample at or before t; skip stale gaps
    if (t - mains.timestamps[im] > stale || t - appliance.timestamps[ia] > stale) continue;
    out_m.timestamps.push_back(t);
    out_m.watts.push_back(mains.watts[im]);
    out_a.timestamps.push_back(t);
    out_a.watts.push_back(appliance.watts[ia]);
  }
  if (out_m.empty()) fail(errc::config, "alignment produced an empty series (all gaps stale)");
  return {std::move(out_m), std::move(out_a)};
}

WindowStream::WindowStream(std::vector<double> mains, std::vector<double> appliance,
                           std::size_t window, std::size_t stride)
    : mains_(std::move(mains)), appliance_(std::move(appliance)), window_(window), stride_(stride) {
  if (window_ == 0 || window_ % 2 == 0)
    fail(errc::config, "window size must be odd, got " + std::to_string(window_));
  if (stride_ == 0) fail(errc::config, "stride must be >= 1");
  if (mains_.size() != appliance_.size())
    fail(errc::shape, "mains/appliance lengths differ: " + std::to_string(mains_.size()) + " vs " +
                          std::to_string(appliance_.size()));
  if (mains_.size() < window_)
    fail(errc::config, "series length " + std::to_string(mains_.size()) +
                           " shorter than window " + std::to_string(window_));
  count_ = (mains_.size() - window_) / stride_ + 1;
}

WindowBatch WindowStream::gather(std::span<const std::size_t> indices) const {
  WindowBatch b;
  b.window_size = window_;
  b.midpoint_offset = window_ / 2;
  b.windows.resize(indices.size() * window_);
  b.targets.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t wi = indices[r];
    if (wi >= count_) fail(errc::shape, "window index out of range");
    const std::size_t s = start(wi);
    std::copy(mains_.begin() + s, mains_.begin() + s + window_, b.windows.begin() + r * window_);
    b.targets[r] = appliance_[s + window_ / 2];
  }
  return b;
}

WindowBatch WindowStream::next(std::size_t batch_size) {
  if (batch_size == 0) fail(errc::config, "batch size must be >= 1");
  std::vector<std::size_t> idx;
  while (cursor_ < count_ && idx.size() < batch_size) idx.push_back(cursor_++);
  return gather(idx);
}

WindowStream make_windows(const SignalSeries& mains_norm, const SignalSeries& appliance_norm,
                          std::size_t window, std::size_t stride) {
  if (mains_norm.timestamps != appliance_norm.timestamps)
    fail(errc::config, "make_windows requires aligned series (equal timestamps)");
  return WindowStream(mains_norm.watts, appliance_norm.watts, window, stride);
}

}  // namespace aed
