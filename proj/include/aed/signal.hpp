#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aed/error.hpp"

namespace aed {

struct SeriesRole {
  enum class Kind { mains, appliance } kind = Kind::mains;
  std::string name;  // appliance name; empty for mains

  static SeriesRole mains() { return {Kind::mains, ""}; }
  static SeriesRole appliance(std::string name) { return {Kind::appliance, std::move(name)}; }
};

// Timestamped power readings in Watts on a strictly increasing integer-second
// axis.
struct SignalSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> watts;
  SeriesRole role;

  std::size_t size() const { return timestamps.size(); }
  bool empty() const { return timestamps.empty(); }

  // lengths equal, timestamps strictly increasing; watts >= 0 when checked
  void validate(bool checked = true) const;
};

enum class SeriesFormat { csv, redd_channel, ukdale_channel };

// Two-column text: "<unix_seconds><sep><watts>", sep space/tab or comma.
// Lines starting with '#' and blank lines are skipped. All three named
// formats share this layout; the enum records provenance.
SignalSeries load_series(const std::filesystem::path& path, SeriesFormat format = SeriesFormat::csv,
                         SeriesRole role = SeriesRole::mains(), bool checked = true);

// Shortest-round-trip decimal output, one reading per line.
void save_series(const std::filesystem::path& path, const SignalSeries& series);

struct NormalizationStats {
  double mean = 0.0;
  double std = 1.0;

  void validate() const {
    if (!(std > 0.0)) fail(errc::numeric, "normalization std must be > 0");
  }
};

// Built-in per-appliance normalization constants (window length 599 set).
// Returns nothing for names outside the published table.
std::optional<NormalizationStats> builtin_stats(std::string_view appliance_name);

// Mean and population standard deviation of the given readings.
NormalizationStats compute_stats(std::span<const double> watts);

std::vector<double> normalize(std::span<const double> watts, const NormalizationStats& stats);
std::vector<double> denormalize(std::span<const double> values, const NormalizationStats& stats);
SignalSeries normalize(const SignalSeries& series, const NormalizationStats& stats);
SignalSeries denormalize(const SignalSeries& series, const NormalizationStats& stats);

// Resamples both series onto the shared [max(start), min(end)] range at a
// fixed period via forward fill. Grid points whose latest sample in either
// series is older than staleness_mult * period are dropped from both.
std::pair<SignalSeries, SignalSeries> align_resample(const SignalSeries& mains,
                                                     const SignalSeries& appliance,
                                                     std::int64_t period,
                                                     std::int64_t staleness_mult = 3);

// One training batch: normalized mains windows and their normalized midpoint
// appliance targets.
struct WindowBatch {
  std::size_t window_size = 0;
  std::size_t midpoint_offset = 0;  // W / 2
  std::vector<double> windows;      // batch x window_size, row-major
  std::vector<double> targets;      // batch

  std::size_t batch() const { return targets.size(); }
};

// Full-window slicing over an aligned, normalized (mains, appliance) pair:
// floor((T - W) / stride) + 1 windows, target index t + W/2. W must be odd so
// the midpoint is a sample.
class WindowStream {
 public:
  WindowStream(std::vector<double> mains, std::vector<double> appliance, std::size_t window,
               std::size_t stride);

  std::size_t count() const { return count_; }
  std::size_t window_size() const { return window_; }
  std::size_t midpoint_offset() const { return window_ / 2; }

  // start sample of window wi in the underlying series
  std::size_t start(std::size_t wi) const { return wi * stride_; }

  WindowBatch gather(std::span<const std::size_t> indices) const;

  // sequential batches of at most batch_size windows; empty batch at the end
  WindowBatch next(std::size_t batch_size);
  void reset() { cursor_ = 0; }

 private:
  std::vector<double> mains_;
  std::vector<double> appliance_;
  std::size_t window_;
  std::size_t stride_;
  std::size_t count_;
  std::size_t cursor_ = 0;
};

WindowStream make_windows(const SignalSeries& mains_norm, const SignalSeries& appliance_norm,
                          std::size_t window, std::size_t stride = 1);

}  // namespace aed
