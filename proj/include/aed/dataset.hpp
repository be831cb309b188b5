#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aed/signal.hpp"
#include "aed/simulate.hpp"
#include "aed/tensor.hpp"

// Dataset manifest plus the in-memory windowed view the trainers consume.
// The manifest is a JSON document mapping appliance names to channel files,
// with per-name normalization stats; paths are relative to the manifest.

namespace aed {

struct ManifestHousehold {
  std::string name;
  std::string split;  // train | val | test
  std::filesystem::path mains;
  std::vector<std::pair<std::string, std::filesystem::path>> channels;
};

struct DatasetManifest {
  std::int64_t period = 6;
  std::vector<std::string> appliances;
  std::map<std::string, NormalizationStats> normalization;
  std::vector<ManifestHousehold> households;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// Normalization lookup order: manifest entry, then the built-in table.
NormalizationStats stats_for(const DatasetManifest& manifest, const std::string& name);

// Writes one directory per household with mains + appliance channel files,
// plus manifest.json. Normalization stats are recomputed from the train
// split (std floored at 1 W for degenerate channels).
DatasetManifest write_fleet(const Fleet& fleet, const std::filesystem::path& out_dir);

struct AlignedChannel {
  std::string appliance;
  SignalSeries mains;      // aligned pair on the common grid
  SignalSeries appliance_series;
};

struct LoadedHousehold {
  std::string name;
  std::string split;
  std::vector<AlignedChannel> channels;
};

// Loads every channel and aligns it with its household mains at the manifest
// period.
std::vector<LoadedHousehold> load_dataset(const std::filesystem::path& manifest_path,
                                          const DatasetManifest& manifest);

// Normalized sliding-window view over one target appliance across
// households. Window index maps to (household, start-sample).
struct WindowedDataset {
  std::size_t window = 0;
  std::size_t stride = 1;
  std::string appliance;
  NormalizationStats mains_stats;
  NormalizationStats target_stats;
  std::vector<std::vector<double>> mains_norm;   // per household
  std::vector<std::vector<double>> target_norm;  // per household
  std::vector<std::pair<std::uint32_t, std::uint32_t>> index;

  std::size_t num_windows() const { return index.size(); }

  template <class T>
  void gather(std::span<const std::size_t> ids, Tensor<T>& windows, Tensor<T>& targets) const {
    windows = Tensor<T>::zeros({ids.size(), window});
    targets = Tensor<T>::zeros({ids.size()});
    for (std::size_t r = 0; r < ids.size(); ++r) {
      const auto [house, start] = index.at(ids[r]);
      const auto& m = mains_norm[house];
      for (std::size_t i = 0; i < window; ++i)
        windows[r * window + i] = static_cast<T>(m[start + i]);
      targets[r] = static_cast<T>(target_norm[house][start + window / 2]);
    }
  }

  // denormalized Watt targets of the given windows
  std::vector<double> raw_targets(std::span<const std::size_t> ids) const;
};

WindowedDataset build_windowed(std::span<const LoadedHousehold> houses,
                               const std::string& appliance,
                               const NormalizationStats& mains_stats,
                               const NormalizationStats& target_stats, std::size_t window,
                               std::size_t stride = 1);

// In-memory windowing of a simulated fleet split (no files involved).
WindowedDataset build_windowed(std::span<const Household> houses, const std::string& appliance,
                               const NormalizationStats& mains_stats,
                               const NormalizationStats& target_stats, std::size_t window,
                               std::size_t stride = 1);

// Train-split statistics for the mains and every appliance, std floored at
// 1 W so constant channels stay normalizable.
std::map<std::string, NormalizationStats> fleet_stats(const Fleet& fleet);

}  // namespace aed
