#include "aed/dataset.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace aed {

using nlohmann::json;

namespace {

json stats_json(const NormalizationStats& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

NormalizationStats stats_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("mean") || !j.contains("std"))
    fail(errc::parse, "manifest normalization entry '" + name + "' needs mean and std");
  NormalizationStats s{j.at("mean").get<double>(), j.at("std").get<double>()};
  s.validate();
  return s;
}

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(errc::parse, "manifest parse error in " + path.string() + ": " + e.what());
  }
  DatasetManifest m;
  m.period = j.value("period", 6);
  if (m.period <= 0) fail(errc::parse, "manifest period must be positive");
  if (!j.contains("appliances") || !j["appliances"].is_array() || j["appliances"].empty())
    fail(errc::parse, "manifest needs a non-empty appliances array");
  for (const auto& a : j["appliances"]) m.appliances.push_back(a.get<std::string>());
  {
    std::vector<std::string> sorted = m.appliances;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      fail(errc::parse, "manifest appliance names must be unique");
  }
  if (j.contains("normalization"))
    for (const auto& [name, entry] : j["normalization"].items())
      m.normalization[name] = stats_from_json(entry, name);
  if (!j.contains("households") || !j["households"].is_array() || j["households"].empty())
    fail(errc::parse, "manifest needs a non-empty households array");
  for (const auto& h : j["households"]) {
    ManifestHousehold mh;
    mh.name = h.at("name").get<std::string>();
    mh.split = h.value("split", "train");
    if (mh.split != "train" && mh.split != "val" && mh.split != "test")
      fail(errc::parse, "household '" + mh.name + "' has invalid split '" + mh.split + "'");
    mh.mains = h.at("mains").get<std::string>();
    if (!h.contains("channels") || !h["channels"].is_object())
      fail(errc::parse, "household '" + mh.name + "' needs a channels object");
    for (const std::string& a : m.appliances) {
      if (!h["channels"].contains(a))
        fail(errc::parse, "household '" + mh.name + "' is missing channel '" + a + "'");
      mh.channels.push_back({a, std::filesystem::path(h["channels"][a].get<std::string>())});
    }
    m.households.push_back(std::move(mh));
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  json j;
  j["version"] = 1;
  j["period"] = manifest.period;
  j["appliances"] = manifest.appliances;
  json norm = json::object();
  for (const auto& [name, stats] : manifest.normalization) norm[name] = stats_json(stats);
  j["normalization"] = norm;
  j["households"] = json::array();
  for (const auto& h : manifest.households) {
    json channels = json::object();
    for (const auto& [name, p] : h.channels) channels[name] = p.generic_string();
    j["households"].push_back({{"name", h.name},
                               {"split", h.split},
                               {"mains", h.mains.generic_string()},
                               {"channels", channels}});
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io, "cannot write manifest: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) fail(errc::io, "failed writing manifest: " + path.string());
}

NormalizationStats stats_for(const DatasetManifest& manifest, const std::string& name) {
  auto it = manifest.normalization.find(name);
  if (it != manifest.normalization.end()) return it->second;
  if (auto builtin = builtin_stats(name)) return *builtin;
  fail(errc::config, "no normalization stats for '" + name +
                         "' (not in the manifest or the built-in table)");
}

std::map<std::string, NormalizationStats> fleet_stats(const Fleet& fleet) {
  if (fleet.train.empty()) fail(errc::config, "fleet has no training households");
  std::map<std::string, std::vector<double>> pools;
  for (const auto& h : fleet.train) {
    auto& mains_pool = pools["aggregate"];
    mains_pool.insert(mains_pool.end(), h.mains.watts.begin(), h.mains.watts.end());
    for (const auto& a : h.appliances) {
      auto& pool = pools[a.role.name];
      pool.insert(pool.end(), a.watts.begin(), a.watts.end());
    }
  }
  std::map<std::string, NormalizationStats> out;
  for (const auto& [name, pool] : pools) {
    NormalizationStats s = compute_stats(pool);
    if (s.std < 1.0) s.std = 1.0;
    out[name] = s;
  }
  return out;
}

DatasetManifest write_fleet(const Fleet& fleet, const std::filesystem::path& out_dir) {
  DatasetManifest manifest;
  manifest.period = fleet.config.period;
  for (const auto& a : fleet.config.appliances) manifest.appliances.push_back(a.name);
  manifest.normalization = fleet_stats(fleet);

  auto emit_split = [&](const std::vector<Household>& houses, const char* split) {
    for (const auto& h : houses) {
      const auto dir = out_dir / h.name;
      std::filesystem::create_directories(dir);
      ManifestHousehold mh;
      mh.name = h.name;
      mh.split = split;
      mh.mains = h.name + "/mains.dat";
      save_series(out_dir / mh.mains, h.mains);
      for (const auto& a : h.appliances) {
        const std::string rel = h.name + "/" + a.role.name + ".dat";
        save_series(out_dir / rel, a);
        mh.channels.push_back({a.role.name, rel});
      }
      manifest.households.push_back(std::move(mh));
    }
  };
  emit_split(fleet.train, "train");
  emit_split(fleet.val, "val");
  emit_split(fleet.test, "test");
  write_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

std::vector<LoadedHousehold> load_dataset(const std::filesystem::path& manifest_path,
                                          const DatasetManifest& manifest) {
  const auto base = manifest_path.parent_path();
  std::vector<LoadedHousehold> out;
  for (const auto& mh : manifest.households) {
    LoadedHousehold lh;
    lh.name = mh.name;
    lh.split = mh.split;
    SignalSeries mains = load_series(base / mh.mains, SeriesFormat::csv, SeriesRole::mains());
    for (const auto& [name, rel] : mh.channels) {
      SignalSeries app = load_series(base / rel, SeriesFormat::csv, SeriesRole::appliance(name));
      auto [am, aa] = align_resample(mains, app, manifest.period);
      lh.channels.push_back({name, std::move(am), std::move(aa)});
    }
    out.push_back(std::move(lh));
  }
  return out;
}

namespace {

template <class HouseRange, class MainsOf, class ApplianceOf>
WindowedDataset build_windowed_impl(const HouseRange& houses, const std::string& appliance,
                                    const NormalizationStats& mains_stats,
                                    const NormalizationStats& target_stats, std::size_t window,
                                    std::size_t stride, MainsOf mains_of, ApplianceOf app_of) {
  if (window == 0 || window % 2 == 0)
    fail(errc::config, "window must be odd, got " + std::to_string(window));
  if (stride == 0) fail(errc::config, "stride must be >= 1");
  mains_stats.validate();
  target_stats.validate();

  WindowedDataset ds;
  ds.window = window;
  ds.stride = stride;
  ds.appliance = appliance;
  ds.mains_stats = mains_stats;
  ds.target_stats = target_stats;
  for (const auto& house : houses) {
    const SignalSeries* mains = mains_of(house);
    const SignalSeries* app = app_of(house);
    if (!app) fail(errc::config, "household lacks appliance channel '" + appliance + "'");
    if (mains->size() != app->size())
      fail(errc::shape, "aligned channel length mismatch for '" + appliance + "'");
    if (mains->size() < window) continue;  // too short to window
    const auto hid = static_cast<std::uint32_t>(ds.mains_norm.size());
    ds.mains_norm.push_back(normalize(std::span<const double>(mains->watts), mains_stats));
    ds.target_norm.push_back(normalize(std::span<const double>(app->watts), target_stats));
    const std::size_t count = (mains->size() - window) / stride + 1;
    for (std::size_t w = 0; w < count; ++w)
      ds.index.push_back({hid, static_cast<std::uint32_t>(w * stride)});
  }
  if (ds.index.empty())
    fail(errc::config, "no windows: every household is shorter than the window");
  return ds;
}

}  // namespace

WindowedDataset build_windowed(std::span<const LoadedHousehold> houses,
                               const std::string& appliance,
                               const NormalizationStats& mains_stats,
                               const NormalizationStats& target_stats, std::size_t window,
                               std::size_t stride) {
  return build_windowed_impl(
      houses, appliance, mains_stats, target_stats, window, stride,
      [&](const LoadedHousehold& h) -> const SignalSeries* {
        for (const auto& c : h.channels)
          if (c.appliance == appliance) return &c.mains;
        fail(errc::config, "household '" + h.name + "' lacks channel '" + appliance + "'");
      },
      [&](const LoadedHousehold& h) -> const SignalSeries* {
        for (const auto& c : h.channels)
          if (c.appliance == appliance) return &c.appliance_series;
        return nullptr;
      });
}

WindowedDataset build_windowed(std::span<const Household> houses, const std::string& appliance,
                               const NormalizationStats& mains_stats,
                               const NormalizationStats& target_stats, std::size_t window,
                               std::size_t stride) {
  return build_windowed_impl(
      houses, appliance, mains_stats, target_stats, window, stride,
      [&](const Household& h) -> const SignalSeries* { return &h.mains; },
      [&](const Household& h) -> const SignalSeries* {
        for (const auto& a : h.appliances)
          if (a.role.name == appliance) return &a;
        return nullptr;
      });
}

std::vector<double> WindowedDataset::raw_targets(std::span<const std::size_t> ids) const {
  std::vector<double> out(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto [house, start] = index.at(ids[r]);
    out[r] = target_norm[house][start + window / 2] * target_stats.std + target_stats.mean;
  }
  return out;
}

}  // namespace aed
