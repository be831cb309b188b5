// aed: simulate | ingest | pretrain | train | disaggregate | evaluate | report
//
// Configuration comes from a JSON file (--config); flags override file
// values. Data products land under --out; logs are line-delimited JSON on
// stderr. Exit codes: 0 success, 2 config/input error, 3 missing dependency
// artifact, 4 training divergence.

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aed/dataset.hpp"
#include "aed/metrics.hpp"
#include "aed/parallel.hpp"
#include "aed/report.hpp"
#include "aed/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aed;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitDiverged = 4;

void log_json(const json& j) { std::cerr << j.dump() << "\n"; }

std::string fmt_double(double v) {
  std::array<char, 48> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    fail(errc::parse, "bad numeric field '" + s + "'");
  }
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case errc::missing:
      return kExitMissing;
    case errc::divergence:
      return kExitDiverged;
    default:
      return kExitConfig;
  }
}

// ---------------------------------------------------------------------------
// Run configuration: JSON file + flag overrides.
// ---------------------------------------------------------------------------
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> precision;
  bool no_adversarial = false;
  bool paper_defaults = false;
  bool fresh_model = false;
  int threads = 0;
};

struct RunConfig {
  json raw;
  fs::path config_dir;

  fs::path out = "aed-out";
  std::optional<fs::path> dataset_manifest;
  std::vector<std::string> appliances;  // empty = manifest order
  std::string target;

  ModelConfig model;
  TrainConfig train;
  Precision precision = Precision::f64;
  std::size_t stride = 1;
  bool warm_start = true;

  FleetConfig fleet;
  bool has_fleet = false;
};

ApplianceModel appliance_from_json(const json& j) {
  ApplianceModel m;
  m.name = j.at("name").get<std::string>();
  const std::string kind = j.value("kind", "two_state");
  if (kind == "two_state")
    m.kind = ApplianceModel::Kind::two_state;
  else if (kind == "cyclic")
    m.kind = ApplianceModel::Kind::cyclic;
  else if (kind == "spike")
    m.kind = ApplianceModel::Kind::spike;
  else if (kind == "multi_phase")
    m.kind = ApplianceModel::Kind::multi_phase;
  else
    fail(errc::config, "unknown appliance kind '" + kind + "' for " + m.name);
  m.on_power = j.value("on_power", 0.0);
  m.standby_power = j.value("standby_power", 0.0);
  m.mean_on = j.value("mean_on", 1.0);
  m.mean_off = j.value("mean_off", 1.0);
  if (j.contains("phases"))
    for (const auto& p : j["phases"])
      m.phases.push_back({p.at(0).get<double>(), p.at(1).get<std::size_t>()});
  m.validate();
  return m;
}

RunConfig load_run_config(const std::string& config_path, const CliOverrides& ov) {
  RunConfig rc;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) fail(errc::config, "cannot open config file: " + config_path);
    try {
      in >> rc.raw;
    } catch (const json::parse_error& e) {
      fail(errc::parse, "config parse error in " + config_path + ": " + e.what());
    }
    rc.config_dir = fs::path(config_path).parent_path();
  } else {
    rc.raw = json::object();
  }
  const json& j = rc.raw;

  if (j.contains("out")) rc.out = rc.config_dir / j["out"].get<std::string>();
  if (j.contains("dataset")) rc.dataset_manifest = rc.config_dir / j["dataset"].get<std::string>();
  if (j.contains("appliances"))
    for (const auto& a : j["appliances"]) rc.appliances.push_back(a.get<std::string>());
  rc.target = j.value("target", "");

  if (j.contains("model")) {
    const json& m = j["model"];
    rc.model.window = m.value("window", rc.model.window);
    if (m.contains("predictor_hidden"))
      rc.model.predictor_hidden = m["predictor_hidden"].get<std::vector<std::size_t>>();
    if (m.contains("discriminator_hidden"))
      rc.model.discriminator_hidden = m["discriminator_hidden"].get<std::vector<std::size_t>>();
    rc.model.batchnorm = m.value("batchnorm", rc.model.batchnorm);
    rc.model.dropout = m.value("dropout", rc.model.dropout);
    rc.model.dropout_p = m.value("dropout_p", rc.model.dropout_p);
  }

  if (j.contains("train")) {
    const json& t = j["train"];
    rc.train.lambda = t.value("lambda", rc.train.lambda);
    rc.train.batch_size = t.value("batch_size", rc.train.batch_size);
    rc.train.max_epochs = t.value("epochs", rc.train.max_epochs);
    rc.train.seed = t.value("seed", rc.train.seed);
    rc.train.adversarial = t.value("adversarial", rc.train.adversarial);
    rc.train.non_saturating = t.value("non_saturating", rc.train.non_saturating);
    rc.train.disc_lr_scale = t.value("disc_lr_scale", rc.train.disc_lr_scale);
    rc.train.patience = t.value("patience", rc.train.patience);
    rc.train.lr = t.value("lr", rc.train.lr);
    rc.stride = t.value("stride", rc.stride);
    rc.warm_start = t.value("warm_start", rc.warm_start);
    const std::string prec = t.value("precision", "f64");
    if (prec == "f32")
      rc.precision = Precision::f32;
    else if (prec == "f64")
      rc.precision = Precision::f64;
    else
      fail(errc::config, "train.precision must be f32 or f64, got '" + prec + "'");
  }

  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    rc.has_fleet = true;
    rc.fleet.households = s.value("households", rc.fleet.households);
    rc.fleet.samples_per_household =
        s.value("samples_per_household", rc.fleet.samples_per_household);
    rc.fleet.period = s.value("period", rc.fleet.period);
    rc.fleet.noise.sigma = s.value("noise_sigma", rc.fleet.noise.sigma);
    if (s.contains("split")) {
      const auto split = s["split"].get<std::vector<double>>();
      if (split.size() != 3) fail(errc::config, "simulate.split needs three fractions");
      rc.fleet.split_train = split[0];
      rc.fleet.split_val = split[1];
      rc.fleet.split_test = split[2];
    }
    if (!s.contains("appliances")) fail(errc::config, "simulate config needs appliances");
    for (const auto& a : s["appliances"]) rc.fleet.appliances.push_back(appliance_from_json(a));
  }

  // flag overrides
  if (ov.paper_defaults) {
    rc.train.batch_size = 1000;
    rc.train.max_epochs = 50;
    rc.train.lambda = 0.05;
    rc.model.window = 599;
  }
  if (ov.seed) rc.train.seed = *ov.seed;
  if (ov.out) rc.out = *ov.out;
  if (ov.precision) rc.precision = (*ov.precision == "f32") ? Precision::f32 : Precision::f64;
  if (ov.no_adversarial) rc.train.adversarial = false;
  if (ov.fresh_model) rc.warm_start = false;
  return rc;
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------
struct LoadedData {
  DatasetManifest manifest;
  std::vector<LoadedHousehold> households;
};

LoadedData load_data(const RunConfig& rc) {
  if (!rc.dataset_manifest) fail(errc::config, "config needs a 'dataset' manifest path");
  if (!fs::exists(*rc.dataset_manifest))
    fail(errc::config, "dataset manifest does not exist: " + rc.dataset_manifest->string());
  LoadedData d;
  d.manifest = read_manifest(*rc.dataset_manifest);
  d.households = load_dataset(*rc.dataset_manifest, d.manifest);
  return d;
}

std::vector<std::string> appliance_list(const RunConfig& rc, const DatasetManifest& manifest) {
  if (!rc.appliances.empty()) {
    for (const auto& a : rc.appliances)
      if (std::find(manifest.appliances.begin(), manifest.appliances.end(), a) ==
          manifest.appliances.end())
        fail(errc::config, "appliance '" + a + "' is not in the dataset manifest");
    return rc.appliances;
  }
  return manifest.appliances;
}

// train/val household partition; falls back to holding out the last train
// household when the manifest has no val split
std::pair<std::vector<LoadedHousehold>, std::vector<LoadedHousehold>> train_val_split(
    const std::vector<LoadedHousehold>& houses) {
  std::vector<LoadedHousehold> train, val;
  for (const auto& h : houses) {
    if (h.split == "train")
      train.push_back(h);
    else if (h.split == "val")
      val.push_back(h);
  }
  if (val.empty()) {
    if (train.size() < 2)
      fail(errc::config, "need a val split or at least two train households");
    val.push_back(train.back());
    train.pop_back();
  }
  if (train.empty()) fail(errc::config, "dataset has no train households");
  return {std::move(train), std::move(val)};
}

std::vector<std::pair<std::string, std::string>> stats_meta(const RunConfig& rc,
                                                            const NormalizationStats& mains,
                                                            const NormalizationStats& target,
                                                            const std::string& appliance,
                                                            std::int64_t period) {
  return {
      {"appliance", appliance},
      {"mains_mean", fmt_double(mains.mean)},
      {"mains_std", fmt_double(mains.std)},
      {"target_mean", fmt_double(target.mean)},
      {"target_std", fmt_double(target.std)},
      {"period", std::to_string(period)},
      {"seed", std::to_string(rc.train.seed)},
  };
}

EpochCallback epoch_logger(const std::string& phase, const std::string& appliance,
                           double target_std, std::ofstream* file) {
  return [phase, appliance, target_std, file](const EpochStats& s) {
    json j{{"event", "epoch"},
           {"phase", phase},
           {"appliance", appliance},
           {"epoch", s.epoch},
           {"train_loss", s.train_loss},
           {"val_mae_norm", s.val_mae},
           {"val_mae_watts", s.val_mae * target_std},
           {"seconds", s.seconds}};
    if (!s.disc_shared_mean.empty()) j["disc_shared_mean"] = s.disc_shared_mean;
    log_json(j);
    if (file && file->is_open()) *file << j.dump() << "\n";
  };
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------
int cmd_simulate(const RunConfig& rc) {
  if (!rc.has_fleet) fail(errc::config, "simulate needs a 'simulate' section in the config");
  Fleet fleet = simulate_fleet(rc.fleet, rc.train.seed);
  DatasetManifest manifest = write_fleet(fleet, rc.out);
  log_json({{"event", "simulate"},
            {"out", rc.out.string()},
            {"households", rc.fleet.households},
            {"samples_per_household", rc.fleet.samples_per_household},
            {"seed", rc.train.seed},
            {"appliances", manifest.appliances}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ingest: resample + align raw channels onto the manifest period grid
// ---------------------------------------------------------------------------
int cmd_ingest(const RunConfig& rc) {
  auto data = load_data(rc);
  DatasetManifest out_manifest;
  out_manifest.period = data.manifest.period;
  out_manifest.appliances = data.manifest.appliances;

  for (const auto& lh : data.households) {
    ManifestHousehold mh;
    mh.name = lh.name;
    mh.split = lh.split;
    const auto dir = rc.out / lh.name;
    fs::create_directories(dir);
    // channels are already aligned pairs; the first channel's grid carries
    // the household mains file
    if (lh.channels.empty()) fail(errc::config, "household '" + lh.name + "' has no channels");
    mh.mains = lh.name + "/mains.dat";
    save_series(rc.out / mh.mains, lh.channels.front().mains);
    for (const auto& c : lh.channels) {
      const std::string rel = lh.name + "/" + c.appliance + ".dat";
      save_series(rc.out / rel, c.appliance_series);
      mh.channels.push_back({c.appliance, rel});
    }
    out_manifest.households.push_back(std::move(mh));
  }

  // normalization: keep manifest overrides, recompute the rest from train
  for (const auto& name : out_manifest.appliances) {
    if (data.manifest.normalization.count(name)) {
      out_manifest.normalization[name] = data.manifest.normalization.at(name);
      continue;
    }
    std::vector<double> pool;
    for (const auto& lh : data.households) {
      if (lh.split != "train") continue;
      for (const auto& c : lh.channels)
        if (c.appliance == name)
          pool.insert(pool.end(), c.appliance_series.watts.begin(),
                      c.appliance_series.watts.end());
    }
    NormalizationStats s = compute_stats(pool);
    if (s.std < 1.0) s.std = 1.0;
    out_manifest.normalization[name] = s;
  }
  if (data.manifest.normalization.count("aggregate")) {
    out_manifest.normalization["aggregate"] = data.manifest.normalization.at("aggregate");
  } else {
    std::vector<double> pool;
    for (const auto& lh : data.households) {
      if (lh.split != "train") continue;
      for (const auto& c : lh.channels)
        pool.insert(pool.end(), c.mains.watts.begin(), c.mains.watts.end());
    }
    NormalizationStats s = compute_stats(pool);
    if (s.std < 1.0) s.std = 1.0;
    out_manifest.normalization["aggregate"] = s;
  }

  write_manifest(rc.out / "manifest.json", out_manifest);
  log_json({{"event", "ingest"},
            {"out", rc.out.string()},
            {"households", out_manifest.households.size()}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// pretrain
// ---------------------------------------------------------------------------
template <class T>
int run_pretrain(const RunConfig& rc) {
  auto data = load_data(rc);
  const auto appliances = appliance_list(rc, data.manifest);
  auto [train_houses, val_houses] = train_val_split(data.households);
  const auto mains_stats = stats_for(data.manifest, "aggregate");

  const auto dir = rc.out / "pretrain";
  fs::create_directories(dir);
  std::ofstream log_file(dir / "log.jsonl");

  for (std::size_t a = 0; a < appliances.size(); ++a) {
    const std::string& name = appliances[a];
    const auto target_stats = stats_for(data.manifest, name);
    auto train_ds =
        build_windowed(train_houses, name, mains_stats, target_stats, rc.model.window, rc.stride);
    auto val_ds =
        build_windowed(val_houses, name, mains_stats, target_stats, rc.model.window, rc.stride);

    TrainConfig tcfg = rc.train;
    tcfg.seed = derive_seed(rc.train.seed, 100 + a);
    auto res = pretrain_appliance<T>(train_ds, val_ds, rc.model, tcfg,
                                     epoch_logger("pretrain", name, target_stats.std, &log_file));
    auto meta = stats_meta(rc, mains_stats, target_stats, name, data.manifest.period);
    meta.push_back({"best_epoch", std::to_string(res.best_epoch)});
    write_checkpoint(dir / (name + ".gen.aedc"), generator_checkpoint(res.generator, meta));
    write_checkpoint(dir / (name + ".pred.aedc"), predictor_checkpoint(res.predictor, meta));
    log_json({{"event", "pretrain_done"},
              {"appliance", name},
              {"best_epoch", res.best_epoch},
              {"best_val_mae_norm", res.best_val_mae},
              {"best_val_mae_watts", res.best_val_mae * target_stats.std},
              {"diverged", res.diverged}});
    if (res.diverged) {
      log_json({{"event", "divergence"}, {"appliance", name}, {"note", res.divergence_note}});
      return kExitDiverged;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train (adversarial or ablated)
// ---------------------------------------------------------------------------
template <class T>
int run_train(const RunConfig& rc) {
  auto data = load_data(rc);
  const auto appliances = appliance_list(rc, data.manifest);
  if (rc.target.empty()) fail(errc::config, "train needs a 'target' appliance");
  if (std::find(appliances.begin(), appliances.end(), rc.target) == appliances.end())
    fail(errc::config, "target '" + rc.target + "' is not an appliance of this dataset");

  const auto pre_dir = rc.out / "pretrain";
  std::vector<Generator<T>> frozen;
  for (const auto& name : appliances) {
    const auto path = pre_dir / (name + ".gen.aedc");
    if (!fs::exists(path))
      fail(errc::missing, "missing pretrain checkpoint: " + path.string() +
                              " (run `aed pretrain` first)");
    frozen.push_back(generator_from_checkpoint<T>(read_checkpoint(path), rc.model));
  }

  auto [train_houses, val_houses] = train_val_split(data.households);
  const auto mains_stats = stats_for(data.manifest, "aggregate");
  const auto target_stats = stats_for(data.manifest, rc.target);
  auto train_ds = build_windowed(train_houses, rc.target, mains_stats, target_stats,
                                 rc.model.window, rc.stride);
  auto val_ds =
      build_windowed(val_houses, rc.target, mains_stats, target_stats, rc.model.window, rc.stride);

  std::optional<Generator<T>> warm_g;
  std::optional<Predictor<T>> warm_c;
  if (rc.warm_start) {
    const auto gpath = pre_dir / (rc.target + ".gen.aedc");
    const auto cpath = pre_dir / (rc.target + ".pred.aedc");
    if (!fs::exists(cpath))
      fail(errc::missing, "missing pretrain checkpoint: " + cpath.string());
    warm_g = generator_from_checkpoint<T>(read_checkpoint(gpath), rc.model);
    warm_c = predictor_from_checkpoint<T>(read_checkpoint(cpath), rc.model);
  }

  const auto dir = rc.out / "train";
  fs::create_directories(dir);
  std::ofstream log_file(dir / (rc.target + ".log.jsonl"));
  auto res = train_adversarial<T>(train_ds, val_ds, frozen, rc.model, rc.train,
                                  warm_g ? &*warm_g : nullptr, warm_c ? &*warm_c : nullptr,
                                  epoch_logger("train", rc.target, target_stats.std, &log_file));

  auto meta = stats_meta(rc, mains_stats, target_stats, rc.target, data.manifest.period);
  meta.push_back({"adversarial", rc.train.adversarial ? "1" : "0"});
  meta.push_back({"lambda", fmt_double(rc.train.lambda)});
  const std::string tag = rc.train.adversarial ? "" : ".ablated";
  write_checkpoint(dir / (rc.target + tag + ".gen.aedc"), generator_checkpoint(res.generator, meta));
  write_checkpoint(dir / (rc.target + tag + ".pred.aedc"),
                   predictor_checkpoint(res.predictor, meta));
  json done{{"event", "train_done"},
            {"appliance", rc.target},
            {"adversarial", rc.train.adversarial},
            {"val_mae_norm", res.final_val_mae},
            {"val_mae_watts", res.final_val_mae * target_stats.std},
            {"diverged", res.diverged}};
  if (!res.final_disc_shared_mean.empty()) done["disc_shared_mean"] = res.final_disc_shared_mean;
  log_json(done);
  if (res.diverged) {
    log_json({{"event", "divergence"},
              {"appliance", rc.target},
              {"note", res.divergence_note},
              {"last_epoch", res.epochs.size()}});
    return kExitDiverged;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// disaggregate
// ---------------------------------------------------------------------------
template <class T>
int run_disaggregate(const RawCheckpoint& gen_ckpt, const RawCheckpoint& pred_ckpt,
                     const fs::path& mains_path, const fs::path& out_path) {
  ModelConfig mcfg;
  Generator<T> g = generator_from_checkpoint<T>(gen_ckpt, mcfg);
  Predictor<T> c = predictor_from_checkpoint<T>(pred_ckpt, mcfg);

  NormalizationStats mains_stats, target_stats;
  std::int64_t period = 6;
  std::string appliance = "appliance";
  for (const auto& [k, v] : gen_ckpt.meta) {
    if (k == "mains_mean") mains_stats.mean = parse_double(v);
    if (k == "mains_std") mains_stats.std = parse_double(v);
    if (k == "target_mean") target_stats.mean = parse_double(v);
    if (k == "target_std") target_stats.std = parse_double(v);
    if (k == "period") period = std::stoll(v);
    if (k == "appliance") appliance = v;
  }

  SignalSeries mains = load_series(mains_path, SeriesFormat::csv, SeriesRole::mains());
  auto [rm, _] = align_resample(mains, mains, period);  // resample onto the period grid
  if (rm.size() < g.window)
    fail(errc::config, "mains length " + std::to_string(rm.size()) + " is shorter than window " +
                           std::to_string(g.window));

  auto mains_norm = normalize(std::span<const double>(rm.watts), mains_stats);
  auto preds_norm = predict_midpoints(g, c, mains_norm);
  auto preds = denormalize(preds_norm, target_stats);

  SignalSeries out;
  out.role = SeriesRole::appliance(appliance);
  const std::size_t half = g.window / 2;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out.timestamps.push_back(rm.timestamps[half + i]);
    out.watts.push_back(preds[i]);
  }
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  save_series(out_path, out);
  log_json({{"event", "disaggregate"},
            {"appliance", appliance},
            {"out", out_path.string()},
            {"window", g.window},
            {"covered", preds.size()},
            {"span_start", out.timestamps.front()},
            {"span_end", out.timestamps.back()}});
  return kExitOk;
}

int cmd_disaggregate(const std::string& gen, const std::string& pred, const std::string& mains,
                     const std::string& out) {
  for (const auto& p : {gen, pred}) {
    if (!fs::exists(p)) fail(errc::missing, "missing checkpoint: " + p);
  }
  if (!fs::exists(mains)) fail(errc::config, "missing mains file: " + mains);
  RawCheckpoint gen_ckpt = read_checkpoint(gen);
  RawCheckpoint pred_ckpt = read_checkpoint(pred);
  if (gen_ckpt.precision != pred_ckpt.precision)
    fail(errc::checkpoint, "generator and predictor checkpoints disagree on precision");
  if (gen_ckpt.precision == Precision::f32)
    return run_disaggregate<float>(gen_ckpt, pred_ckpt, mains, out);
  return run_disaggregate<double>(gen_ckpt, pred_ckpt, mains, out);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------
int cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                 const std::string& appliance, const std::string& out_prefix, bool clamp) {
  if (!fs::exists(pred_path)) fail(errc::missing, "missing predictions: " + pred_path);
  if (!fs::exists(truth_path)) fail(errc::config, "missing truth series: " + truth_path);
  SignalSeries pred =
      load_series(pred_path, SeriesFormat::csv, SeriesRole::appliance(appliance), false);
  SignalSeries truth = load_series(truth_path, SeriesFormat::csv, SeriesRole::appliance(appliance));

  // restrict the truth to the covered prediction span, matching timestamps
  std::vector<double> p, t;
  std::size_t ti = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    while (ti < truth.size() && truth.timestamps[ti] < pred.timestamps[i]) ++ti;
    if (ti < truth.size() && truth.timestamps[ti] == pred.timestamps[i]) {
      p.push_back(pred.watts[i]);
      t.push_back(truth.watts[ti]);
    }
  }
  if (p.empty()) fail(errc::config, "prediction and truth series share no timestamps");

  EvalReport report;
  report.metadata["appliance"] = appliance;
  report.metadata["predictions"] = pred_path;
  report.metadata["truth"] = truth_path;
  report.metadata["covered_samples"] = std::to_string(p.size());
  report.metadata["clamped"] = clamp ? "1" : "0";
  report.appliances.push_back(evaluate_appliance(appliance, p, t, clamp));
  assign_shares(report);
  auto files = emit_report(report, {ReportFormat::csv, ReportFormat::json}, out_prefix);
  log_json({{"event", "evaluate"},
            {"appliance", appliance},
            {"mae_watts", report.appliances[0].mae_watts},
            {"sae", report.appliances[0].sae},
            {"covered", p.size()},
            {"out", out_prefix}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report: merge evaluate outputs, add share chart + series overlays
// ---------------------------------------------------------------------------
int cmd_report(const std::vector<std::string>& eval_jsons,
               const std::vector<std::string>& overlays, std::size_t span,
               const std::string& out_prefix) {
  if (eval_jsons.empty()) fail(errc::config, "report needs at least one --eval input");
  EvalReport merged;
  for (const auto& path : eval_jsons) {
    if (!fs::exists(path)) fail(errc::missing, "missing evaluate output: " + path);
    std::ifstream in(path);
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      fail(errc::parse, "bad evaluate JSON " + path + ": " + e.what());
    }
    for (const auto& a : j.at("appliances")) {
      ApplianceEval ev;
      ev.name = a.at("appliance").get<std::string>();
      ev.mae_watts = a.at("mae_watts").get<double>();
      ev.sae = a.at("sae").get<double>();
      ev.pred_total = a.at("pred_total").get<double>();
      ev.true_total = a.at("true_total").get<double>();
      merged.appliances.push_back(ev);
    }
    if (j.contains("metadata"))
      for (const auto& [k, v] : j["metadata"].items())
        merged.metadata[k + ":" + std::to_string(merged.appliances.size())] =
            v.get<std::string>();
  }
  assign_shares(merged);

  // overlay spec: appliance=mains.dat,truth.dat,pred.dat
  for (const auto& ov : overlays) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) fail(errc::config, "overlay format: name=mains,truth,pred");
    SeriesOverlay so;
    so.appliance = ov.substr(0, eq);
    std::vector<std::string> parts;
    std::size_t at = eq + 1;
    while (at <= ov.size()) {
      auto comma = ov.find(',', at);
      if (comma == std::string::npos) comma = ov.size();
      parts.push_back(ov.substr(at, comma - at));
      at = comma + 1;
    }
    if (parts.size() != 3) fail(errc::config, "overlay format: name=mains,truth,pred");
    SignalSeries mains = load_series(parts[0], SeriesFormat::csv, SeriesRole::mains());
    SignalSeries truth =
        load_series(parts[1], SeriesFormat::csv, SeriesRole::appliance(so.appliance));
    SignalSeries pred =
        load_series(parts[2], SeriesFormat::csv, SeriesRole::appliance(so.appliance), false);
    const std::size_t n = std::min({span, pred.size()});
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t ts = pred.timestamps[i];
      so.timestamps.push_back(ts);
      so.pred.push_back(pred.watts[i]);
      auto pick = [ts](const SignalSeries& s) {
        auto it = std::lower_bound(s.timestamps.begin(), s.timestamps.end(), ts);
        if (it == s.timestamps.end() || *it != ts) return 0.0;
        return s.watts[static_cast<std::size_t>(it - s.timestamps.begin())];
      };
      so.mains.push_back(pick(mains));
      so.truth.push_back(pick(truth));
    }
    merged.overlays.push_back(std::move(so));
  }

  auto files = emit_report(merged, {ReportFormat::csv, ReportFormat::json, ReportFormat::svg},
                           out_prefix);
  json written = json::array();
  for (const auto& f : files) written.push_back(f.string());
  log_json({{"event", "report"}, {"files", written}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarially regularized seq2point energy disaggregation"};
  app.require_subcommand(1);

  std::string config_path, target_flag;
  CliOverrides ov;
  std::optional<std::uint64_t> seed_flag;
  std::string out_flag, precision_flag;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--seed", seed_flag, "override the run seed");
    cmd->add_option("--out", out_flag, "output directory");
    cmd->add_option("--threads", ov.threads, "worker threads (0 = all cores)");
    cmd->add_option("--precision", precision_flag, "numeric precision: f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd->add_flag("--no-adversarial", ov.no_adversarial,
                  "train the prediction-only ablation");
    cmd->add_flag("--paper-defaults", ov.paper_defaults,
                  "batch 1000, 50 epochs, lambda 0.05, window 599");
    cmd->add_flag("--fresh-model", ov.fresh_model,
                  "random-init the shared generator instead of warm starting");
  };

  auto* sim = app.add_subcommand("simulate", "generate a synthetic household fleet");
  add_common(sim);
  auto* ingest = app.add_subcommand("ingest", "align and resample a raw dataset");
  add_common(ingest);
  auto* pretrain = app.add_subcommand("pretrain", "pretrain per-appliance extractors");
  add_common(pretrain);
  auto* train = app.add_subcommand("train", "adversarially train the target model");
  add_common(train);
  train->add_option("--target", target_flag, "target appliance name");

  auto* disagg = app.add_subcommand("disaggregate", "predict appliance power from mains");
  std::string gen_path, pred_path, mains_path, disagg_out;
  disagg->add_option("--gen", gen_path, "generator checkpoint")->required();
  disagg->add_option("--pred", pred_path, "predictor checkpoint")->required();
  disagg->add_option("--mains", mains_path, "mains series file")->required();
  disagg->add_option("--out", disagg_out, "output series file")->required();
  disagg->add_option("--threads", ov.threads, "worker threads");

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  std::string eval_pred, eval_truth, eval_appliance = "appliance", eval_out;
  bool no_clamp = false;
  evaluate->add_option("--pred", eval_pred, "prediction series file")->required();
  evaluate->add_option("--truth", eval_truth, "ground-truth series file")->required();
  evaluate->add_option("--appliance", eval_appliance, "appliance name for the report");
  evaluate->add_option("--out", eval_out, "output path prefix")->required();
  evaluate->add_flag("--no-clamp", no_clamp, "keep negative predictions in the metrics");

  auto* report = app.add_subcommand("report", "merge evaluations into tables and plots");
  std::vector<std::string> report_evals, report_overlays;
  std::size_t report_span = 2000;
  std::string report_out;
  report->add_option("--eval", report_evals, "evaluate JSON output (repeatable)");
  report->add_option("--overlay", report_overlays,
                     "series overlay: appliance=mains,truth,pred (repeatable)");
  report->add_option("--span", report_span, "overlay sample count");
  report->add_option("--out", report_out, "output path prefix")->required();

  CLI11_PARSE(app, argc, argv);

  if (seed_flag) ov.seed = seed_flag;
  if (!out_flag.empty()) ov.out = out_flag;
  if (!precision_flag.empty()) ov.precision = precision_flag;
  set_num_threads(ov.threads);

  try {
    if (app.got_subcommand(sim)) return cmd_simulate(load_run_config(config_path, ov));
    if (app.got_subcommand(ingest)) return cmd_ingest(load_run_config(config_path, ov));
    if (app.got_subcommand(pretrain)) {
      RunConfig rc = load_run_config(config_path, ov);
      return rc.precision == Precision::f32 ? run_pretrain<float>(rc) : run_pretrain<double>(rc);
    }
    if (app.got_subcommand(train)) {
      RunConfig rc = load_run_config(config_path, ov);
      if (!target_flag.empty()) rc.target = target_flag;
      return rc.precision == Precision::f32 ? run_train<float>(rc) : run_train<double>(rc);
    }
    if (app.got_subcommand(disagg))
      return cmd_disaggregate(gen_path, pred_path, mains_path, disagg_out);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(eval_pred, eval_truth, eval_appliance, eval_out, !no_clamp);
    if (app.got_subcommand(report))
      return cmd_report(report_evals, report_overlays, report_span, report_out);
  } catch (const Error& e) {
    log_json({{"event", "error"}, {"message", e.what()}});
    return exit_code_for(e);
  } catch (const std::exception& e) {
    log_json({{"event", "error"}, {"message", e.what()}});
    return 1;
  }
  return kExitConfig;
}
