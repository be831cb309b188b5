#include "aed/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace aed {

void ApplianceModel::validate() const {
  if (name.empty()) fail(errc::config, "appliance model needs a name");
  if (on_power < 0.0 || standby_power < 0.0)
    fail(errc::config, "appliance powers must be >= 0: " + name);
  if (mean_on < 1.0 || mean_off < 1.0)
    fail(errc::config, "appliance mean durations must be >= 1 sample: " + name);
  if (kind == Kind::multi_phase) {
    if (phases.empty()) fail(errc::config, "multi-phase appliance needs phases: " + name);
    for (const auto& [power, duration] : phases) {
      if (power < 0.0) fail(errc::config, "phase power must be >= 0: " + name);
      if (duration < 1) fail(errc::config, "phase duration must be >= 1: " + name);
    }
  }
}

void FleetConfig::validate() const {
  if (households == 0) fail(errc::config, "fleet needs at least one household");
  if (samples_per_household == 0) fail(errc::config, "samples_per_household must be >= 1");
  if (period <= 0) fail(errc::config, "period must be > 0");
  if (appliances.empty()) fail(errc::config, "fleet needs at least one appliance");
  if (split_train < 0 || split_val < 0 || split_test < 0 ||
      std::fabs(split_train + split_val + split_test - 1.0) > 1e-9)
    fail(errc::config, "split fractions must be nonnegative and sum to 1");
  noise.validate();
  for (const auto& m : appliances) m.validate();
}

namespace {

std::size_t geometric_duration(std::mt19937_64& rng, double mean) {
  if (mean <= 1.0) return 1;
  std::geometric_distribution<std::size_t> dist(1.0 / mean);
  return 1 + dist(rng);
}

std::vector<double> appliance_trace(const ApplianceModel& m, std::size_t samples,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(samples, m.standby_power);

  switch (m.kind) {
    case ApplianceModel::Kind::two_state:
    case ApplianceModel::Kind::spike: {
      std::uniform_real_distribution<double> jitter(0.9, 1.1);
      bool on = false;
      std::size_t t = 0;
      // consume a random fraction of the first OFF period so households
      // don't all switch in lockstep
      std::size_t remaining = geometric_duration(rng, m.mean_off);
      remaining -= std::min(remaining - 1, static_cast<std::size_t>(rng() % remaining));
      double level = m.on_power;
      while (t < samples) {
        if (on) {
          const std::size_t run = std::min(remaining, samples - t);
          std::fill(x.begin() + t, x.begin() + t + run, level);
          t += run;
        } else {
          t += std::min(remaining, samples - t);
        }
        on = !on;
        remaining = geometric_duration(rng, on ? m.mean_on : m.mean_off);
        if (on && m.kind == ApplianceModel::Kind::spike) level = m.on_power * jitter(rng);
      }
      break;
    }
    case ApplianceModel::Kind::cyclic: {
      const std::size_t on_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m.mean_on)));
      const std::size_t off_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m.mean_off)));
      const std::size_t cycle = on_len + off_len;
      const std::size_t phase = rng() % cycle;
      for (std::size_t t = 0; t < samples; ++t)
        if ((t + phase) % cycle < on_len) x[t] = m.on_power;
      break;
    }
    case ApplianceModel::Kind::multi_phase: {
      std::size_t t = std::min<std::size_t>(samples, geometric_duration(rng, m.mean_off));
      while (t < samples) {
        for (const auto& [power, duration] : m.phases) {
          const std::size_t run = std::min(duration, samples - t);
          std::fill(x.begin() + t, x.begin() + t + run, power);
          t += run;
          if (t >= samples) break;
        }
        if (t >= samples) break;
        t += geometric_duration(rng, m.mean_off);
      }
      break;
    }
  }
  return x;
}

}  // namespace

Household simulate_household(const std::vector<ApplianceModel>& models, const NoiseModel& noise,
                             std::size_t samples, std::uint64_t seed, std::int64_t start_time,
                             std::int64_t period) {
  if (samples == 0) fail(errc::config, "simulate_household needs samples >= 1");
  if (models.empty()) fail(errc::config, "simulate_household needs at least one appliance model");
  noise.validate();
  for (const auto& m : models) m.validate();

  Household h;
  h.mains.role = SeriesRole::mains();
  h.mains.timestamps.resize(samples);
  for (std::size_t t = 0; t < samples; ++t)
    h.mains.timestamps[t] = start_time + period * static_cast<std::int64_t>(t);

  std::vector<double> total(samples, 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    SignalSeries s;
    s.role = SeriesRole::appliance(models[i].name);
    s.timestamps = h.mains.timestamps;
    s.watts = appliance_trace(models[i], samples, derive_seed(seed, i + 1));
    for (std::size_t t = 0; t < samples; ++t) total[t] += s.watts[t];
    h.appliances.push_back(std::move(s));
  }

  h.mains.watts.resize(samples);
  if (noise.sigma > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::normal_distribution<double> eps(0.0, noise.sigma);
    for (std::size_t t = 0; t < samples; ++t) h.mains.watts[t] = std::max(0.0, total[t] + eps(rng));
  } else {
    h.mains.watts = total;
  }
  return h;
}

Fleet simulate_fleet(const FleetConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t n = config.households;
  const std::size_t n_train = static_cast<std::size_t>(config.split_train * static_cast<double>(n));
  const std::size_t n_val = static_cast<std::size_t>(config.split_val * static_cast<double>(n));
  if (n_train + n_val > n) fail(errc::config, "split fractions overflow household count");

  Fleet fleet;
  fleet.config = config;
  for (std::size_t i = 0; i < n; ++i) {
    Household h = simulate_household(config.appliances, config.noise,
                                     config.samples_per_household, derive_seed(seed, 1000 + i), 0,
                                     config.period);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "house_%03zu", i);
    h.name = buf;
    if (i < n_train)
      fleet.train.push_back(std::move(h));
    else if (i < n_train + n_val)
      fleet.val.push_back(std::move(h));
    else
      fleet.test.push_back(std::move(h));
  }
  return fleet;
}

}  // namespace aed
