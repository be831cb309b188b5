#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aed/rng.hpp"
#include "aed/signal.hpp"

// Synthetic households following the additive model: mains(t) is the sum of
// the per-appliance traces plus i.i.d. Gaussian noise, clamped at zero.
// Appliance archetypes imitate common load signatures: steady two-state
// loads, duty-cycled compressors, short high-power bursts, and staged
// multi-phase programs.

namespace aed {

struct ApplianceModel {
  enum class Kind { two_state, cyclic, multi_phase, spike };

  Kind kind = Kind::two_state;
  std::string name;
  double on_power = 0.0;       // Watts while ON
  double standby_power = 0.0;  // Watts while OFF
  double mean_on = 1.0;        // mean ON duration, samples
  double mean_off = 1.0;       // mean OFF duration, samples
  std::vector<std::pair<double, std::size_t>> phases;  // multi_phase: (Watts, samples)

  void validate() const;
};

struct NoiseModel {
  double sigma = 0.0;  // Watts, homoscedastic

  void validate() const {
    if (sigma < 0.0) fail(errc::config, "noise sigma must be >= 0");
  }
};

struct Household {
  std::string name;
  SignalSeries mains;
  std::vector<SignalSeries> appliances;
};

// Deterministic per (models, noise, samples, seed). Appliance traces use
// independent seed streams, so adding an appliance never shifts the others.
Household simulate_household(const std::vector<ApplianceModel>& models, const NoiseModel& noise,
                             std::size_t samples, std::uint64_t seed, std::int64_t start_time = 0,
                             std::int64_t period = 6);

struct FleetConfig {
  std::size_t households = 10;
  std::size_t samples_per_household = 4000;
  std::int64_t period = 6;
  NoiseModel noise;
  std::vector<ApplianceModel> appliances;
  double split_train = 0.8;
  double split_val = 0.1;
  double split_test = 0.1;

  void validate() const;
};

struct Fleet {
  std::vector<Household> train, val, test;
  FleetConfig config;
};

// Split sizes are floor(f_train * n), floor(f_val * n), remainder to test.
// Household seeds derive from the master seed; regeneration is bitwise
// identical.
Fleet simulate_fleet(const FleetConfig& config, std::uint64_t seed);

}  // namespace aed
