#include <doctest.h>

#include <cmath>

#include "aed/simulate.hpp"

using namespace aed;

namespace {

std::vector<ApplianceModel> three_appliances() {
  ApplianceModel kettle;
  kettle.kind = ApplianceModel::Kind::spike;
  kettle.name = "kettle";
  kettle.on_power = 1800;
  kettle.mean_on = 20;
  kettle.mean_off = 300;

  ApplianceModel fridge;
  fridge.kind = ApplianceModel::Kind::cyclic;
  fridge.name = "fridge";
  fridge.on_power = 150;
  fridge.mean_on = 120;
  fridge.mean_off = 180;

  ApplianceModel washer;
  washer.kind = ApplianceModel::Kind::multi_phase;
  washer.name = "washer";
  washer.mean_off = 900;
  washer.phases = {{400, 60}, {1900, 150}, {600, 90}};
  return {kettle, fridge, washer};
}

}  // namespace

TEST_CASE("zero-noise mains is exactly the appliance sum") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto h = simulate_household(three_appliances(), NoiseModel{0.0}, 3000, seed);
    REQUIRE(h.appliances.size() == 3);
    for (std::size_t t = 0; t < 3000; ++t) {
      double total = 0;
      for (const auto& a : h.appliances) total += a.watts[t];
      CHECK(h.mains.watts[t] == total);
    }
  }
}

TEST_CASE("two-state appliance energy equals on_power times ON samples") {
  ApplianceModel m;
  m.kind = ApplianceModel::Kind::two_state;
  m.name = "heater";
  m.on_power = 1000;
  m.mean_on = 40;
  m.mean_off = 60;
  auto h = simulate_household({m}, NoiseModel{0.0}, 20000, 7);
  const auto& x = h.appliances[0].watts;
  std::size_t on_samples = 0;
  double total = 0;
  for (double w : x) {
    if (w != 0.0) {
      CHECK(w == 1000.0);
      ++on_samples;
    }
    total += w;
  }
  CHECK(on_samples > 0);
  CHECK(total == 1000.0 * static_cast<double>(on_samples));
}

TEST_CASE("same seed reproduces bitwise-identical households") {
  auto a = simulate_household(three_appliances(), NoiseModel{75.0}, 5000, 99);
  auto b = simulate_household(three_appliances(), NoiseModel{75.0}, 5000, 99);
  CHECK(a.mains.watts == b.mains.watts);
  for (std::size_t i = 0; i < a.appliances.size(); ++i)
    CHECK(a.appliances[i].watts == b.appliances[i].watts);
  auto c = simulate_household(three_appliances(), NoiseModel{75.0}, 5000, 100);
  CHECK(a.mains.watts != c.mains.watts);
}

TEST_CASE("mains is clamped at zero") {
  ApplianceModel m;
  m.kind = ApplianceModel::Kind::two_state;
  m.name = "tiny";
  m.on_power = 1.0;
  m.mean_on = 2;
  m.mean_off = 2;
  auto h = simulate_household({m}, NoiseModel{500.0}, 5000, 3);
  for (double w : h.mains.watts) CHECK(w >= 0.0);
}

TEST_CASE("residual noise statistics converge at T = 100000") {
  // strong base load keeps the zero clamp inactive
  ApplianceModel base;
  base.kind = ApplianceModel::Kind::two_state;
  base.name = "base";
  base.on_power = 2500;
  base.standby_power = 2000;
  base.mean_on = 50;
  base.mean_off = 50;
  const double sigma = 200.0;
  auto h = simulate_household({base}, NoiseModel{sigma}, 100000, 12345);
  const auto& x = h.appliances[0].watts;
  double sum = 0;
  for (std::size_t t = 0; t < x.size(); ++t) sum += h.mains.watts[t] - x[t];
  const double mean = sum / static_cast<double>(x.size());
  double sq = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double r = h.mains.watts[t] - x[t] - mean;
    sq += r * r;
  }
  const double var = sq / static_cast<double>(x.size());
  CHECK(std::fabs(mean) < 5.0);  // sigma/sqrt(T) ~ 0.6
  CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("two-state ON fraction converges to mean_on/(mean_on+mean_off)") {
  ApplianceModel m;
  m.kind = ApplianceModel::Kind::two_state;
  m.name = "duty";
  m.on_power = 500;
  m.mean_on = 30;
  m.mean_off = 70;
  auto h = simulate_household({m}, NoiseModel{0.0}, 100000, 21);
  std::size_t on = 0;
  for (double w : h.appliances[0].watts) on += (w > 0);
  const double fraction = static_cast<double>(on) / 100000.0;
  CHECK(fraction == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("fleet split arithmetic") {
  FleetConfig cfg;
  cfg.households = 10;
  cfg.samples_per_household = 50;
  cfg.appliances = three_appliances();

  SUBCASE("(0.8, 0.1, 0.1) of 10 households gives (8, 1, 1)") {
    auto fleet = simulate_fleet(cfg, 5);
    CHECK(fleet.train.size() == 8);
    CHECK(fleet.val.size() == 1);
    CHECK(fleet.test.size() == 1);
  }

  SUBCASE("(1, 0, 0) puts every household in train") {
    cfg.split_train = 1.0;
    cfg.split_val = 0.0;
    cfg.split_test = 0.0;
    auto fleet = simulate_fleet(cfg, 5);
    CHECK(fleet.train.size() == 10);
    CHECK(fleet.val.empty());
    CHECK(fleet.test.empty());
  }

  SUBCASE("invalid fractions are rejected") {
    cfg.split_train = 0.9;
    cfg.split_val = 0.3;
    CHECK_THROWS_AS(simulate_fleet(cfg, 5), Error);
  }

  SUBCASE("regeneration with the master seed is identical; households differ") {
    auto f1 = simulate_fleet(cfg, 77);
    auto f2 = simulate_fleet(cfg, 77);
    REQUIRE(f1.train.size() == f2.train.size());
    for (std::size_t i = 0; i < f1.train.size(); ++i)
      CHECK(f1.train[i].mains.watts == f2.train[i].mains.watts);
    CHECK(f1.train[0].mains.watts != f1.train[1].mains.watts);
  }
}

TEST_CASE("model validation") {
  ApplianceModel m;
  m.name = "bad";
  m.on_power = -5;
  CHECK_THROWS_AS(m.validate(), Error);
  m.on_power = 5;
  m.mean_on = 0.5;
  CHECK_THROWS_AS(m.validate(), Error);
  m.mean_on = 1;
  CHECK_NOTHROW(m.validate());
  m.kind = ApplianceModel::Kind::multi_phase;
  CHECK_THROWS_AS(m.validate(), Error);
  CHECK_THROWS_AS(simulate_household({}, NoiseModel{}, 10, 1), Error);
  CHECK_THROWS_AS(simulate_household({m}, NoiseModel{-1.0}, 10, 1), Error);
}
