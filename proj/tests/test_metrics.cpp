#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "aed/metrics.hpp"
#include "aed/report.hpp"

using namespace aed;

namespace {

// independent straight-loop references
double mae_ref(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - t[i]);
  return s / static_cast<double>(p.size());
}

double sae_ref(const std::vector<double>& p, const std::vector<double>& t) {
  double rp = 0, rt = 0;
  for (double v : p) rp += v;
  for (double v : t) rt += v;
  return std::fabs(rp - rt) / rt;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("mae hand examples") {
  std::vector<double> t{1, 2, 3};
  CHECK(mae(t, t) == 0.0);
  CHECK(mae(std::vector<double>{2, 2, 5}, t) == doctest::Approx(1.0));
  std::vector<double> shifted{1 + 2.5, 2 + 2.5, 3 + 2.5};
  CHECK(mae(shifted, t) == doctest::Approx(2.5));
  CHECK_THROWS_AS(mae(std::vector<double>{1, 2}, t), Error);
  CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("sae hand examples") {
  std::vector<double> t{40, 30, 30};
  CHECK(sae(t, t) == 0.0);
  std::vector<double> p;
  for (double v : t) p.push_back(1.1 * v);
  CHECK(sae(p, t) == doctest::Approx(0.1).epsilon(1e-9));
  // predicted total 110 against true total 100
  CHECK(sae(std::vector<double>{110.0}, std::vector<double>{100.0}) == doctest::Approx(0.1));
  CHECK_THROWS_AS(sae(t, std::vector<double>{0, 0, 0}), Error);
}

TEST_CASE("sae scale property is exact for power-of-two factors") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(0.1, 100.0);
  std::vector<double> t(257);
  for (auto& v : t) v = dist(rng);
  for (double k : {2.0, 0.5, 4.0}) {
    std::vector<double> p;
    for (double v : t) p.push_back(k * v);
    CHECK(sae(p, t) == std::fabs(k - 1.0));
  }
  for (double k : {1.3, 0.7, 3.14}) {
    std::vector<double> p;
    for (double v : t) p.push_back(k * v);
    CHECK(sae(p, t) == doctest::Approx(std::fabs(k - 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("mae and sae agree with straight-loop references on random pairs") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(0.0, 2000.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 400;
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = dist(rng);
      t[i] = dist(rng) + 0.1;
    }
    CHECK(std::fabs(mae(p, t) - mae_ref(p, t)) <= 1e-12 * std::max(1.0, mae_ref(p, t)));
    CHECK(std::fabs(sae(p, t) - sae_ref(p, t)) <= 1e-12 * std::max(1.0, sae_ref(p, t)));
  }
}

TEST_CASE("mae satisfies the triangle inequality") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 64;
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = dist(rng);
      b[i] = dist(rng);
      c[i] = dist(rng);
    }
    CHECK(mae(a, c) <= mae(a, b) + mae(b, c) + 1e-12);
  }
}

TEST_CASE("energy shares") {
  auto even = energy_shares(std::vector<double>{1, 1, 1, 1});
  for (double s : even) CHECK(s == 25.0);
  auto uneven = energy_shares(std::vector<double>{300, 100});
  CHECK(uneven[0] == 75.0);
  CHECK(uneven[1] == 25.0);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(0.0, 1e6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> totals(1 + rng() % 8);
    for (auto& t : totals) t = dist(rng) + 1.0;
    auto shares = energy_shares(totals);
    double sum = 0;
    for (double s : shares) sum += s;
    CHECK(std::fabs(sum - 100.0) <= 1e-6);
  }
  CHECK_THROWS_AS(energy_shares(std::vector<double>{0, 0}), Error);
}

TEST_CASE("negative predictions clamp to zero before metrics") {
  std::vector<double> truth{0, 0, 10};
  std::vector<double> pred{-5, 0, 10};
  auto ev = evaluate_appliance("x", pred, truth, /*clamp=*/true);
  CHECK(ev.mae_watts == 0.0);
  auto raw = evaluate_appliance("x", pred, truth, /*clamp=*/false);
  CHECK(raw.mae_watts > 0.0);
}

TEST_CASE("emit_report structure and determinism") {
  EvalReport report;
  report.metadata = {{"dataset", "synthetic"}, {"window", "599"}, {"seed", "7"}};
  report.appliances.push_back({"kettle", 12.5, 0.05, 3000.0, 3100.0, 0.0});
  report.appliances.push_back({"fridge", 8.25, 0.02, 1000.0, 990.0, 0.0});
  assign_shares(report);
  CHECK(report.appliances[0].share_pct == 75.0);

  SeriesOverlay ov;
  ov.appliance = "kettle";
  for (int i = 0; i < 32; ++i) {
    ov.timestamps.push_back(i * 6);
    ov.mains.push_back(100.0 + i);
    ov.truth.push_back(i % 7 == 0 ? 1800.0 : 0.0);
    ov.pred.push_back(i % 7 == 0 ? 1700.0 : 12.0);
  }
  report.overlays.push_back(ov);

  auto dir = std::filesystem::temp_directory_path() / "aed_report_test";
  std::filesystem::create_directories(dir);
  auto files1 = emit_report(report, {ReportFormat::csv, ReportFormat::json, ReportFormat::svg},
                            dir / "run_a");
  auto files2 = emit_report(report, {ReportFormat::csv, ReportFormat::json, ReportFormat::svg},
                            dir / "run_b");
  REQUIRE(files1.size() == files2.size());
  REQUIRE(files1.size() == 4);  // csv, json, shares svg, one overlay svg
  for (std::size_t i = 0; i < files1.size(); ++i) CHECK(slurp(files1[i]) == slurp(files2[i]));

  // CSV has one row per appliance plus the header
  auto csv = slurp(files1[0]);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("appliance,mae_watts,sae,pred_total,true_total,share_pct\n", 0) == 0);

  EvalReport empty;
  CHECK_THROWS_AS(emit_report(empty, {ReportFormat::csv}, dir / "empty"), Error);
  std::filesystem::remove_all(dir);
}
