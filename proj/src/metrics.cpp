#include "aed/metrics.hpp"

#include <cmath>

namespace aed {

namespace {

constexpr int kLanes = 8;

// fixed-order lane accumulation; one deterministic summation order
double lane_sum(std::span<const double> v) {
  double lanes[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= v.size(); i += kLanes)
    for (int j = 0; j < kLanes; ++j) lanes[j] += v[i + j];
  double s = 0;
  for (int j = 0; j < kLanes; ++j) s += lanes[j];
  for (; i < v.size(); ++i) s += v[i];
  return s;
}

void require_pair(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty()) fail(errc::config, "metric over empty sequences");
  if (pred.size() != truth.size())
    fail(errc::shape, "metric length mismatch: " + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> truth) {
  require_pair(pred, truth);
  double lanes[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= pred.size(); i += kLanes)
    for (int j = 0; j < kLanes; ++j) lanes[j] += std::fabs(pred[i + j] - truth[i + j]);
  double s = 0;
  for (int j = 0; j < kLanes; ++j) s += lanes[j];
  for (; i < pred.size(); ++i) s += std::fabs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

double sae(std::span<const double> pred, std::span<const double> truth) {
  require_pair(pred, truth);
  const double r_true = lane_sum(truth);
  if (!(r_true > 0.0)) fail(errc::numeric, "SAE undefined: total true energy is not positive");
  const double r_pred = lane_sum(pred);
  return std::fabs(r_pred - r_true) / r_true;
}

std::vector<double> energy_shares(std::span<const double> totals) {
  if (totals.empty()) fail(errc::config, "energy_shares over empty totals");
  double sum = 0.0;
  for (double t : totals) {
    if (t < 0.0) fail(errc::numeric, "energy totals must be >= 0");
    sum += t;
  }
  if (!(sum > 0.0)) fail(errc::numeric, "energy_shares undefined: all totals are zero");
  std::vector<double> shares(totals.size());
  for (std::size_t i = 0; i < totals.size(); ++i) shares[i] = 100.0 * totals[i] / sum;
  return shares;
}

std::vector<double> clamp_nonnegative(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out)
    if (v < 0.0) v = 0.0;
  return out;
}

ApplianceEval evaluate_appliance(const std::string& name, std::span<const double> pred,
                                 std::span<const double> truth, bool clamp) {
  ApplianceEval ev;
  ev.name = name;
  std::vector<double> clamped;
  std::span<const double> p = pred;
  if (clamp) {
    clamped = clamp_nonnegative(pred);
    p = clamped;
  }
  ev.mae_watts = mae(p, truth);
  ev.sae = sae(p, truth);
  ev.pred_total = lane_sum(p);
  ev.true_total = lane_sum(truth);
  return ev;
}

void assign_shares(EvalReport& report) {
  if (report.appliances.empty()) fail(errc::config, "report has no appliances");
  std::vector<double> totals;
  totals.reserve(report.appliances.size());
  for (const auto& a : report.appliances) totals.push_back(a.pred_total);
  auto shares = energy_shares(totals);
  for (std::size_t i = 0; i < shares.size(); ++i) report.appliances[i].share_pct = shares[i];
}

}  // namespace aed
