#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aed/error.hpp"

namespace aed {

// Mean absolute error in Watts over equal-length denormalized sequences.
double mae(std::span<const double> pred, std::span<const double> truth);

// Normalized signal aggregate error |sum(pred) - sum(truth)| / sum(truth).
double sae(std::span<const double> pred, std::span<const double> truth);

// share_i = 100 * totals_i / sum(totals); at least one total must be > 0.
std::vector<double> energy_shares(std::span<const double> totals);

// Negative predictions clipped to zero (power is nonnegative). Metrics apply
// this by default; diagnostics may skip it.
std::vector<double> clamp_nonnegative(std::span<const double> values);

struct ApplianceEval {
  std::string name;
  double mae_watts = 0.0;
  double sae = 0.0;
  double pred_total = 0.0;  // Watt-samples
  double true_total = 0.0;  // Watt-samples
  double share_pct = 0.0;   // of summed predicted totals
};

// Optional mains/truth/prediction excerpt rendered into the report's SVG
// line plot.
struct SeriesOverlay {
  std::string appliance;
  std::vector<std::int64_t> timestamps;
  std::vector<double> mains;
  std::vector<double> truth;
  std::vector<double> pred;
};

struct EvalReport {
  std::vector<ApplianceEval> appliances;
  std::map<std::string, std::string> metadata;  // dataset, checkpoint, window, seed, ...
  std::vector<SeriesOverlay> overlays;
};

ApplianceEval evaluate_appliance(const std::string& name, std::span<const double> pred,
                                 std::span<const double> truth, bool clamp = true);

// Fills share_pct from the appliances' predicted totals.
void assign_shares(EvalReport& report);

}  // namespace aed
