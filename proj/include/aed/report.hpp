#pragma once

#include <filesystem>
#include <vector>

#include "aed/metrics.hpp"

namespace aed {

enum class ReportFormat { csv, json, svg };

// Writes <prefix>.csv / <prefix>.json / <prefix>_shares.svg plus one
// <prefix>_<appliance>.svg line plot per overlay. Output bytes depend only on
// the report contents. Returns the paths written.
std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& prefix);

}  // namespace aed
