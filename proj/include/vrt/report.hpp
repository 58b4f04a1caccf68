#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "vrt/metrics.hpp"

namespace vrt {

enum class ReportFormat { csv, table, json };

std::optional<ReportFormat> parse_report_format(std::string_view s);

/// Rounds a percentage to one decimal, halves away from zero.
double round_percent(double pct);
/// "66.3"-style rendering of round_percent(pct).
std::string format_percent(double pct);

/// Byte-deterministic rendering. Throws vrt::Error for a report without
/// samples.
std::string emit_report(const MetricsReport& report, ReportFormat format);

nlohmann::ordered_json report_to_json(const MetricsReport& report);
/// Inverse of report_to_json (scores come back already rounded).
MetricsReport report_from_json(const nlohmann::json& j);

}  // namespace vrt
