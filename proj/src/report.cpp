// SPDX-License-Identifier: Apache-2.0

#include "vrt/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vrt/error.hpp"

namespace vrt {
namespace {

struct Column {
  std::string_view key;    // csv/json key
  std::string_view title;  // table heading
  const ReportCell* cell;
};

std::vector<Column> columns(const MetricsReport& r) {
  return {{"comp", "#comp", &r.cell(Category::comp)},
          {"func", "#func", &r.cell(Category::func)},
          {"loc", "#loc", &r.cell(Category::loc)},
          {"visf", "#visf", &r.cell(Category::visf)},
          {"overall", "Overall", &r.overall}};
}

std::string shortest(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string pad_left(std::string_view s, std::size_t width) {
  return std::string(width > s.size() ? width - s.size() : 0, ' ') + std::string(s);
}

std::string center(std::string_view s, std::size_t width) {
  const std::size_t total = width > s.size() ? width - s.size() : 0;
  return std::string(total / 2, ' ') + std::string(s) +
         std::string(total - total / 2, ' ');
}

std::string render_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "mode,tau,lq_aggregation";
  for (const auto& c : columns(r)) {
    os << ',' << c.key << "_R-LQ," << c.key << "_R-VQ," << c.key << "_A";
  }
  for (const auto& c : columns(r)) os << ',' << c.key << "_n";
  os << '\n';
  os << to_string(r.mode) << ',' << shortest(r.tau) << ',' << to_string(r.lq_aggregation);
  for (const auto& c : columns(r)) {
    os << ',' << format_percent(c.cell->r_lq) << ',' << format_percent(c.cell->r_vq)
       << ',' << format_percent(c.cell->a);
  }
  for (const auto& c : columns(r)) os << ',' << c.cell->samples;
  os << '\n';
  return os.str();
}

// One column group per category.
std::string render_table(const MetricsReport& r) {
  constexpr std::size_t kNum = 6;
  constexpr std::size_t kGroup = 3 * kNum + 2;
  constexpr std::size_t kLabel = 8;
  std::ostringstream os;
  os << "mode=" << to_string(r.mode) << " tau=" << shortest(r.tau)
     << " lq_aggregation=" << to_string(r.lq_aggregation) << '\n';

  os << std::string(kLabel, ' ');
  for (const auto& c : columns(r)) os << '|' << center(c.title, kGroup);
  os << '\n' << std::string(kLabel, ' ');
  for (std::size_t i = 0; i < columns(r).size(); ++i) {
    os << '|' << ' ' << pad_left("R-LQ", kNum) << pad_left("R-VQ", kNum)
       << pad_left("A", kNum) << ' ';
  }
  os << '\n' << "score" << std::string(kLabel - 5, ' ');
  for (const auto& c : columns(r)) {
    os << '|' << ' ' << pad_left(format_percent(c.cell->r_lq), kNum)
       << pad_left(format_percent(c.cell->r_vq), kNum)
       << pad_left(format_percent(c.cell->a), kNum) << ' ';
  }
  os << '\n' << "samples" << std::string(kLabel - 7, ' ');
  for (const auto& c : columns(r)) {
    os << '|' << ' ' << pad_left(std::to_string(c.cell->samples), kNum)
       << std::string(2 * kNum + 1, ' ');
  }
  os << '\n';
  return os.str();
}

ReportCell cell_from_json(const nlohmann::json& j) {
  ReportCell c;
  c.r_lq = j.at("R-LQ").get<double>();
  c.r_vq = j.at("R-VQ").get<double>();
  c.a = j.at("A").get<double>();
  c.samples = j.at("samples").get<std::size_t>();
  c.matched_traces = j.value("matched_traces", std::size_t{0});
  return c;
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "table") return ReportFormat::table;
  if (s == "json") return ReportFormat::json;
  return std::nullopt;
}

double round_percent(double pct) { return std::round(pct * 10.0) / 10.0; }

std::string format_percent(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", round_percent(pct));
  return buf;
}

nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::object();
  for (const auto& c : columns(r)) {
    cells[std::string(c.key)] = {{"R-LQ", round_percent(c.cell->r_lq)},
                                 {"R-VQ", round_percent(c.cell->r_vq)},
                                 {"A", round_percent(c.cell->a)},
                                 {"samples", c.cell->samples},
                                 {"matched_traces", c.cell->matched_traces}};
  }
  return {{"mode", to_string(r.mode)},
          {"tau", r.tau},
          {"lq_aggregation", to_string(r.lq_aggregation)},
          {"cells", std::move(cells)}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  try {
    MetricsReport r;
    auto mode = parse_eval_mode(j.at("mode").get<std::string>());
    auto agg = parse_lq_aggregation(j.at("lq_aggregation").get<std::string>());
    if (!mode || !agg) throw LoadError("report has unknown mode or lq_aggregation");
    r.mode = *mode;
    r.lq_aggregation = *agg;
    r.tau = j.at("tau").get<double>();
    const auto& cells = j.at("cells");
    for (auto c : kCategories) {
      r.categories[static_cast<std::size_t>(c)] =
          cell_from_json(cells.at(std::string(category_name(c))));
    }
    r.overall = cell_from_json(cells.at("overall"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string emit_report(const MetricsReport& report, ReportFormat format) {
  if (report.overall.samples == 0) throw Error("cannot render an empty report");
  switch (format) {
    case ReportFormat::csv: return render_csv(report);
    case ReportFormat::table: return render_table(report);
    case ReportFormat::json: return report_to_json(report).dump(2) + "\n";
  }
  throw Error("unknown report format");
}

}  // namespace vrt
