#include "otpmart/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "otpmart/errors.hpp"

namespace otp {

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5) / scale;
}

std::vector<ReportRow> percent_of_total(
    const std::vector<std::pair<std::string, double>>& values) {
  double total = 0;
  for (const auto& [label, v] : values) {
    if (v < 0) {
      throw DomainError("percent_of_total requires non-negative values, got " +
                        std::to_string(v) + " for '" + label + "'");
    }
    total += v;
  }
  if (!(total > 0)) {
    throw DomainError("percent_of_total requires at least one positive value");
  }
  std::vector<ReportRow> rows;
  rows.reserve(values.size());
  for (const auto& [label, v] : values) {
    rows.push_back({label, v, round_half_up(100.0 * v / total, 3)});
  }
  return rows;
}

namespace {

// Shortest clean decimal for table cells: up to 6 decimals, trailing zeros
// trimmed ("3.5", "5", "41.176").
std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string format_percent(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string render_table_csv(const Report& report) {
  std::string out = "label,value,percentOfTotal\n";
  for (const auto& row : report.rows) {
    out += row.label;
    out += ',';
    out += row.value ? format_value(*row.value) : "undefined";
    out += ',';
    if (row.percent_of_total) out += format_percent(*row.percent_of_total);
    out += '\n';
  }
  return out;
}

std::string render_table_json(const Report& report) {
  nlohmann::json j;
  j["title"] = report.title;
  j["unit"] = report.unit;
  j["period"] = report.period_label;
  j["metric"] = report.metric_id;
  auto rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["label"] = row.label;
    if (row.value) {
      r["value"] = *row.value;
    } else {
      r["value"] = "undefined";
    }
    if (row.percent_of_total) r["percentOfTotal"] = *row.percent_of_total;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

ChartKind chart_kind_from_string(const std::string& s) {
  if (s == "pie") return ChartKind::kPie;
  if (s == "bar") return ChartKind::kBar;
  throw DomainError("unknown chart kind '" + s + "' (expected pie or bar)");
}

std::vector<double> pie_angles(const std::vector<double>& values) {
  double total = 0;
  for (double v : values) {
    if (v < 0) throw DomainError("pie values must be non-negative");
    total += v;
  }
  if (!(total > 0)) throw DomainError("pie chart requires a positive total");
  std::vector<double> angles;
  angles.reserve(values.size());
  for (double v : values) angles.push_back(360.0 * v / total);
  return angles;
}

const std::vector<std::string>& chart_palette() {
  static const std::vector<std::string> palette = {
      "#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
      "#59a14f", "#edc948", "#b07aa1", "#9c755f",
  };
  return palette;
}

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;

std::string svg_open(const std::string& title) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\" font-family=\"sans-serif\">\n";
  svg << "  <title>" << title << "</title>\n";
  svg << "  <text x=\"" << kWidth / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
  return svg.str();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string render_pie(const Report& report,
                       const std::vector<std::pair<std::string, double>>& rows) {
  std::vector<double> values;
  for (const auto& [_, v] : rows) values.push_back(v);
  const std::vector<double> angles = pie_angles(values);

  const double cx = 190, cy = 220, r = 150;
  std::ostringstream svg;
  svg << svg_open(report.title);

  double start = -90.0;  // twelve o'clock, clockwise
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& color = chart_palette()[i % chart_palette().size()];
    if (angles[i] <= 0) continue;
    if (angles[i] >= 360.0 - 1e-9) {
      svg << "  <circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\""
          << fmt(r) << "\" fill=\"" << color << "\" data-label=\"" << rows[i].first
          << "\" data-angle=\"" << fmt(angles[i]) << "\"/>\n";
      continue;
    }
    const double end = start + angles[i];
    const double a0 = start * std::numbers::pi / 180.0;
    const double a1 = end * std::numbers::pi / 180.0;
    const double x0 = cx + r * std::cos(a0), y0 = cy + r * std::sin(a0);
    const double x1 = cx + r * std::cos(a1), y1 = cy + r * std::sin(a1);
    const int large_arc = angles[i] > 180.0 ? 1 : 0;
    svg << "  <path d=\"M " << fmt(cx) << " " << fmt(cy) << " L " << fmt(x0) << " "
        << fmt(y0) << " A " << fmt(r) << " " << fmt(r) << " 0 " << large_arc
        << " 1 " << fmt(x1) << " " << fmt(y1) << " Z\" fill=\"" << color
        << "\" data-label=\"" << rows[i].first << "\" data-angle=\""
        << fmt(angles[i]) << "\"/>\n";
    start = end;
  }

  // legend
  double total = 0;
  for (double v : values) total += v;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = 80 + double(i) * 24;
    svg << "  <rect x=\"390\" y=\"" << fmt(y - 12) << "\" width=\"14\" height=\"14\" fill=\""
        << chart_palette()[i % chart_palette().size()] << "\"/>\n";
    svg << "  <text x=\"412\" y=\"" << fmt(y) << "\" font-size=\"13\">" << rows[i].first
        << " (" << format_percent(round_half_up(100.0 * rows[i].second / total, 3))
        << "%)</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_bar(const Report& report,
                       const std::vector<std::pair<std::string, double>>& rows) {
  double max_value = 0;
  for (const auto& [_, v] : rows) max_value = std::max(max_value, v);
  if (!(max_value > 0)) throw DomainError("bar chart requires a positive value");

  const double plot_left = 60, plot_right = kWidth - 30;
  const double plot_top = 50, plot_bottom = kHeight - 60;
  const double plot_h = plot_bottom - plot_top;
  const double slot = (plot_right - plot_left) / double(rows.size());
  const double bar_w = slot * 0.6;

  std::ostringstream svg;
  svg << svg_open(report.title);
  svg << "  <line x1=\"" << fmt(plot_left) << "\" y1=\"" << fmt(plot_bottom)
      << "\" x2=\"" << fmt(plot_right) << "\" y2=\"" << fmt(plot_bottom)
      << "\" stroke=\"#333\"/>\n";
  svg << "  <line x1=\"" << fmt(plot_left) << "\" y1=\"" << fmt(plot_top) << "\" x2=\""
      << fmt(plot_left) << "\" y2=\"" << fmt(plot_bottom) << "\" stroke=\"#333\"/>\n";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double h = plot_h * rows[i].second / max_value;
    const double x = plot_left + slot * double(i) + (slot - bar_w) / 2;
    const double y = plot_bottom - h;
    svg << "  <rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
        << fmt(bar_w) << "\" height=\"" << fmt(h) << "\" fill=\""
        << chart_palette()[i % chart_palette().size()] << "\" data-label=\""
        << rows[i].first << "\" data-value=\"" << fmt(rows[i].second) << "\"/>\n";
    svg << "  <text x=\"" << fmt(x + bar_w / 2) << "\" y=\"" << fmt(y - 6)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << format_value(rows[i].second)
        << "</text>\n";
    svg << "  <text x=\"" << fmt(x + bar_w / 2) << "\" y=\"" << fmt(plot_bottom + 18)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << rows[i].first
        << "</text>\n";
  }
  svg << "  <text x=\"20\" y=\"" << fmt(plot_top - 10) << "\" font-size=\"12\">"
      << report.unit << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string render_chart_svg(const Report& report, ChartKind kind) {
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& row : report.rows) {
    if (row.value) rows.emplace_back(row.label, *row.value);
  }
  if (rows.empty()) throw DomainError("chart requires at least one defined value");
  return kind == ChartKind::kPie ? render_pie(report, rows) : render_bar(report, rows);
}

}  // namespace otp
