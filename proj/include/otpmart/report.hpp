#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace otp {

// Static report emitters: grouped KPI table with percent-of-total, plus
// pie/bar charts as self-contained SVG text. All functions are pure.

struct ReportRow {
  std::string label;
  std::optional<double> value;             // nullopt renders as "undefined"
  std::optional<double> percent_of_total;  // absent for undefined rows

  bool operator==(const ReportRow&) const = default;
};

struct Report {
  std::string title;
  std::string unit;  // "days" | "percent"
  std::string period_label;
  std::string metric_id;
  std::vector<ReportRow> rows;
};

// Half-up rounding at `decimals` places; inputs are non-negative here.
double round_half_up(double value, int decimals);

// percent(label) = 100 * value / sum, rounded half-up to 3 decimals.
// Requires non-negative values with at least one positive; throws
// DomainError otherwise. Input order is preserved.
std::vector<ReportRow> percent_of_total(
    const std::vector<std::pair<std::string, double>>& values);

// Columns label,value,percentOfTotal; undefined rows carry "undefined" and
// an empty percent cell.
std::string render_table_csv(const Report& report);

// Parse -> re-serialize is the identity on this output.
std::string render_table_json(const Report& report);

enum class ChartKind { kPie, kBar };
ChartKind chart_kind_from_string(const std::string& s);  // throws DomainError

// Full-precision slice angles in degrees, proportional to the values and
// summing to 360. The pie renderer draws exactly these.
std::vector<double> pie_angles(const std::vector<double>& values);

// Self-contained SVG. Pie slices are proportional to the defined rows'
// values; bar heights are proportional to values. Undefined rows are
// excluded; all-zero (or all-undefined) input throws DomainError.
std::string render_chart_svg(const Report& report, ChartKind kind);

// The fixed chart palette, cycled in row order.
const std::vector<std::string>& chart_palette();

}  // namespace otp
