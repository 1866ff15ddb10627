#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otpmart/mart_schema.hpp"
#include "otpmart/source_model.hpp"
#include "otpmart/timestamp.hpp"

#include <json.hpp>

namespace otp {

// Half-open calendar interval: a timestamp belongs to the period iff
// start <= its UTC date < end. Time key 0 ("no date") never belongs.
struct ReportingPeriod {
  int start_key = 0;  // YYYYMMDD inclusive
  int end_key = 0;    // YYYYMMDD exclusive
  std::string label;

  bool contains_key(int time_key) const {
    return time_key != 0 && time_key >= start_key && time_key < end_key;
  }
  bool contains(Timestamp t) const { return contains_key(t.time_key()); }

  static ReportingPeriod month(int year, int month);
  static ReportingPeriod year(int year);
  static ReportingPeriod custom(int start_key, int end_key, std::string label = {});

  // "YYYY" | "YYYY-MM" | "YYYY-MM-DD..YYYY-MM-DD" (end exclusive).
  static ReportingPeriod parse(const std::string& text);

  bool operator==(const ReportingPeriod&) const = default;
};

enum class Unit { kDays, kPercent };
std::string_view to_string(Unit unit);

struct MetricDef {
  std::string id;    // "F-CE-2a" ... "F-OE-3d"
  std::string name;
  Unit unit = Unit::kDays;
  std::string fact_table;
  std::string period_anchor;  // time key governing period membership
  std::vector<std::string> allowed_filters;
  std::string numerator_rule;
  std::string denominator_rule;
  std::vector<std::string> etom_level3_processes;
  std::vector<std::string> sid_entities;
};

// The 11 metric definitions in fixed order F-CE-2a .. F-OE-3d. Traceability
// lists come from the bundled metadata file, validated on first use.
const std::vector<MetricDef>& list_metrics();

const MetricDef& metric_def(const std::string& metric_id);  // throws DomainError

using Filters = std::vector<std::pair<std::string, std::string>>;

struct MetricValue {
  std::string metric_id;
  int block_id = 0;  // 1-5 for F-OE-2b, otherwise 0
  Unit unit = Unit::kDays;
  double numerator = 0;    // day metrics: sum of days; percent metrics: count
  double denominator = 0;  // count
  std::optional<double> value;  // nullopt = UNDEFINED (iff denominator == 0)
  std::string period_label;
  Filters filters;
  std::string group;  // set by evaluate_grouped

  // UNDEFINED serializes as the literal string "undefined".
  nlohmann::json to_json() const;
};

// Evaluates one metric over the mart; one element normally, five (block
// 1..5) for F-OE-2b. Throws DomainError for an unknown metric or a filter
// outside the metric's allowed set.
std::vector<MetricValue> evaluate(const MartSnapshot& mart, const std::string& metric_id,
                                  const ReportingPeriod& period, const Filters& filters = {});

// One entry per distinct attribute value with a nonzero denominator. Fact
// rows whose grouping dimension is the reserved 0 member group under
// "(unknown)" so group totals add up to the ungrouped totals.
std::map<std::string, std::vector<MetricValue>> evaluate_grouped(
    const MartSnapshot& mart, const std::string& metric_id,
    const ReportingPeriod& period, const std::string& group_by,
    const Filters& filters = {});

// Independent brute-force evaluation over the raw source rows, bypassing
// the mart entirely. Same contract as evaluate().
std::vector<MetricValue> oracle_evaluate(const SourceDataset& source,
                                         const std::string& metric_id,
                                         const ReportingPeriod& period,
                                         const Filters& filters = {});

struct Traceability {
  std::vector<std::string> etom_level3_processes;
  std::vector<std::string> sid_entities;
};

Traceability traceability(const std::string& metric_id);

}  // namespace otp
