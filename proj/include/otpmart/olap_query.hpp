#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otpmart/mart_schema.hpp"

namespace otp {

// Dimensional slice/rollup over the mart. Queries are structured values
// (plus the flat textual form used by the CLI); no MDX.

enum class Agg { kSum, kCount, kMean };
std::string_view to_string(Agg agg);

enum class TimeLevel { kDay, kMonth, kYear };
std::string_view to_string(TimeLevel level);
TimeLevel time_level_from_string(const std::string& s);  // throws ParseError

struct Measure {
  std::string field;
  Agg agg = Agg::kSum;

  std::string display() const;  // e.g. "mean(orderDurationDays)"

  bool operator==(const Measure&) const = default;
};

struct Query {
  std::string fact_table;
  std::vector<Measure> measures;
  // Dimension attributes (partyRoleName, geographicArea, serviceComponent,
  // cfsStatus, originatingSystem, reason) and/or one time axis token
  // ("day" | "month" | "year").
  std::vector<std::string> row_axis;
  std::vector<std::pair<std::string, std::string>> filters;
  TimeLevel time_level = TimeLevel::kMonth;

  // "fact=...;measure=agg(field);by=a,b;filter=k=v;level=month"
  // measure= and filter= may repeat.
  static Query parse(const std::string& text);
};

struct ResultGrid {
  std::vector<std::string> axis_names;
  std::vector<std::string> measure_names;

  struct Row {
    std::vector<std::string> axis;
    std::vector<double> values;

    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows;  // lexicographic by axis tuple

  std::string to_csv() const;

  bool operator==(const ResultGrid&) const = default;
};

// Group-by over the fact joined to its dimensions. Time rollup uses the
// fact's period-anchor time key; rows without a date (key 0) are excluded
// whenever a time axis is present. A row whose mean measure has no support
// is omitted, so grids never carry an undefined cell.
ResultGrid run_query(const MartSnapshot& mart, const Query& query);

// Re-evaluates the query at a finer time level (the `from` axis token is
// replaced by `to`). Coarser sums equal sums over the finer rows.
ResultGrid drill(const ResultGrid& grid, TimeLevel from, TimeLevel to,
                 const MartSnapshot& mart, const Query& query);

}  // namespace otp
