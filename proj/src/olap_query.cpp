#include "otpmart/olap_query.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include "otpmart/csv.hpp"
#include "otpmart/errors.hpp"

namespace otp {

std::string_view to_string(Agg agg) {
  switch (agg) {
    case Agg::kSum: return "sum";
    case Agg::kCount: return "count";
    case Agg::kMean: return "mean";
  }
  return "sum";
}

std::string_view to_string(TimeLevel level) {
  switch (level) {
    case TimeLevel::kDay: return "day";
    case TimeLevel::kMonth: return "month";
    case TimeLevel::kYear: return "year";
  }
  return "month";
}

TimeLevel time_level_from_string(const std::string& s) {
  if (s == "day") return TimeLevel::kDay;
  if (s == "month") return TimeLevel::kMonth;
  if (s == "year") return TimeLevel::kYear;
  throw ParseError("unknown time level '" + s + "'");
}

std::string Measure::display() const {
  return std::string(to_string(agg)) + "(" + field + ")";
}

namespace {

Agg agg_from_string(const std::string& s) {
  if (s == "sum") return Agg::kSum;
  if (s == "count") return Agg::kCount;
  if (s == "mean") return Agg::kMean;
  throw ParseError("unknown aggregator '" + s + "'");
}

bool is_time_axis(const std::string& name) {
  return name == "day" || name == "month" || name == "year";
}

// In-memory columnar view of one fact table for generic queries.
struct FrameRow {
  int customer_key = 0;
  int place_key = 0;
  int service_key = 0;
  int sp_key = 0;
  int time_key = 0;  // the fact's period-anchor key
  std::vector<std::optional<double>> measures;
};

struct Frame {
  std::vector<std::string> measure_names;
  bool has_customer = false, has_place = false, has_service = false, has_problem = false;
  std::vector<FrameRow> rows;

  int measure_index(const std::string& field) const {
    for (std::size_t i = 0; i < measure_names.size(); ++i) {
      if (measure_names[i] == field) return int(i);
    }
    throw DomainError("unknown measure field '" + field + "'");
  }
};

std::optional<double> opt_days(std::optional<std::int64_t> secs) {
  if (!secs) return std::nullopt;
  return seconds_to_days(*secs);
}

std::optional<double> opt_flag(std::optional<int> f) {
  if (!f) return std::nullopt;
  return double(*f);
}

Frame build_frame(const MartSnapshot& m, const std::string& fact_table) {
  Frame fr;
  if (fact_table == "fact_fce2abc") {
    fr.measure_names = {"orderDurationDays", "orderDelayDays", "onTimeFlag",
                        "completedFlag", "deliveredFlag"};
    fr.has_customer = true;
    for (const auto& f : m.fact_order_fulfillment) {
      fr.rows.push_back({f.customer_key, 0, 0, 0, f.completion_time_key,
                         {opt_days(f.order_duration_secs), opt_days(f.order_delay_secs),
                          opt_flag(f.on_time_flag), double(f.completed_flag),
                          double(f.delivered_flag)}});
    }
  } else if (fact_table == "fact_fce3") {
    fr.measure_names = {"count"};
    fr.has_customer = fr.has_service = true;
    for (const auto& f : m.fact_usability_queries) {
      fr.rows.push_back(
          {f.customer_key, 0, f.service_key, 0, f.time_key, {double(f.count)}});
    }
  } else if (fact_table == "fact_fce4") {
    fr.measure_names = {"failedFlag", "deliveredFlag"};
    fr.has_customer = fr.has_service = fr.has_problem = true;
    for (const auto& f : m.fact_activation_failures) {
      fr.rows.push_back({f.customer_key, 0, f.service_key, f.sp_key, f.time_key,
                         {double(f.failed_flag), double(f.delivered_flag)}});
    }
  } else if (fact_table == "fact_fce4b") {
    fr.measure_names = {"earlyFaultFlag"};
    fr.has_customer = fr.has_service = true;
    for (const auto& f : m.fact_early_life_faults) {
      fr.rows.push_back({f.customer_key, 0, f.service_key, 0, f.completion_time_key,
                         {double(f.early_fault_flag)}});
    }
  } else if (fact_table == "fact_foe2a") {
    fr.measure_names = {"mp1Days", "mp2Days", "mp3Days", "mp4Days", "mp5Days",
                        "totalDays"};
    fr.has_customer = fr.has_place = true;
    for (const auto& f : m.fact_order_to_activation) {
      std::vector<std::optional<double>> mv;
      for (auto s : f.mp_secs) mv.push_back(seconds_to_days(s));
      mv.push_back(seconds_to_days(f.total_secs));
      fr.rows.push_back(
          {f.customer_key, f.place_key, 0, 0, f.completion_time_key, std::move(mv)});
    }
  } else if (fact_table == "fact_foe2b") {
    fr.measure_names = {"durationDays"};
    fr.has_customer = true;
    for (const auto& f : m.fact_activation_by_process) {
      fr.rows.push_back({f.customer_key, 0, 0, 0, f.completion_time_key,
                         {seconds_to_days(f.duration_secs)}});
    }
  } else if (fact_table == "fact_foe3a") {
    fr.measure_names = {"reworkFlag"};
    fr.has_service = fr.has_problem = true;
    for (const auto& f : m.fact_rework) {
      fr.rows.push_back({0, 0, f.service_key, f.sp_key, f.completion_time_key,
                         {double(f.rework_flag)}});
    }
  } else if (fact_table == "fact_foe3b") {
    fr.measure_names = {"resolutionDays"};
    fr.has_customer = fr.has_service = fr.has_problem = true;
    for (const auto& f : m.fact_rework_handling) {
      fr.rows.push_back({f.customer_key, 0, f.service_key, f.sp_key,
                         f.restored_time_key, {opt_days(f.resolution_secs)}});
    }
  } else if (fact_table == "fact_foe3d") {
    fr.measure_names = {"pendingFlag"};
    fr.has_customer = fr.has_service = true;
    for (const auto& f : m.fact_pending_error_fix) {
      fr.rows.push_back({f.customer_key, 0, f.service_key, 0, f.raised_time_key,
                         {double(f.pending_flag)}});
    }
  } else {
    throw DomainError("unknown fact table '" + fact_table + "'");
  }
  return fr;
}

struct AttrResolver {
  std::unordered_map<int, std::string> party_role, area, component, status, system,
      reason;

  static AttrResolver build(const MartSnapshot& m) {
    AttrResolver r;
    for (const auto& d : m.dim_customer) r.party_role[d.customer_key] = d.party_role_name;
    for (const auto& d : m.dim_place) r.area[d.place_key] = d.geographic_area;
    for (const auto& d : m.dim_service) {
      r.component[d.service_key] = d.service_component;
      r.status[d.service_key] = std::to_string(d.cfs_status);
    }
    for (const auto& d : m.dim_service_problem) {
      r.system[d.sp_key] = d.originating_system;
      r.reason[d.sp_key] = d.reason;
    }
    return r;
  }
};

// Returns the axis/filter label of `row` for a dimension attribute; key 0
// labels as "(unknown)".
std::string attr_label(const AttrResolver& res, const Frame& fr, const FrameRow& row,
                       const std::string& attr) {
  const auto lookup = [&](const std::unordered_map<int, std::string>& map, int key,
                          bool available) -> std::string {
    if (!available) throw DomainError("attribute '" + attr + "' not reachable from this fact");
    if (key == 0) return "(unknown)";
    auto it = map.find(key);
    return it == map.end() ? "(unknown)" : it->second;
  };
  if (attr == "partyRoleName") return lookup(res.party_role, row.customer_key, fr.has_customer);
  if (attr == "geographicArea") return lookup(res.area, row.place_key, fr.has_place);
  if (attr == "serviceComponent") return lookup(res.component, row.service_key, fr.has_service);
  if (attr == "cfsStatus") return lookup(res.status, row.service_key, fr.has_service);
  if (attr == "originatingSystem") return lookup(res.system, row.sp_key, fr.has_problem);
  if (attr == "reason") return lookup(res.reason, row.sp_key, fr.has_problem);
  throw DomainError("unknown dimension attribute '" + attr + "'");
}

std::string time_label(int time_key, const std::string& level) {
  char buf[16];
  const CivilDate d = civil_from_time_key(time_key);
  if (level == "day") {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  } else if (level == "month") {
    std::snprintf(buf, sizeof buf, "%04d-%02d", d.year, d.month);
  } else {
    std::snprintf(buf, sizeof buf, "%04d", d.year);
  }
  return buf;
}

std::string format_measure(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

struct MeasureAcc {
  double sum = 0;
  std::size_t count = 0;
};

}  // namespace

Query Query::parse(const std::string& text) {
  Query q;
  bool level_seen = false;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw ParseError("query segment '" + part + "' is not key=value");
    }
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "fact") {
      q.fact_table = value;
    } else if (key == "measure") {
      const auto open = value.find('(');
      if (open == std::string::npos || value.back() != ')') {
        throw ParseError("measure must be agg(field), got '" + value + "'");
      }
      q.measures.push_back({value.substr(open + 1, value.size() - open - 2),
                            agg_from_string(value.substr(0, open))});
    } else if (key == "by") {
      std::stringstream axes(value);
      std::string axis;
      while (std::getline(axes, axis, ',')) {
        if (!axis.empty()) q.row_axis.push_back(axis);
      }
    } else if (key == "filter") {
      const auto feq = value.find('=');
      if (feq == std::string::npos) {
        throw ParseError("filter must be attr=value, got '" + value + "'");
      }
      q.filters.emplace_back(value.substr(0, feq), value.substr(feq + 1));
    } else if (key == "level") {
      q.time_level = time_level_from_string(value);
      level_seen = true;
    } else {
      throw ParseError("unknown query key '" + key + "'");
    }
  }
  if (q.fact_table.empty()) throw ParseError("query needs fact=<table>");
  if (q.measures.empty()) throw ParseError("query needs at least one measure");
  if (!level_seen) {
    for (const auto& axis : q.row_axis) {
      if (is_time_axis(axis)) {
        q.time_level = time_level_from_string(axis);
        break;
      }
    }
  }
  return q;
}

ResultGrid run_query(const MartSnapshot& mart, const Query& query) {
  if (query.measures.empty()) throw DomainError("query needs at least one measure");
  const Frame frame = build_frame(mart, query.fact_table);
  const AttrResolver resolver = AttrResolver::build(mart);

  std::vector<int> measure_idx;
  for (const auto& mea : query.measures) {
    measure_idx.push_back(frame.measure_index(mea.field));
  }

  const bool has_time_axis = std::any_of(query.row_axis.begin(), query.row_axis.end(),
                                         [](const std::string& a) { return is_time_axis(a); });

  std::map<std::vector<std::string>, std::vector<MeasureAcc>> groups;
  for (const auto& row : frame.rows) {
    if (has_time_axis && row.time_key == 0) continue;  // no date to roll up on
    bool pass = true;
    for (const auto& [attr, value] : query.filters) {
      if (attr_label(resolver, frame, row, attr) != value) {
        pass = false;
        break;
      }
    }
    if (!pass) continue;

    std::vector<std::string> tuple;
    tuple.reserve(query.row_axis.size());
    for (const auto& axis : query.row_axis) {
      tuple.push_back(is_time_axis(axis) ? time_label(row.time_key, axis)
                                         : attr_label(resolver, frame, row, axis));
    }
    auto& accs = groups.try_emplace(std::move(tuple),
                                    std::vector<MeasureAcc>(query.measures.size()))
                     .first->second;
    for (std::size_t i = 0; i < measure_idx.size(); ++i) {
      const auto& v = row.measures[std::size_t(measure_idx[i])];
      if (v) {
        accs[i].sum += *v;
        accs[i].count += 1;
      }
    }
  }

  ResultGrid grid;
  grid.axis_names = query.row_axis;
  for (const auto& mea : query.measures) grid.measure_names.push_back(mea.display());
  for (const auto& [tuple, accs] : groups) {
    ResultGrid::Row row;
    row.axis = tuple;
    bool keep = true;
    for (std::size_t i = 0; i < accs.size(); ++i) {
      switch (query.measures[i].agg) {
        case Agg::kSum:
          row.values.push_back(accs[i].sum);
          break;
        case Agg::kCount:
          row.values.push_back(double(accs[i].count));
          break;
        case Agg::kMean:
          if (accs[i].count == 0) {
            keep = false;  // no support: drop the row rather than emit a hole
          } else {
            row.values.push_back(accs[i].sum / double(accs[i].count));
          }
          break;
      }
      if (!keep) break;
    }
    if (keep) grid.rows.push_back(std::move(row));
  }
  return grid;
}

std::string ResultGrid::to_csv() const {
  std::string out;
  CsvRow header = axis_names;
  header.insert(header.end(), measure_names.begin(), measure_names.end());
  out += csv_format_row(header);
  out += '\n';
  for (const auto& row : rows) {
    CsvRow r = row.axis;
    for (double v : row.values) r.push_back(format_measure(v));
    out += csv_format_row(r);
    out += '\n';
  }
  return out;
}

ResultGrid drill(const ResultGrid& grid, TimeLevel from, TimeLevel to,
                 const MartSnapshot& mart, const Query& query) {
  (void)grid;
  const auto rank = [](TimeLevel l) {
    switch (l) {
      case TimeLevel::kDay: return 0;
      case TimeLevel::kMonth: return 1;
      case TimeLevel::kYear: return 2;
    }
    return 1;
  };
  if (rank(to) >= rank(from)) {
    throw DomainError("drill target level must be finer than the current level");
  }
  Query finer = query;
  bool replaced = false;
  for (auto& axis : finer.row_axis) {
    if (axis == to_string(from)) {
      axis = std::string(to_string(to));
      replaced = true;
    }
  }
  if (!replaced) {
    throw DomainError("query has no '" + std::string(to_string(from)) +
                      "' axis to drill from");
  }
  finer.time_level = to;
  return run_query(mart, finer);
}

}  // namespace otp
