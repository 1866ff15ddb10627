#include "otpmart/kpi_engine.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "otpmart/errors.hpp"
#include "otpmart/traceability_data.hpp"

namespace otp {

// --- reporting periods ------------------------------------------------------

ReportingPeriod ReportingPeriod::month(int year, int month) {
  char label[8];
  std::snprintf(label, sizeof label, "%04d-%02d", year, month);
  return {time_key_from_civil(year, month, 1), next_month_key(year, month), label};
}

ReportingPeriod ReportingPeriod::year(int year) {
  return {time_key_from_civil(year, 1, 1), time_key_from_civil(year + 1, 1, 1),
          std::to_string(year)};
}

ReportingPeriod ReportingPeriod::custom(int start_key, int end_key, std::string label) {
  if (start_key >= end_key) throw ParseError("period start must precede end");
  if (label.empty()) {
    label = std::to_string(start_key) + ".." + std::to_string(end_key);
  }
  return {start_key, end_key, std::move(label)};
}

namespace {

bool digits_only(std::string_view s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
}

int parse_date_key(std::string_view s) {  // "YYYY-MM-DD"
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !digits_only(s.substr(0, 4)) ||
      !digits_only(s.substr(5, 2)) || !digits_only(s.substr(8, 2))) {
    throw ParseError("malformed date '" + std::string(s) + "'");
  }
  const int y = std::stoi(std::string(s.substr(0, 4)));
  const int m = std::stoi(std::string(s.substr(5, 2)));
  const int d = std::stoi(std::string(s.substr(8, 2)));
  if (!civil_ok(y, m, d)) throw ParseError("invalid date '" + std::string(s) + "'");
  return time_key_from_civil(y, m, d);
}

}  // namespace

ReportingPeriod ReportingPeriod::parse(const std::string& text) {
  if (digits_only(text) && text.size() == 4) {
    return year(std::stoi(text));
  }
  if (text.size() == 7 && text[4] == '-' && digits_only(text.substr(0, 4)) &&
      digits_only(text.substr(5, 2))) {
    const int y = std::stoi(text.substr(0, 4));
    const int m = std::stoi(text.substr(5, 2));
    if (m < 1 || m > 12) throw ParseError("invalid month in period '" + text + "'");
    return month(y, m);
  }
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int start = parse_date_key(std::string_view(text).substr(0, dots));
    const int end = parse_date_key(std::string_view(text).substr(dots + 2));
    auto p = custom(start, end);
    p.label = text;
    return p;
  }
  throw ParseError("malformed period '" + text +
                   "' (expected YYYY, YYYY-MM or YYYY-MM-DD..YYYY-MM-DD)");
}

std::string_view to_string(Unit unit) {
  return unit == Unit::kDays ? "days" : "percent";
}

// --- metric registry --------------------------------------------------------

namespace {

struct TraceLists {
  std::vector<std::string> processes;
  std::vector<std::string> entities;
};

std::unordered_map<std::string, TraceLists> load_traceability() {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::kTraceabilityJson);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bundled traceability metadata is invalid: ") +
                      e.what());
  }
  if (!doc.contains("metrics") || !doc["metrics"].is_object()) {
    throw ConfigError("traceability metadata must carry a 'metrics' object");
  }
  std::unordered_map<std::string, TraceLists> out;
  for (const auto& [id, entry] : doc["metrics"].items()) {
    TraceLists lists;
    for (const auto& p : entry.at("etomLevel3Processes")) {
      lists.processes.push_back(p.get<std::string>());
    }
    for (const auto& s : entry.at("sidEntities")) {
      lists.entities.push_back(s.get<std::string>());
    }
    if (lists.processes.empty() || lists.entities.empty()) {
      throw ConfigError("traceability metadata for " + id + " has an empty list");
    }
    out.emplace(id, std::move(lists));
  }
  return out;
}

std::vector<MetricDef> build_registry() {
  std::vector<MetricDef> defs = {
      {"F-CE-2a", "Mean duration to fulfill customer order", Unit::kDays,
       "fact_fce2abc", "completionTimeKey", {"partyRoleName"},
       "sum of interactionDateComplete - interactionDate over orders completed in the period",
       "count of orders with interactionDateComplete in the period",
       {}, {}},
      {"F-CE-2b",
       "Mean time difference between customer requested delivery date and planned date",
       Unit::kDays, "fact_fce2abc", "dueTimeKey", {"partyRoleName"},
       "sum of dueDate - customerRequiredDate, where positive, over orders due in the period",
       "count of orders with dueDate in the period",
       {}, {}},
      {"F-CE-2c", "% orders delivered by committed date", Unit::kPercent,
       "fact_fce2abc", "deliveryTimeKey", {"partyRoleName"},
       "count of orders delivered in the period with deliveryDate <= dueDate",
       "count of orders with deliveryDate in the period",
       {}, {}},
      {"F-CE-3", "% service usability queries", Unit::kPercent, "fact_fce3",
       "timeKey", {"serviceComponent", "partyRoleName"},
       "count of usability inquiries in the period",
       "count of activated services (cfsStatus=0) with activation date in the period",
       {}, {}},
      {"F-CE-4", "% service activation failures", Unit::kPercent, "fact_fce4",
       "timeKey", {"partyRoleName", "serviceComponent"},
       "count of failed services (cfsStatus=6) whose customer-reported "
       "delivery/activation-failure problem was raised in the period",
       "count of activated services (cfsStatus=0) with activation date in the period",
       {}, {}},
      {"F-CE-4b", "% of service faulty within 28 days of provisioning", Unit::kPercent,
       "fact_fce4b", "completionTimeKey", {"partyRoleName", "serviceComponent"},
       "count of orders completed in the period with a problem raised within 28 days "
       "of delivery",
       "count of orders with interactionDateComplete in the period",
       {}, {}},
      {"F-OE-2a", "Mean time order to activation", Unit::kDays, "fact_foe2a",
       "completionTimeKey", {"geographicArea"},
       "sum of customer-order completion - start over complete chains in the period",
       "count of complete chains with completion in the period",
       {}, {}},
      {"F-OE-2b", "Order to activation time by major process", Unit::kDays,
       "fact_foe2b", "completionTimeKey", {"partyRoleName"},
       "per block, sum of the block's duration over complete chains in the period",
       "count of complete chains with completion in the period",
       {}, {}},
      {"F-OE-3a", "% orders requiring rework by cause type", Unit::kPercent,
       "fact_foe3a", "completionTimeKey", {"originatingSystem", "serviceComponent"},
       "count of service orders with reworkNo > 0 completed in the period",
       "count of service orders with interactionDateComplete in the period",
       {}, {}},
      {"F-OE-3b",
       "Mean time to handle defects or rework from order to customer acceptance",
       Unit::kDays, "fact_foe3b", "restoredTimeKey",
       {"serviceComponent", "originatingSystem", "partyRoleName"},
       "sum of serviceRestoredDate - troubleDetectionDate over service-order tickets "
       "restored in the period",
       "count of service-order tickets restored in the period",
       {}, {}},
      {"F-OE-3d", "% orders pending error fix", Unit::kPercent, "fact_foe3d",
       "raisedTimeKey", {"partyRoleName", "serviceComponent"},
       "count of customer-order tickets in Pending state raised in the period",
       "count of customer-order tickets raised in the period",
       {}, {}},
  };

  auto trace = load_traceability();
  if (trace.size() != defs.size()) {
    throw ConfigError("traceability metadata must cover exactly " +
                      std::to_string(defs.size()) + " metrics, found " +
                      std::to_string(trace.size()));
  }
  for (auto& def : defs) {
    auto it = trace.find(def.id);
    if (it == trace.end()) {
      throw ConfigError("traceability metadata missing metric " + def.id);
    }
    def.etom_level3_processes = std::move(it->second.processes);
    def.sid_entities = std::move(it->second.entities);
  }
  return defs;
}

}  // namespace

const std::vector<MetricDef>& list_metrics() {
  static const std::vector<MetricDef> registry = build_registry();
  return registry;
}

const MetricDef& metric_def(const std::string& metric_id) {
  for (const auto& def : list_metrics()) {
    if (def.id == metric_id) return def;
  }
  throw DomainError("unknown metric '" + metric_id + "'");
}

Traceability traceability(const std::string& metric_id) {
  const auto& def = metric_def(metric_id);
  return {def.etom_level3_processes, def.sid_entities};
}

nlohmann::json MetricValue::to_json() const {
  nlohmann::json j;
  j["metric"] = metric_id;
  if (block_id != 0) j["block"] = block_id;
  if (!group.empty()) j["group"] = group;
  j["unit"] = std::string(to_string(unit));
  j["period"] = period_label;
  nlohmann::json f = nlohmann::json::object();
  for (const auto& [k, v] : filters) f[k] = v;
  j["filters"] = std::move(f);
  j["numerator"] = numerator;
  j["denominator"] = denominator;
  if (value) {
    j["value"] = *value;
  } else {
    j["value"] = "undefined";
  }
  return j;
}

// --- evaluation core --------------------------------------------------------

namespace {

constexpr std::string_view kUnknownGroup = "(unknown)";
constexpr std::int64_t kEarlyFaultWindowSecs = 28 * kSecondsPerDay;

enum class DimAttr { kPartyRoleName, kGeographicArea, kServiceComponent, kOriginatingSystem };

DimAttr attr_from_name(const std::string& name) {
  if (name == "partyRoleName") return DimAttr::kPartyRoleName;
  if (name == "geographicArea") return DimAttr::kGeographicArea;
  if (name == "serviceComponent") return DimAttr::kServiceComponent;
  if (name == "originatingSystem") return DimAttr::kOriginatingSystem;
  throw DomainError("unknown dimension attribute '" + name + "'");
}

struct RowKeys {
  int customer = 0;
  int place = 0;
  int service = 0;
  int problem = 0;
};

int key_for(const RowKeys& keys, DimAttr attr) {
  switch (attr) {
    case DimAttr::kPartyRoleName: return keys.customer;
    case DimAttr::kGeographicArea: return keys.place;
    case DimAttr::kServiceComponent: return keys.service;
    case DimAttr::kOriginatingSystem: return keys.problem;
  }
  return 0;
}

struct AttrMaps {
  std::unordered_map<int, std::string> party_role, area, component, system;

  static AttrMaps build(const MartSnapshot& mart) {
    AttrMaps maps;
    for (const auto& r : mart.dim_customer) maps.party_role[r.customer_key] = r.party_role_name;
    for (const auto& r : mart.dim_place) maps.area[r.place_key] = r.geographic_area;
    for (const auto& r : mart.dim_service) maps.component[r.service_key] = r.service_component;
    for (const auto& r : mart.dim_service_problem) maps.system[r.sp_key] = r.originating_system;
    return maps;
  }

  const std::unordered_map<int, std::string>& map_of(DimAttr attr) const {
    switch (attr) {
      case DimAttr::kPartyRoleName: return party_role;
      case DimAttr::kGeographicArea: return area;
      case DimAttr::kServiceComponent: return component;
      case DimAttr::kOriginatingSystem: return system;
    }
    return party_role;
  }
};

struct Acc {
  double den = 0;
  std::int64_t num_secs = 0;
  double num_cnt = 0;
};

// label -> block -> accumulator; ungrouped evaluation uses label "".
using AccMap = std::map<std::string, std::map<int, Acc>>;

int metric_index(const std::string& metric_id) {
  const auto& defs = list_metrics();
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (defs[i].id == metric_id) return int(i);
  }
  throw DomainError("unknown metric '" + metric_id + "'");
}

void check_filters(const MetricDef& def, const Filters& filters) {
  for (const auto& [attr, _] : filters) {
    if (std::find(def.allowed_filters.begin(), def.allowed_filters.end(), attr) ==
        def.allowed_filters.end()) {
      throw DomainError("filter '" + attr + "' is not allowed for " + def.id);
    }
  }
}

void scan_mart(const MartSnapshot& mart, int index, const ReportingPeriod& period,
               const AttrMaps& maps,
               const std::vector<std::pair<DimAttr, std::string>>& filters,
               std::optional<DimAttr> group_by, AccMap& out) {
  const auto add = [&](int anchor_key, RowKeys keys, int block, double den_add,
                       std::int64_t num_secs_add, double num_cnt_add) {
    if (!period.contains_key(anchor_key)) return;
    for (const auto& [attr, value] : filters) {
      const int key = key_for(keys, attr);
      if (key == 0) return;
      auto it = maps.map_of(attr).find(key);
      if (it == maps.map_of(attr).end() || it->second != value) return;
    }
    std::string label;
    if (group_by) {
      const int key = key_for(keys, *group_by);
      if (key == 0) {
        label = kUnknownGroup;
      } else {
        auto it = maps.map_of(*group_by).find(key);
        label = it == maps.map_of(*group_by).end() ? std::string(kUnknownGroup)
                                                   : it->second;
      }
    }
    Acc& acc = out[label][block];
    acc.den += den_add;
    acc.num_secs += num_secs_add;
    acc.num_cnt += num_cnt_add;
  };

  switch (index) {
    case 0:  // F-CE-2a
      for (const auto& f : mart.fact_order_fulfillment) {
        if (!f.completed_flag) continue;
        add(f.completion_time_key, {f.customer_key, 0, 0, 0}, 0, 1,
            f.order_duration_secs.value_or(0), 0);
      }
      break;
    case 1:  // F-CE-2b: negative delays count in the denominator only
      for (const auto& f : mart.fact_order_fulfillment) {
        const std::int64_t delay = f.order_delay_secs.value_or(0);
        add(f.due_time_key, {f.customer_key, 0, 0, 0}, 0, 1, delay > 0 ? delay : 0, 0);
      }
      break;
    case 2:  // F-CE-2c
      for (const auto& f : mart.fact_order_fulfillment) {
        if (!f.delivered_flag) continue;
        add(f.delivery_time_key, {f.customer_key, 0, 0, 0}, 0, 1, 0,
            f.on_time_flag.value_or(0) == 1 ? 1 : 0);
      }
      break;
    case 3:  // F-CE-3: inquiries feed the numerator, activations the denominator
      for (const auto& f : mart.fact_usability_queries) {
        const bool inquiry = f.event_type == "inquiry";
        add(f.time_key, {f.customer_key, 0, f.service_key, 0}, 0, inquiry ? 0 : f.count,
            0, inquiry ? f.count : 0);
      }
      break;
    case 4:  // F-CE-4
      for (const auto& f : mart.fact_activation_failures) {
        add(f.time_key, {f.customer_key, 0, f.service_key, f.sp_key}, 0,
            f.delivered_flag, 0, f.failed_flag);
      }
      break;
    case 5:  // F-CE-4b
      for (const auto& f : mart.fact_early_life_faults) {
        add(f.completion_time_key, {f.customer_key, 0, f.service_key, 0}, 0, 1, 0,
            f.early_fault_flag);
      }
      break;
    case 6:  // F-OE-2a
      for (const auto& f : mart.fact_order_to_activation) {
        add(f.completion_time_key, {f.customer_key, f.place_key, 0, 0}, 0, 1,
            f.total_secs, 0);
      }
      break;
    case 7:  // F-OE-2b
      for (const auto& f : mart.fact_activation_by_process) {
        add(f.completion_time_key, {f.customer_key, 0, 0, 0}, f.block_id, 1,
            f.duration_secs, 0);
      }
      break;
    case 8:  // F-OE-3a
      for (const auto& f : mart.fact_rework) {
        add(f.completion_time_key, {0, 0, f.service_key, f.sp_key}, 0, 1, 0,
            f.rework_flag);
      }
      break;
    case 9:  // F-OE-3b
      for (const auto& f : mart.fact_rework_handling) {
        add(f.restored_time_key, {f.customer_key, 0, f.service_key, f.sp_key}, 0, 1,
            f.resolution_secs.value_or(0), 0);
      }
      break;
    case 10:  // F-OE-3d
      for (const auto& f : mart.fact_pending_error_fix) {
        add(f.raised_time_key, {f.customer_key, 0, f.service_key, 0}, 0, 1, 0,
            f.pending_flag);
      }
      break;
    default:
      throw DomainError("metric index out of range");
  }
}

MetricValue make_value(const MetricDef& def, int block, const Acc& acc,
                       const ReportingPeriod& period, const Filters& filters,
                       const std::string& group) {
  MetricValue v;
  v.metric_id = def.id;
  v.block_id = block;
  v.unit = def.unit;
  v.period_label = period.label;
  v.filters = filters;
  v.group = group;
  v.denominator = acc.den;
  v.numerator = def.unit == Unit::kDays ? seconds_to_days(acc.num_secs) : acc.num_cnt;
  if (acc.den > 0) {
    v.value = def.unit == Unit::kDays ? v.numerator / v.denominator
                                      : 100.0 * v.numerator / v.denominator;
  }
  return v;
}

std::vector<MetricValue> values_from_blocks(const MetricDef& def,
                                            const std::map<int, Acc>& blocks,
                                            const ReportingPeriod& period,
                                            const Filters& filters,
                                            const std::string& group) {
  std::vector<MetricValue> out;
  if (def.id == "F-OE-2b") {
    for (int b = 1; b <= 5; ++b) {
      const auto it = blocks.find(b);
      out.push_back(make_value(def, b, it == blocks.end() ? Acc{} : it->second, period,
                               filters, group));
    }
  } else {
    const auto it = blocks.find(0);
    out.push_back(make_value(def, 0, it == blocks.end() ? Acc{} : it->second, period,
                             filters, group));
  }
  return out;
}

std::vector<std::pair<DimAttr, std::string>> resolve_filters(const MetricDef& def,
                                                             const Filters& filters) {
  check_filters(def, filters);
  std::vector<std::pair<DimAttr, std::string>> resolved;
  resolved.reserve(filters.size());
  for (const auto& [attr, value] : filters) {
    resolved.emplace_back(attr_from_name(attr), value);
  }
  return resolved;
}

}  // namespace

std::vector<MetricValue> evaluate(const MartSnapshot& mart, const std::string& metric_id,
                                  const ReportingPeriod& period, const Filters& filters) {
  const MetricDef& def = metric_def(metric_id);
  const auto resolved = resolve_filters(def, filters);
  const AttrMaps maps = AttrMaps::build(mart);
  AccMap acc;
  scan_mart(mart, metric_index(metric_id), period, maps, resolved, std::nullopt, acc);
  return values_from_blocks(def, acc[""], period, filters, "");
}

std::map<std::string, std::vector<MetricValue>> evaluate_grouped(
    const MartSnapshot& mart, const std::string& metric_id,
    const ReportingPeriod& period, const std::string& group_by, const Filters& filters) {
  const MetricDef& def = metric_def(metric_id);
  if (std::find(def.allowed_filters.begin(), def.allowed_filters.end(), group_by) ==
      def.allowed_filters.end()) {
    throw DomainError("group-by attribute '" + group_by + "' is not allowed for " +
                      def.id);
  }
  const auto resolved = resolve_filters(def, filters);
  const AttrMaps maps = AttrMaps::build(mart);
  AccMap acc;
  scan_mart(mart, metric_index(metric_id), period, maps, resolved,
            attr_from_name(group_by), acc);

  std::map<std::string, std::vector<MetricValue>> out;
  for (const auto& [label, blocks] : acc) {
    // A group appears when it contributed anything; groups holding only
    // numerator events (e.g. inquiries on the unknown service member) stay
    // visible as UNDEFINED so group sums match the ungrouped totals.
    double total_den = 0, total_num = 0;
    for (const auto& [_, a] : blocks) {
      total_den += a.den;
      total_num += a.num_cnt + double(a.num_secs != 0 ? 1 : 0);
    }
    if (total_den <= 0 && total_num <= 0) continue;
    out.emplace(label, values_from_blocks(def, blocks, period, filters, label));
  }
  return out;
}

// --- brute-force oracle over the raw source --------------------------------

namespace {

// Straightforward per-table scans following the metric formulas; shares no
// code with the ETL/mart path beyond the registry contracts.
struct OracleContext {
  const SourceDataset& ds;
  std::unordered_map<std::string, const Customer*> customer_by_id;
  std::unordered_map<std::string, const Place*> place_by_id;
  std::unordered_map<std::string, const CustomerOrder*> co_by_chain;
  std::unordered_map<std::string, const ServiceOrder*> so_by_chain;
  std::unordered_map<std::string, const ResourceOrder*> ro_by_chain;
  std::unordered_map<std::string, std::vector<const ServiceProblem*>> problems_by_chain;
  std::unordered_map<std::string, std::vector<const CustomerFacingService*>> cfs_by_chain;

  explicit OracleContext(const SourceDataset& dataset) : ds(dataset) {
    for (const auto& c : ds.customers) customer_by_id[c.customer_id] = &c;
    for (const auto& p : ds.places) place_by_id[p.place_id] = &p;
    for (const auto& o : ds.customer_orders) co_by_chain[o.chain_id] = &o;
    for (const auto& o : ds.service_orders) so_by_chain[o.chain_id] = &o;
    for (const auto& o : ds.resource_orders) ro_by_chain[o.chain_id] = &o;
    for (const auto& p : ds.service_problems) problems_by_chain[p.chain_id].push_back(&p);
    for (const auto& s : ds.services) cfs_by_chain[s.chain_id].push_back(&s);
    for (auto& [_, v] : problems_by_chain) {
      std::sort(v.begin(), v.end(), [](auto* a, auto* b) {
        return a->service_problem_id < b->service_problem_id;
      });
    }
    for (auto& [_, v] : cfs_by_chain) {
      std::sort(v.begin(), v.end(),
                [](auto* a, auto* b) { return a->cfs_id < b->cfs_id; });
    }
  }

  const CustomerOrder* co(const std::string& chain) const {
    auto it = co_by_chain.find(chain);
    return it == co_by_chain.end() ? nullptr : it->second;
  }
  const ServiceOrder* so(const std::string& chain) const {
    auto it = so_by_chain.find(chain);
    return it == so_by_chain.end() ? nullptr : it->second;
  }
  const ResourceOrder* ro(const std::string& chain) const {
    auto it = ro_by_chain.find(chain);
    return it == ro_by_chain.end() ? nullptr : it->second;
  }
  const CustomerFacingService* first_cfs(const std::string& chain) const {
    auto it = cfs_by_chain.find(chain);
    return it == cfs_by_chain.end() || it->second.empty() ? nullptr
                                                          : it->second.front();
  }
  const ServiceProblem* first_problem(const std::string& chain) const {
    auto it = problems_by_chain.find(chain);
    return it == problems_by_chain.end() || it->second.empty() ? nullptr
                                                               : it->second.front();
  }
  const ServiceProblem* qualifying_problem(const std::string& chain) const {
    auto it = problems_by_chain.find(chain);
    if (it == problems_by_chain.end()) return nullptr;
    for (const auto* p : it->second) {
      if (p->reason == kReasonActivationFailure &&
          p->first_alert == kFirstAlertCustomerReport) {
        return p;
      }
    }
    return nullptr;
  }

  // Filter predicates. An absent link never matches a filter.
  bool segment_is(const std::string& customer_id, const std::string& value) const {
    auto it = customer_by_id.find(customer_id);
    return it != customer_by_id.end() && it->second->party_role_name == value;
  }
  bool chain_segment_is(const std::string& chain, const std::string& value) const {
    const auto* order = co(chain);
    return order && segment_is(order->customer_ref, value);
  }
  bool area_is(const std::string& place_id, const std::string& value) const {
    auto it = place_by_id.find(place_id);
    return it != place_by_id.end() && it->second->geographic_area == value;
  }
  bool chain_component_is(const std::string& chain, const std::string& value) const {
    const auto* cfs = first_cfs(chain);
    return cfs && cfs->service_component == value;
  }
  bool chain_system_is(const std::string& chain, const std::string& value) const {
    const auto* p = first_problem(chain);
    return p && p->originating_system == value;
  }
};

// Filter set for the oracle: each entry tests one source-side predicate.
struct OracleFilters {
  std::optional<std::string> party_role, area, component, system;

  static OracleFilters from(const Filters& filters) {
    OracleFilters f;
    for (const auto& [attr, value] : filters) {
      if (attr == "partyRoleName") {
        f.party_role = value;
      } else if (attr == "geographicArea") {
        f.area = value;
      } else if (attr == "serviceComponent") {
        f.component = value;
      } else if (attr == "originatingSystem") {
        f.system = value;
      } else {
        throw DomainError("unknown dimension attribute '" + attr + "'");
      }
    }
    return f;
  }
};

Acc oracle_fce2a(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& o : ctx.ds.customer_orders) {
    if (!o.interaction_date_complete) continue;
    if (!period.contains(*o.interaction_date_complete)) continue;
    if (f.party_role && !ctx.segment_is(o.customer_ref, *f.party_role)) continue;
    acc.den += 1;
    acc.num_secs += *o.interaction_date_complete - o.interaction_date;
  }
  return acc;
}

Acc oracle_fce2b(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& o : ctx.ds.customer_orders) {
    if (!period.contains(o.due_date)) continue;
    if (f.party_role && !ctx.segment_is(o.customer_ref, *f.party_role)) continue;
    acc.den += 1;
    const std::int64_t delay = o.due_date - o.customer_required_date;
    if (delay > 0) acc.num_secs += delay;  // CCD later than CRD only
  }
  return acc;
}

Acc oracle_fce2c(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& o : ctx.ds.customer_orders) {
    if (!o.delivery_date) continue;
    if (!period.contains(*o.delivery_date)) continue;
    if (f.party_role && !ctx.segment_is(o.customer_ref, *f.party_role)) continue;
    acc.den += 1;
    if (*o.delivery_date <= o.due_date) acc.num_cnt += 1;
  }
  return acc;
}

Acc oracle_fce3(const OracleContext& ctx, const ReportingPeriod& period,
                const OracleFilters& f) {
  Acc acc;
  // Inquiries carry no service link, so a serviceComponent filter excludes
  // them all (the mart's inquiry rows sit on the unknown service member).
  if (!f.component) {
    for (const auto& q : ctx.ds.customer_inquiries) {
      if (q.inquiry_type != kInquiryTypeUsability) continue;
      if (!period.contains(q.interaction_date)) continue;
      if (f.party_role && !ctx.segment_is(q.customer_ref, *f.party_role)) continue;
      acc.num_cnt += 1;
    }
  }
  for (const auto& s : ctx.ds.services) {
    if (s.cfs_status != kCfsStatusDelivered) continue;
    const auto* so = ctx.so(s.chain_id);
    if (!so || !so->interaction_date_complete) continue;
    if (!period.contains(*so->interaction_date_complete)) continue;
    if (f.component && s.service_component != *f.component) continue;
    if (f.party_role && !ctx.chain_segment_is(s.chain_id, *f.party_role)) continue;
    acc.den += 1;
  }
  return acc;
}

Acc oracle_fce4(const OracleContext& ctx, const ReportingPeriod& period,
                const OracleFilters& f) {
  Acc acc;
  for (const auto& s : ctx.ds.services) {
    if (f.component && s.service_component != *f.component) continue;
    if (f.party_role && !ctx.chain_segment_is(s.chain_id, *f.party_role)) continue;
    if (s.cfs_status == kCfsStatusFailed) {
      const auto* qualifying = ctx.qualifying_problem(s.chain_id);
      if (qualifying && period.contains(qualifying->time_raised)) acc.num_cnt += 1;
    } else if (s.cfs_status == kCfsStatusDelivered) {
      const auto* so = ctx.so(s.chain_id);
      if (so && so->interaction_date_complete &&
          period.contains(*so->interaction_date_complete)) {
        acc.den += 1;
      }
    }
  }
  return acc;
}

Acc oracle_fce4b(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& o : ctx.ds.customer_orders) {
    if (!o.interaction_date_complete) continue;
    if (!period.contains(*o.interaction_date_complete)) continue;
    if (f.party_role && !ctx.segment_is(o.customer_ref, *f.party_role)) continue;
    if (f.component && !ctx.chain_component_is(o.chain_id, *f.component)) continue;
    acc.den += 1;
    if (!o.delivery_date) continue;
    auto it = ctx.problems_by_chain.find(o.chain_id);
    if (it == ctx.problems_by_chain.end()) continue;
    for (const auto* p : it->second) {
      const std::int64_t lag = p->time_raised - *o.delivery_date;
      if (lag >= 0 && lag <= kEarlyFaultWindowSecs) {
        acc.num_cnt += 1;
        break;
      }
    }
  }
  return acc;
}

// Complete chain: CO, SO and RO all present with completion dates.
bool chain_complete(const OracleContext& ctx, const CustomerOrder& o,
                    const ServiceOrder*& so, const ResourceOrder*& ro) {
  so = ctx.so(o.chain_id);
  ro = ctx.ro(o.chain_id);
  return so && ro && o.interaction_date_complete && so->interaction_date_complete &&
         ro->interaction_date_complete;
}

Acc oracle_foe2a(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& o : ctx.ds.customer_orders) {
    const ServiceOrder* so = nullptr;
    const ResourceOrder* ro = nullptr;
    if (!chain_complete(ctx, o, so, ro)) continue;
    if (!period.contains(*o.interaction_date_complete)) continue;
    if (f.area && !ctx.area_is(o.place_ref, *f.area)) continue;
    acc.den += 1;
    acc.num_secs += *o.interaction_date_complete - o.interaction_date;
  }
  return acc;
}

std::map<int, Acc> oracle_foe2b(const OracleContext& ctx, const ReportingPeriod& period,
                                const OracleFilters& f) {
  std::map<int, Acc> blocks;
  for (const auto& o : ctx.ds.customer_orders) {
    const ServiceOrder* so = nullptr;
    const ResourceOrder* ro = nullptr;
    if (!chain_complete(ctx, o, so, ro)) continue;
    if (!period.contains(*o.interaction_date_complete)) continue;
    if (f.party_role && !ctx.segment_is(o.customer_ref, *f.party_role)) continue;
    const std::int64_t durations[5] = {
        so->interaction_date - o.interaction_date,
        ro->interaction_date - so->interaction_date,
        *ro->interaction_date_complete - ro->interaction_date,
        *so->interaction_date_complete - *ro->interaction_date_complete,
        *o.interaction_date_complete - *so->interaction_date_complete,
    };
    for (int b = 1; b <= 5; ++b) {
      Acc& acc = blocks[b];
      acc.den += 1;
      acc.num_secs += durations[b - 1];
    }
  }
  return blocks;
}

Acc oracle_foe3a(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& o : ctx.ds.service_orders) {
    if (!o.interaction_date_complete) continue;
    if (!period.contains(*o.interaction_date_complete)) continue;
    if (f.system && !ctx.chain_system_is(o.chain_id, *f.system)) continue;
    if (f.component && !ctx.chain_component_is(o.chain_id, *f.component)) continue;
    acc.den += 1;
    if (o.rework_no > 0) acc.num_cnt += 1;
  }
  return acc;
}

Acc oracle_foe3b(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& t : ctx.ds.trouble_tickets) {
    if (t.linked_order_kind != LinkedOrderKind::kServiceOrder) continue;
    if (!t.service_restored_date) continue;
    if (!period.contains(*t.service_restored_date)) continue;
    if (f.party_role && !ctx.chain_segment_is(t.chain_id, *f.party_role)) continue;
    if (f.component && !ctx.chain_component_is(t.chain_id, *f.component)) continue;
    if (f.system && !ctx.chain_system_is(t.chain_id, *f.system)) continue;
    acc.den += 1;
    acc.num_secs += *t.service_restored_date - t.trouble_detection_date;
  }
  return acc;
}

Acc oracle_foe3d(const OracleContext& ctx, const ReportingPeriod& period,
                 const OracleFilters& f) {
  Acc acc;
  for (const auto& t : ctx.ds.trouble_tickets) {
    if (t.linked_order_kind != LinkedOrderKind::kCustomerOrder) continue;
    if (!period.contains(t.trouble_detection_date)) continue;
    if (f.party_role && !ctx.chain_segment_is(t.chain_id, *f.party_role)) continue;
    if (f.component && !ctx.chain_component_is(t.chain_id, *f.component)) continue;
    acc.den += 1;
    if (t.trouble_ticket_state == kTicketStatePending) acc.num_cnt += 1;
  }
  return acc;
}

}  // namespace

std::vector<MetricValue> oracle_evaluate(const SourceDataset& source,
                                         const std::string& metric_id,
                                         const ReportingPeriod& period,
                                         const Filters& filters) {
  const MetricDef& def = metric_def(metric_id);
  check_filters(def, filters);
  const OracleContext ctx(source);
  const OracleFilters f = OracleFilters::from(filters);

  std::map<int, Acc> blocks;
  switch (metric_index(metric_id)) {
    case 0: blocks[0] = oracle_fce2a(ctx, period, f); break;
    case 1: blocks[0] = oracle_fce2b(ctx, period, f); break;
    case 2: blocks[0] = oracle_fce2c(ctx, period, f); break;
    case 3: blocks[0] = oracle_fce3(ctx, period, f); break;
    case 4: blocks[0] = oracle_fce4(ctx, period, f); break;
    case 5: blocks[0] = oracle_fce4b(ctx, period, f); break;
    case 6: blocks[0] = oracle_foe2a(ctx, period, f); break;
    case 7: blocks = oracle_foe2b(ctx, period, f); break;
    case 8: blocks[0] = oracle_foe3a(ctx, period, f); break;
    case 9: blocks[0] = oracle_foe3b(ctx, period, f); break;
    case 10: blocks[0] = oracle_foe3d(ctx, period, f); break;
    default: throw DomainError("metric index out of range");
  }
  return values_from_blocks(def, blocks, period, filters, "");
}

}  // namespace otp
