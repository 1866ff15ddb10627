#include "otpmart/mart_schema.hpp"

#include <algorithm>
#include <unordered_set>

#include "otpmart/csv.hpp"
#include "otpmart/errors.hpp"

namespace otp {

namespace {

std::vector<std::string_view> cols(std::initializer_list<std::string_view> c) {
  return {c};
}

std::string fmt_flag(std::optional<int> f) {
  return f ? std::to_string(*f) : std::string{};
}

}  // namespace

const std::vector<MartTableInfo>& mart_tables() {
  static const std::vector<MartTableInfo> tables = {
      {"dim_time", "dim_time.csv", false, cols({"timeKey", "day", "month", "year"})},
      {"dim_customer", "dim_customer.csv", false,
       cols({"customerKey", "customerId", "partyRoleName"})},
      {"dim_place", "dim_place.csv", false,
       cols({"placeKey", "placeId", "geographicArea"})},
      {"dim_service", "dim_service.csv", false,
       cols({"serviceKey", "cfsId", "serviceComponent", "cfsStatus"})},
      {"dim_service_problem", "dim_service_problem.csv", false,
       cols({"spKey", "serviceProblemId", "originatingSystem", "reason"})},
      {"fact_fce2abc", "fact_fce2abc.csv", true,
       cols({"customerOrderId", "customerKey", "completionTimeKey", "dueTimeKey",
             "deliveryTimeKey", "orderDurationDays", "orderDelayDays", "onTimeFlag",
             "completedFlag", "deliveredFlag"})},
      {"fact_fce3", "fact_fce3.csv", true,
       cols({"eventType", "customerKey", "serviceKey", "timeKey", "count"})},
      {"fact_fce4", "fact_fce4.csv", true,
       cols({"serviceKey", "customerKey", "spKey", "timeKey", "failedFlag",
             "deliveredFlag"})},
      {"fact_fce4b", "fact_fce4b.csv", true,
       cols({"customerOrderId", "customerKey", "serviceKey", "completionTimeKey",
             "earlyFaultFlag"})},
      {"fact_foe2a", "fact_foe2a.csv", true,
       cols({"chainId", "customerKey", "placeKey", "completionTimeKey", "mp1Days",
             "mp2Days", "mp3Days", "mp4Days", "mp5Days", "totalDays"})},
      {"fact_foe2b", "fact_foe2b.csv", true,
       cols({"chainId", "customerKey", "completionTimeKey", "blockId",
             "durationDays"})},
      {"fact_foe3a", "fact_foe3a.csv", true,
       cols({"serviceOrderId", "spKey", "serviceKey", "completionTimeKey",
             "reworkFlag"})},
      {"fact_foe3b", "fact_foe3b.csv", true,
       cols({"troubleTicketId", "customerKey", "serviceKey", "spKey",
             "restoredTimeKey", "resolutionDays"})},
      {"fact_foe3d", "fact_foe3d.csv", true,
       cols({"troubleTicketId", "customerKey", "serviceKey", "raisedTimeKey",
             "pendingFlag"})},
  };
  return tables;
}

std::vector<std::string> check_foreign_keys(const MartSnapshot& mart) {
  std::unordered_set<int> time_keys, customer_keys, place_keys, service_keys, sp_keys;
  for (const auto& r : mart.dim_time) time_keys.insert(r.time_key);
  for (const auto& r : mart.dim_customer) customer_keys.insert(r.customer_key);
  for (const auto& r : mart.dim_place) place_keys.insert(r.place_key);
  for (const auto& r : mart.dim_service) service_keys.insert(r.service_key);
  for (const auto& r : mart.dim_service_problem) sp_keys.insert(r.sp_key);

  std::vector<std::string> dangling;
  const auto need = [&](const std::unordered_set<int>& keys, int key,
                        const std::string& table, const std::string& row,
                        const char* dim) {
    if (key != 0 && !keys.count(key)) {
      dangling.push_back(table + ": " + row + " -> missing " + dim + " key " +
                         std::to_string(key));
    }
  };

  for (const auto& f : mart.fact_order_fulfillment) {
    need(customer_keys, f.customer_key, "fact_fce2abc", f.customer_order_id, "customer");
    need(time_keys, f.completion_time_key, "fact_fce2abc", f.customer_order_id, "time");
    need(time_keys, f.due_time_key, "fact_fce2abc", f.customer_order_id, "time");
    need(time_keys, f.delivery_time_key, "fact_fce2abc", f.customer_order_id, "time");
  }
  for (const auto& f : mart.fact_usability_queries) {
    need(customer_keys, f.customer_key, "fact_fce3", f.event_type, "customer");
    need(service_keys, f.service_key, "fact_fce3", f.event_type, "service");
    need(time_keys, f.time_key, "fact_fce3", f.event_type, "time");
  }
  for (const auto& f : mart.fact_activation_failures) {
    const std::string row = "service key " + std::to_string(f.service_key);
    need(service_keys, f.service_key, "fact_fce4", row, "service");
    need(customer_keys, f.customer_key, "fact_fce4", row, "customer");
    need(sp_keys, f.sp_key, "fact_fce4", row, "service_problem");
    need(time_keys, f.time_key, "fact_fce4", row, "time");
  }
  for (const auto& f : mart.fact_early_life_faults) {
    need(customer_keys, f.customer_key, "fact_fce4b", f.customer_order_id, "customer");
    need(service_keys, f.service_key, "fact_fce4b", f.customer_order_id, "service");
    need(time_keys, f.completion_time_key, "fact_fce4b", f.customer_order_id, "time");
  }
  for (const auto& f : mart.fact_order_to_activation) {
    need(customer_keys, f.customer_key, "fact_foe2a", f.chain_id, "customer");
    need(place_keys, f.place_key, "fact_foe2a", f.chain_id, "place");
    need(time_keys, f.completion_time_key, "fact_foe2a", f.chain_id, "time");
  }
  for (const auto& f : mart.fact_activation_by_process) {
    need(customer_keys, f.customer_key, "fact_foe2b", f.chain_id, "customer");
    need(time_keys, f.completion_time_key, "fact_foe2b", f.chain_id, "time");
  }
  for (const auto& f : mart.fact_rework) {
    need(sp_keys, f.sp_key, "fact_foe3a", f.service_order_id, "service_problem");
    need(service_keys, f.service_key, "fact_foe3a", f.service_order_id, "service");
    need(time_keys, f.completion_time_key, "fact_foe3a", f.service_order_id, "time");
  }
  for (const auto& f : mart.fact_rework_handling) {
    need(customer_keys, f.customer_key, "fact_foe3b", f.trouble_ticket_id, "customer");
    need(service_keys, f.service_key, "fact_foe3b", f.trouble_ticket_id, "service");
    need(sp_keys, f.sp_key, "fact_foe3b", f.trouble_ticket_id, "service_problem");
    need(time_keys, f.restored_time_key, "fact_foe3b", f.trouble_ticket_id, "time");
  }
  for (const auto& f : mart.fact_pending_error_fix) {
    need(customer_keys, f.customer_key, "fact_foe3d", f.trouble_ticket_id, "customer");
    need(service_keys, f.service_key, "fact_foe3d", f.trouble_ticket_id, "service");
    need(time_keys, f.raised_time_key, "fact_foe3d", f.trouble_ticket_id, "time");
  }
  return dangling;
}

FileManifest write_mart(const MartSnapshot& mart, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  MartSnapshot m = mart;  // sort a copy so writes are deterministic
  std::sort(m.dim_time.begin(), m.dim_time.end(),
            [](auto& a, auto& b) { return a.time_key < b.time_key; });
  std::sort(m.dim_customer.begin(), m.dim_customer.end(),
            [](auto& a, auto& b) { return a.customer_key < b.customer_key; });
  std::sort(m.dim_place.begin(), m.dim_place.end(),
            [](auto& a, auto& b) { return a.place_key < b.place_key; });
  std::sort(m.dim_service.begin(), m.dim_service.end(),
            [](auto& a, auto& b) { return a.service_key < b.service_key; });
  std::sort(m.dim_service_problem.begin(), m.dim_service_problem.end(),
            [](auto& a, auto& b) { return a.sp_key < b.sp_key; });
  std::sort(m.fact_order_fulfillment.begin(), m.fact_order_fulfillment.end(),
            [](auto& a, auto& b) { return a.customer_order_id < b.customer_order_id; });
  std::sort(m.fact_usability_queries.begin(), m.fact_usability_queries.end(),
            [](auto& a, auto& b) {
              return std::tie(a.event_type, a.customer_key, a.service_key, a.time_key) <
                     std::tie(b.event_type, b.customer_key, b.service_key, b.time_key);
            });
  std::sort(m.fact_activation_failures.begin(), m.fact_activation_failures.end(),
            [](auto& a, auto& b) { return a.service_key < b.service_key; });
  std::sort(m.fact_early_life_faults.begin(), m.fact_early_life_faults.end(),
            [](auto& a, auto& b) { return a.customer_order_id < b.customer_order_id; });
  std::sort(m.fact_order_to_activation.begin(), m.fact_order_to_activation.end(),
            [](auto& a, auto& b) { return a.chain_id < b.chain_id; });
  std::sort(m.fact_activation_by_process.begin(), m.fact_activation_by_process.end(),
            [](auto& a, auto& b) {
              return std::tie(a.chain_id, a.block_id) < std::tie(b.chain_id, b.block_id);
            });
  std::sort(m.fact_rework.begin(), m.fact_rework.end(),
            [](auto& a, auto& b) { return a.service_order_id < b.service_order_id; });
  std::sort(m.fact_rework_handling.begin(), m.fact_rework_handling.end(),
            [](auto& a, auto& b) { return a.trouble_ticket_id < b.trouble_ticket_id; });
  std::sort(m.fact_pending_error_fix.begin(), m.fact_pending_error_fix.end(),
            [](auto& a, auto& b) { return a.trouble_ticket_id < b.trouble_ticket_id; });

  FileManifest manifest;
  const auto& tables = mart_tables();
  const auto emit = [&](std::size_t idx, const std::vector<CsvRow>& rows) {
    CsvRow header;
    for (auto c : tables[idx].columns) header.emplace_back(c);
    csv_write_file(dir / tables[idx].file_name, header, rows);
    manifest.entries.push_back({std::string(tables[idx].file_name), rows.size()});
  };

  std::vector<CsvRow> rows;
  for (const auto& r : m.dim_time)
    rows.push_back({std::to_string(r.time_key), std::to_string(r.day),
                    std::to_string(r.month), std::to_string(r.year)});
  emit(0, rows);
  rows.clear();
  for (const auto& r : m.dim_customer)
    rows.push_back({std::to_string(r.customer_key), r.customer_id, r.party_role_name});
  emit(1, rows);
  rows.clear();
  for (const auto& r : m.dim_place)
    rows.push_back({std::to_string(r.place_key), r.place_id, r.geographic_area});
  emit(2, rows);
  rows.clear();
  for (const auto& r : m.dim_service)
    rows.push_back({std::to_string(r.service_key), r.cfs_id, r.service_component,
                    std::to_string(r.cfs_status)});
  emit(3, rows);
  rows.clear();
  for (const auto& r : m.dim_service_problem)
    rows.push_back({std::to_string(r.sp_key), r.service_problem_id,
                    r.originating_system, r.reason});
  emit(4, rows);
  rows.clear();

  for (const auto& f : m.fact_order_fulfillment) {
    rows.push_back({f.customer_order_id, std::to_string(f.customer_key),
                    std::to_string(f.completion_time_key), std::to_string(f.due_time_key),
                    std::to_string(f.delivery_time_key),
                    format_days_field(f.order_duration_secs),
                    format_days_field(f.order_delay_secs), fmt_flag(f.on_time_flag),
                    std::to_string(f.completed_flag), std::to_string(f.delivered_flag)});
  }
  emit(5, rows);
  rows.clear();
  for (const auto& f : m.fact_usability_queries) {
    rows.push_back({f.event_type, std::to_string(f.customer_key),
                    std::to_string(f.service_key), std::to_string(f.time_key),
                    std::to_string(f.count)});
  }
  emit(6, rows);
  rows.clear();
  for (const auto& f : m.fact_activation_failures) {
    rows.push_back({std::to_string(f.service_key), std::to_string(f.customer_key),
                    std::to_string(f.sp_key), std::to_string(f.time_key),
                    std::to_string(f.failed_flag), std::to_string(f.delivered_flag)});
  }
  emit(7, rows);
  rows.clear();
  for (const auto& f : m.fact_early_life_faults) {
    rows.push_back({f.customer_order_id, std::to_string(f.customer_key),
                    std::to_string(f.service_key), std::to_string(f.completion_time_key),
                    std::to_string(f.early_fault_flag)});
  }
  emit(8, rows);
  rows.clear();
  for (const auto& f : m.fact_order_to_activation) {
    CsvRow row{f.chain_id, std::to_string(f.customer_key), std::to_string(f.place_key),
               std::to_string(f.completion_time_key)};
    for (auto s : f.mp_secs) row.push_back(format_days_field(s));
    row.push_back(format_days_field(f.total_secs));
    rows.push_back(std::move(row));
  }
  emit(9, rows);
  rows.clear();
  for (const auto& f : m.fact_activation_by_process) {
    rows.push_back({f.chain_id, std::to_string(f.customer_key),
                    std::to_string(f.completion_time_key), std::to_string(f.block_id),
                    format_days_field(f.duration_secs)});
  }
  emit(10, rows);
  rows.clear();
  for (const auto& f : m.fact_rework) {
    rows.push_back({f.service_order_id, std::to_string(f.sp_key),
                    std::to_string(f.service_key), std::to_string(f.completion_time_key),
                    std::to_string(f.rework_flag)});
  }
  emit(11, rows);
  rows.clear();
  for (const auto& f : m.fact_rework_handling) {
    rows.push_back({f.trouble_ticket_id, std::to_string(f.customer_key),
                    std::to_string(f.service_key), std::to_string(f.sp_key),
                    std::to_string(f.restored_time_key),
                    format_days_field(f.resolution_secs)});
  }
  emit(12, rows);
  rows.clear();
  for (const auto& f : m.fact_pending_error_fix) {
    rows.push_back({f.trouble_ticket_id, std::to_string(f.customer_key),
                    std::to_string(f.service_key), std::to_string(f.raised_time_key),
                    std::to_string(f.pending_flag)});
  }
  emit(13, rows);

  return manifest;
}

namespace {

// Parsed rows of one mart CSV after header verification.
std::vector<CsvRow> read_table(const std::filesystem::path& dir,
                               const MartTableInfo& info,
                               std::vector<std::string>& issues) {
  const auto path = dir / info.file_name;
  if (!std::filesystem::exists(path)) {
    throw IoError("missing mart file " + path.string());
  }
  auto rows = csv_read_file(path);
  CsvRow expected;
  for (auto c : info.columns) expected.emplace_back(c);
  if (rows.empty() || rows[0] != expected) {
    issues.push_back(std::string(info.file_name) + ": bad header, expected '" +
                     csv_format_row(expected) + "'");
    return {};
  }
  rows.erase(rows.begin());
  for (const auto& row : rows) {
    if (row.size() != expected.size()) {
      issues.push_back(std::string(info.file_name) + ": wrong field count");
      return {};
    }
  }
  return rows;
}

int to_key(const std::string& s) { return int(parse_int_field(s)); }

}  // namespace

MartSnapshot read_mart(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("mart directory not found: " + dir.string());
  }
  const auto& tables = mart_tables();
  MartSnapshot m;
  std::vector<std::string> issues;

  const auto guard = [&](std::size_t idx, auto fn) {
    for (const auto& row : read_table(dir, tables[idx], issues)) {
      try {
        fn(row);
      } catch (const ParseError& e) {
        issues.push_back(std::string(tables[idx].file_name) + ": " + e.what());
      }
    }
  };

  guard(0, [&](const CsvRow& r) {
    m.dim_time.push_back({to_key(r[0]), to_key(r[1]), to_key(r[2]), to_key(r[3])});
  });
  guard(1, [&](const CsvRow& r) {
    m.dim_customer.push_back({to_key(r[0]), r[1], r[2]});
  });
  guard(2, [&](const CsvRow& r) { m.dim_place.push_back({to_key(r[0]), r[1], r[2]}); });
  guard(3, [&](const CsvRow& r) {
    m.dim_service.push_back({to_key(r[0]), r[1], r[2], to_key(r[3])});
  });
  guard(4, [&](const CsvRow& r) {
    m.dim_service_problem.push_back({to_key(r[0]), r[1], r[2], r[3]});
  });
  guard(5, [&](const CsvRow& r) {
    m.fact_order_fulfillment.push_back(
        {r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]), to_key(r[4]),
         parse_opt_days_field(r[5]), parse_opt_days_field(r[6]),
         parse_opt_flag_field(r[7]), to_key(r[8]), to_key(r[9])});
  });
  guard(6, [&](const CsvRow& r) {
    m.fact_usability_queries.push_back(
        {r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]), to_key(r[4])});
  });
  guard(7, [&](const CsvRow& r) {
    m.fact_activation_failures.push_back({to_key(r[0]), to_key(r[1]), to_key(r[2]),
                                          to_key(r[3]), to_key(r[4]), to_key(r[5])});
  });
  guard(8, [&](const CsvRow& r) {
    m.fact_early_life_faults.push_back(
        {r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]), to_key(r[4])});
  });
  guard(9, [&](const CsvRow& r) {
    FactOrderToActivationRow f{r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]), {}, 0};
    for (int i = 0; i < 5; ++i) f.mp_secs[std::size_t(i)] = parse_days_field(r[std::size_t(4 + i)]);
    f.total_secs = parse_days_field(r[9]);
    m.fact_order_to_activation.push_back(std::move(f));
  });
  guard(10, [&](const CsvRow& r) {
    m.fact_activation_by_process.push_back(
        {r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]), parse_days_field(r[4])});
  });
  guard(11, [&](const CsvRow& r) {
    m.fact_rework.push_back({r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]), to_key(r[4])});
  });
  guard(12, [&](const CsvRow& r) {
    m.fact_rework_handling.push_back({r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]),
                                      to_key(r[4]), parse_opt_days_field(r[5])});
  });
  guard(13, [&](const CsvRow& r) {
    m.fact_pending_error_fix.push_back(
        {r[0], to_key(r[1]), to_key(r[2]), to_key(r[3]), to_key(r[4])});
  });

  if (!issues.empty()) {
    throw LoadError("mart load failed with " + std::to_string(issues.size()) +
                        " issue(s)",
                    issues);
  }
  auto dangling = check_foreign_keys(m);
  if (!dangling.empty()) {
    throw LoadError("mart has " + std::to_string(dangling.size()) +
                        " dangling foreign key(s)",
                    dangling);
  }
  return m;
}

}  // namespace otp
