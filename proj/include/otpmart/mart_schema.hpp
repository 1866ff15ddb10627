#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "otpmart/datagen.hpp"  // FileManifest

namespace otp {

// Constellation schema: 5 shared dimensions, 9 fact tables. Surrogate keys
// are assigned sequentially over natural keys in lexicographic order; key 0
// is the reserved "unknown" member for absent links, and time key 0 means
// "no date". Durations are kept in whole seconds internally and rendered as
// fractional days (6 decimals) in the CSVs.

struct DimTimeRow {
  int time_key = 0;  // YYYYMMDD
  int day = 0;
  int month = 0;
  int year = 0;

  bool operator==(const DimTimeRow&) const = default;
};

struct DimCustomerRow {
  int customer_key = 0;
  std::string customer_id;
  std::string party_role_name;

  bool operator==(const DimCustomerRow&) const = default;
};

struct DimPlaceRow {
  int place_key = 0;
  std::string place_id;
  std::string geographic_area;

  bool operator==(const DimPlaceRow&) const = default;
};

struct DimServiceRow {
  int service_key = 0;
  std::string cfs_id;
  std::string service_component;
  int cfs_status = 0;

  bool operator==(const DimServiceRow&) const = default;
};

struct DimServiceProblemRow {
  int sp_key = 0;
  std::string service_problem_id;
  std::string originating_system;
  std::string reason;

  bool operator==(const DimServiceProblemRow&) const = default;
};

// F-CE-2a/2b/2c share this fact; customerOrderId is a degenerate dimension.
struct FactOrderFulfillmentRow {
  std::string customer_order_id;
  int customer_key = 0;
  int completion_time_key = 0;  // 0 while the order is open
  int due_time_key = 0;
  int delivery_time_key = 0;  // 0 when undelivered
  std::optional<std::int64_t> order_duration_secs;
  std::optional<std::int64_t> order_delay_secs;  // dueDate - customerRequiredDate
  std::optional<int> on_time_flag;               // present iff delivered
  int completed_flag = 0;
  int delivered_flag = 0;

  bool operator==(const FactOrderFulfillmentRow&) const = default;
};

// F-CE-3: usability inquiries (numerator) and activations (denominator).
struct FactUsabilityQueryRow {
  std::string event_type;  // "inquiry" | "activation"
  int customer_key = 0;
  int service_key = 0;
  int time_key = 0;
  int count = 1;

  bool operator==(const FactUsabilityQueryRow&) const = default;
};

// F-CE-4: one row per customer-facing service.
struct FactActivationFailureRow {
  int service_key = 0;
  int customer_key = 0;
  int sp_key = 0;  // qualifying problem, 0 when none
  int time_key = 0;
  int failed_flag = 0;
  int delivered_flag = 0;

  bool operator==(const FactActivationFailureRow&) const = default;
};

// F-CE-4b: one row per customer order.
struct FactEarlyLifeFaultRow {
  std::string customer_order_id;
  int customer_key = 0;
  int service_key = 0;
  int completion_time_key = 0;
  int early_fault_flag = 0;

  bool operator==(const FactEarlyLifeFaultRow&) const = default;
};

// F-OE-2a: one row per complete chain; the five meta-process intervals
// telescope so total_secs == mp_secs[0] + ... + mp_secs[4] exactly.
struct FactOrderToActivationRow {
  std::string chain_id;
  int customer_key = 0;
  int place_key = 0;
  int completion_time_key = 0;
  std::array<std::int64_t, 5> mp_secs{};
  std::int64_t total_secs = 0;

  bool operator==(const FactOrderToActivationRow&) const = default;
};

// F-OE-2b: five rows per complete chain, one per meta-process block.
struct FactActivationByProcessRow {
  std::string chain_id;
  int customer_key = 0;
  int completion_time_key = 0;
  int block_id = 0;  // 1-5
  std::int64_t duration_secs = 0;

  bool operator==(const FactActivationByProcessRow&) const = default;
};

// F-OE-3a: one row per service order.
struct FactReworkRow {
  std::string service_order_id;
  int sp_key = 0;
  int service_key = 0;
  int completion_time_key = 0;
  int rework_flag = 0;

  bool operator==(const FactReworkRow&) const = default;
};

// F-OE-3b: one row per service-order-linked trouble ticket.
struct FactReworkHandlingRow {
  std::string trouble_ticket_id;
  int customer_key = 0;
  int service_key = 0;
  int sp_key = 0;
  int restored_time_key = 0;  // 0 while unresolved
  std::optional<std::int64_t> resolution_secs;

  bool operator==(const FactReworkHandlingRow&) const = default;
};

// F-OE-3d: one row per customer-order-linked trouble ticket.
struct FactPendingErrorFixRow {
  std::string trouble_ticket_id;
  int customer_key = 0;
  int service_key = 0;
  int raised_time_key = 0;
  int pending_flag = 0;

  bool operator==(const FactPendingErrorFixRow&) const = default;
};

struct MartSnapshot {
  std::vector<DimTimeRow> dim_time;
  std::vector<DimCustomerRow> dim_customer;
  std::vector<DimPlaceRow> dim_place;
  std::vector<DimServiceRow> dim_service;
  std::vector<DimServiceProblemRow> dim_service_problem;

  std::vector<FactOrderFulfillmentRow> fact_order_fulfillment;      // F-CE-2a-2b-2c
  std::vector<FactUsabilityQueryRow> fact_usability_queries;        // F-CE-3
  std::vector<FactActivationFailureRow> fact_activation_failures;   // F-CE-4
  std::vector<FactEarlyLifeFaultRow> fact_early_life_faults;        // F-CE-4b
  std::vector<FactOrderToActivationRow> fact_order_to_activation;   // F-OE-2a
  std::vector<FactActivationByProcessRow> fact_activation_by_process;  // F-OE-2b
  std::vector<FactReworkRow> fact_rework;                           // F-OE-3a
  std::vector<FactReworkHandlingRow> fact_rework_handling;          // F-OE-3b
  std::vector<FactPendingErrorFixRow> fact_pending_error_fix;       // F-OE-3d

  bool operator==(const MartSnapshot&) const = default;
};

struct MartTableInfo {
  std::string_view table;      // e.g. "fact_fce2abc"
  std::string_view file_name;  // e.g. "fact_fce2abc.csv"
  bool is_fact = false;
  std::vector<std::string_view> columns;
};

// The 14 tables (5 dimensions + 9 facts) with their exact CSV headers.
const std::vector<MartTableInfo>& mart_tables();

// Dangling foreign keys described as "table: row -> missing dim key"; empty
// when the snapshot is closed under its references (key 0 always allowed).
std::vector<std::string> check_foreign_keys(const MartSnapshot& mart);

// One CSV per table, rows sorted by key, identical bytes for identical
// snapshots. Creates the directory if needed.
FileManifest write_mart(const MartSnapshot& mart, const std::filesystem::path& directory);

// Inverse of write_mart; verifies headers and foreign-key closure.
// Throws IoError / LoadError accordingly.
MartSnapshot read_mart(const std::filesystem::path& directory);

}  // namespace otp
