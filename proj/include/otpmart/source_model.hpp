#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "otpmart/timestamp.hpp"

namespace otp {

// SID-derived source entities for the Order-to-Payment fulfillment chain.
// A chain links one CustomerOrder with at most one ServiceOrder and one
// ResourceOrder sharing the same chainId; CFS, problems and tickets hang
// off the chain as well. All records are immutable values.

struct Customer {
  std::string customer_id;
  std::string party_role_name;  // segment, e.g. "consumer"

  bool operator==(const Customer&) const = default;
};

struct Place {
  std::string place_id;
  std::string geographic_area;

  bool operator==(const Place&) const = default;
};

struct CustomerOrder {
  std::string customer_order_id;
  std::string chain_id;
  std::string customer_ref;  // Customer.customer_id
  std::string place_ref;     // Place.place_id
  Timestamp interaction_date;
  std::optional<Timestamp> interaction_date_complete;
  std::optional<Timestamp> delivery_date;
  Timestamp due_date;
  Timestamp customer_required_date;
  int rework_no = 0;

  bool operator==(const CustomerOrder&) const = default;
};

struct ServiceOrder {
  std::string service_order_id;
  std::string chain_id;
  Timestamp interaction_date;
  std::optional<Timestamp> interaction_date_complete;
  Timestamp due_date;
  Timestamp customer_required_date;
  std::optional<Timestamp> delivery_date;
  int rework_no = 0;

  bool operator==(const ServiceOrder&) const = default;
};

struct ResourceOrder {
  std::string resource_order_id;
  std::string chain_id;
  Timestamp interaction_date;
  std::optional<Timestamp> interaction_date_complete;
  Timestamp due_date;
  Timestamp customer_required_date;
  std::optional<Timestamp> delivery_date;
  int rework_no = 0;

  bool operator==(const ResourceOrder&) const = default;
};

// cfs_status codes: 0 = delivered/active, 6 = failed. Codes 1-5 and 7-9
// are accepted but carry no metric semantics.
inline constexpr int kCfsStatusDelivered = 0;
inline constexpr int kCfsStatusFailed = 6;
inline constexpr int kCfsStatusMax = 9;

struct CustomerFacingService {
  std::string cfs_id;
  std::string chain_id;
  std::string service_component;
  int cfs_status = 0;
  bool is_service_enabled = false;
  bool has_started = false;

  bool operator==(const CustomerFacingService&) const = default;
};

// Reason value that marks an activation failure, and the first-alert
// source that marks a customer-reported problem.
inline constexpr std::string_view kReasonActivationFailure = "delivery or activation failure";
inline constexpr std::string_view kFirstAlertCustomerReport = "customer report";

struct ServiceProblem {
  std::string service_problem_id;
  std::string chain_id;
  std::string originating_system;
  std::string reason;
  std::string first_alert;
  Timestamp time_raised;

  bool operator==(const ServiceProblem&) const = default;
};

enum class LinkedOrderKind { kCustomerOrder, kServiceOrder };

std::string_view to_string(LinkedOrderKind kind);
LinkedOrderKind linked_order_kind_from_string(const std::string& s);  // throws ParseError

inline constexpr std::string_view kTicketStatePending = "Pending";

struct TroubleTicket {
  std::string trouble_ticket_id;
  std::string chain_id;
  LinkedOrderKind linked_order_kind = LinkedOrderKind::kCustomerOrder;
  std::string trouble_ticket_state;
  Timestamp trouble_detection_date;
  std::optional<Timestamp> service_restored_date;
  Timestamp interaction_date;
  std::optional<Timestamp> interaction_date_complete;

  bool operator==(const TroubleTicket&) const = default;
};

inline constexpr std::string_view kInquiryTypeUsability = "usability inquiry";

struct CustomerInquiry {
  std::string customer_inquiry_id;
  std::string customer_ref;
  std::string inquiry_type;
  Timestamp interaction_date;

  bool operator==(const CustomerInquiry&) const = default;
};

struct SourceDataset {
  std::vector<Customer> customers;
  std::vector<Place> places;
  std::vector<CustomerOrder> customer_orders;
  std::vector<ServiceOrder> service_orders;
  std::vector<ResourceOrder> resource_orders;
  std::vector<CustomerFacingService> services;
  std::vector<ServiceProblem> service_problems;
  std::vector<TroubleTicket> trouble_tickets;
  std::vector<CustomerInquiry> customer_inquiries;

  bool operator==(const SourceDataset&) const = default;
};

// --- validation -----------------------------------------------------------

// The fixed rule vocabulary; every violation names exactly one of these.
inline constexpr std::string_view kRuleDuplicateId = "duplicate-id";
inline constexpr std::string_view kRuleTemporalOrder = "temporal-order";
inline constexpr std::string_view kRuleDanglingRef = "dangling-ref";
inline constexpr std::string_view kRuleOrphanChain = "orphan-chain";
inline constexpr std::string_view kRuleDuplicateChain = "duplicate-chain";
inline constexpr std::string_view kRuleEmptyField = "empty-field";
inline constexpr std::string_view kRuleBadStatus = "bad-status";

const std::array<std::string_view, 7>& validation_rules();

struct Violation {
  std::string entity;  // table name, e.g. "customer_orders"
  std::string id;      // offending record's identifier
  std::string rule;    // one of validation_rules()
  std::string detail;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  bool operator==(const ValidationReport&) const = default;
};

// Pure and idempotent; never mutates the dataset.
ValidationReport validate(const SourceDataset& dataset);

// --- CSV interchange ------------------------------------------------------

// File names and exact headers of the nine source CSVs.
struct SourceFileInfo {
  std::string_view file_name;
  std::vector<std::string_view> columns;
};
const std::vector<SourceFileInfo>& source_files();

// Parses the nine CSVs from `directory`. Throws IoError on a missing file,
// LoadError when any row fails to parse (every issue reported with file
// and line, duplicate identifiers with both lines).
SourceDataset load_source(const std::filesystem::path& directory);

}  // namespace otp
