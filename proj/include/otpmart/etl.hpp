#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "otpmart/mart_schema.hpp"
#include "otpmart/source_model.hpp"

namespace otp {

// Extract-transform-load from SourceDataset to MartSnapshot. The dimension
// build is a barrier; the fact transformations are independent of each
// other and may run concurrently; output is identical either way.

// Customer attribution goes through two association tables so the
// order->customer join path stays exercisable: a role row ties a customer
// order (the business interaction) to a role, the involvement row ties the
// role to the party role (the customer). Joining them recovers exactly the
// direct customerRef mapping.
struct AssociationTables {
  struct RoleRow {
    std::string role_id;
    std::string interaction_id;  // customerOrderId

    bool operator==(const RoleRow&) const = default;
  };
  struct InvolvesRow {
    std::string role_id;
    std::string party_role_id;  // customerId

    bool operator==(const InvolvesRow&) const = default;
  };

  std::vector<RoleRow> business_interaction_role;
  std::vector<InvolvesRow> business_interaction_role_involves_party_role;

  bool operator==(const AssociationTables&) const = default;
};

AssociationTables derive_associations(const SourceDataset& dataset);

// The five dimension tables plus natural-key -> surrogate-key lookups.
// Surrogates run 1..n over natural keys sorted lexicographically; 0 means
// "unknown".
struct Dimensions {
  std::vector<DimTimeRow> time;
  std::vector<DimCustomerRow> customer;
  std::vector<DimPlaceRow> place;
  std::vector<DimServiceRow> service;
  std::vector<DimServiceProblemRow> service_problem;

  int customer_key(const std::string& customer_id) const;
  int place_key(const std::string& place_id) const;
  int service_key(const std::string& cfs_id) const;
  int service_problem_key(const std::string& service_problem_id) const;

  void build_lookups();

 private:
  std::unordered_map<std::string, int> customer_keys_, place_keys_, service_keys_,
      problem_keys_;
};

Dimensions build_dimensions(const SourceDataset& dataset);

// F-CE-2a-2b-2c rows, one per customer order; the customer key is resolved
// through the association tables.
std::vector<FactOrderFulfillmentRow> transform_order_facts(
    const SourceDataset& dataset, const Dimensions& dims,
    const AssociationTables& associations);

struct MetaProcessFacts {
  std::vector<FactOrderToActivationRow> order_to_activation;     // F-OE-2a
  std::vector<FactActivationByProcessRow> activation_by_process;  // F-OE-2b
};

// One F-OE-2a row plus five F-OE-2b block rows per complete chain.
MetaProcessFacts transform_meta_process_facts(const SourceDataset& dataset,
                                              const Dimensions& dims);

struct RemainingFacts {
  std::vector<FactUsabilityQueryRow> usability_queries;        // F-CE-3
  std::vector<FactActivationFailureRow> activation_failures;   // F-CE-4
  std::vector<FactEarlyLifeFaultRow> early_life_faults;        // F-CE-4b
  std::vector<FactReworkRow> rework;                           // F-OE-3a
  std::vector<FactReworkHandlingRow> rework_handling;          // F-OE-3b
  std::vector<FactPendingErrorFixRow> pending_error_fix;       // F-OE-3d
};

RemainingFacts transform_remaining_facts(const SourceDataset& dataset,
                                         const Dimensions& dims);

// Full in-memory transform: dimensions, then the fact tables (concurrently
// when `parallel_facts`).
MartSnapshot build_mart(const SourceDataset& dataset, bool parallel_facts = false);

struct PipelineConfig {
  std::filesystem::path source_dir;
  std::filesystem::path mart_dir;
  bool parallel_facts = false;
};

struct RunSummary {
  std::vector<std::pair<std::string, std::size_t>> rows_read;     // per source table
  std::vector<std::pair<std::string, std::size_t>> rows_written;  // per mart table
  std::string to_text() const;
};

struct PipelineResult {
  MartSnapshot mart;
  RunSummary summary;
};

// Thrown by run_pipeline when the source fails validation; nothing is
// written in that case.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// load -> validate -> transform -> write mart + run_summary.txt. Re-running
// on the same input produces byte-identical output.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace otp
