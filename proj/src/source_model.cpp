#include "otpmart/source_model.hpp"

#include <unordered_map>
#include <unordered_set>

#include "otpmart/csv.hpp"
#include "otpmart/errors.hpp"

namespace otp {

namespace {

std::vector<std::string_view> cols(std::initializer_list<std::string_view> c) {
  return {c};
}

// A cursor over one parsed CSV data row with typed field access.
class RowReader {
 public:
  RowReader(const CsvRow& row, const SourceFileInfo& info) : row_(row) {
    if (row.size() != info.columns.size()) {
      throw ParseError("expected " + std::to_string(info.columns.size()) +
                       " fields, got " + std::to_string(row.size()));
    }
  }

  const std::string& str(std::size_t i) const { return row_[i]; }

  Timestamp ts(std::size_t i) const { return Timestamp::parse(row_[i]); }

  std::optional<Timestamp> opt_ts(std::size_t i) const {
    if (row_[i].empty()) return std::nullopt;
    return Timestamp::parse(row_[i]);
  }

  int count(std::size_t i) const {
    const long long v = parse_int_field(row_[i]);
    if (v < 0) throw ParseError("negative count '" + row_[i] + "'");
    return int(v);
  }

  int code(std::size_t i) const { return int(parse_int_field(row_[i])); }

  bool flag(std::size_t i) const {
    if (row_[i] == "1") return true;
    if (row_[i] == "0") return false;
    throw ParseError("flag field must be 0 or 1, got '" + row_[i] + "'");
  }

 private:
  const CsvRow& row_;
};

class IssueList {
 public:
  void add(const std::string& file, std::size_t line, const std::string& msg) {
    issues_.push_back(file + ":" + std::to_string(line) + ": " + msg);
  }

  void check_unique(const std::string& file, std::size_t line,
                    const std::string& what, const std::string& id) {
    auto [it, inserted] = first_line_.try_emplace(file + "\x1f" + id, line);
    if (!inserted) {
      issues_.push_back(file + ": duplicate " + what + " '" + id + "' at lines " +
                        std::to_string(it->second) + " and " + std::to_string(line));
    }
  }

  void raise_if_any() const {
    if (!issues_.empty()) {
      throw LoadError("source load failed with " + std::to_string(issues_.size()) +
                          " issue(s)",
                      issues_);
    }
  }

 private:
  std::vector<std::string> issues_;
  std::unordered_map<std::string, std::size_t> first_line_;
};

// Reads one CSV, verifies the header, and feeds data rows to `parse_row`.
template <typename ParseRow>
void load_table(const std::filesystem::path& dir, const SourceFileInfo& info,
                IssueList& issues, ParseRow parse_row) {
  const auto path = dir / info.file_name;
  if (!std::filesystem::exists(path)) {
    throw IoError("missing source file " + path.string());
  }
  const auto rows = csv_read_file(path);
  const std::string file{info.file_name};
  if (rows.empty()) {
    issues.add(file, 1, "missing header row");
    return;
  }
  CsvRow expected;
  for (auto c : info.columns) expected.emplace_back(c);
  if (rows[0] != expected) {
    issues.add(file, 1, "bad header, expected '" + csv_format_row(expected) + "'");
    return;
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    try {
      RowReader r(rows[i], info);
      parse_row(r, i + 1);
    } catch (const ParseError& e) {
      issues.add(file, i + 1, e.what());
    }
  }
}

}  // namespace

std::string_view to_string(LinkedOrderKind kind) {
  return kind == LinkedOrderKind::kCustomerOrder ? "customer-order" : "service-order";
}

LinkedOrderKind linked_order_kind_from_string(const std::string& s) {
  if (s == "customer-order") return LinkedOrderKind::kCustomerOrder;
  if (s == "service-order") return LinkedOrderKind::kServiceOrder;
  throw ParseError("unknown linkedOrderKind '" + s + "'");
}

const std::vector<SourceFileInfo>& source_files() {
  static const std::vector<SourceFileInfo> files = {
      {"customers.csv", cols({"customerId", "partyRoleName"})},
      {"places.csv", cols({"placeId", "geographicArea"})},
      {"customer_orders.csv",
       cols({"customerOrderId", "chainId", "customerRef", "placeRef",
             "interactionDate", "interactionDateComplete", "deliveryDate",
             "dueDate", "customerRequiredDate", "reworkNo"})},
      {"service_orders.csv",
       cols({"serviceOrderId", "chainId", "interactionDate",
             "interactionDateComplete", "dueDate", "customerRequiredDate",
             "deliveryDate", "reworkNo"})},
      {"resource_orders.csv",
       cols({"resourceOrderId", "chainId", "interactionDate",
             "interactionDateComplete", "dueDate", "customerRequiredDate",
             "deliveryDate", "reworkNo"})},
      {"cfs.csv",
       cols({"cfsId", "chainId", "serviceComponent", "cfsStatus",
             "isServiceEnabled", "hasStarted"})},
      {"service_problems.csv",
       cols({"serviceProblemId", "chainId", "originatingSystem", "reason",
             "firstAlert", "timeRaised"})},
      {"trouble_tickets.csv",
       cols({"troubleTicketId", "chainId", "linkedOrderKind",
             "troubleTicketState", "troubleDetectionDate", "serviceRestoredDate",
             "interactionDate", "interactionDateComplete"})},
      {"customer_inquiries.csv",
       cols({"customerInquiryId", "customerRef", "inquiryType",
             "interactionDate"})},
  };
  return files;
}

SourceDataset load_source(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw IoError("source directory not found: " + directory.string());
  }
  const auto& files = source_files();
  SourceDataset ds;
  IssueList issues;

  load_table(directory, files[0], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("customers.csv", line, "customerId", r.str(0));
    ds.customers.push_back({r.str(0), r.str(1)});
  });
  load_table(directory, files[1], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("places.csv", line, "placeId", r.str(0));
    ds.places.push_back({r.str(0), r.str(1)});
  });
  load_table(directory, files[2], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("customer_orders.csv", line, "customerOrderId", r.str(0));
    ds.customer_orders.push_back({r.str(0), r.str(1), r.str(2), r.str(3), r.ts(4),
                                  r.opt_ts(5), r.opt_ts(6), r.ts(7), r.ts(8),
                                  r.count(9)});
  });
  load_table(directory, files[3], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("service_orders.csv", line, "serviceOrderId", r.str(0));
    ds.service_orders.push_back({r.str(0), r.str(1), r.ts(2), r.opt_ts(3), r.ts(4),
                                 r.ts(5), r.opt_ts(6), r.count(7)});
  });
  load_table(directory, files[4], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("resource_orders.csv", line, "resourceOrderId", r.str(0));
    ds.resource_orders.push_back({r.str(0), r.str(1), r.ts(2), r.opt_ts(3), r.ts(4),
                                  r.ts(5), r.opt_ts(6), r.count(7)});
  });
  load_table(directory, files[5], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("cfs.csv", line, "cfsId", r.str(0));
    ds.services.push_back(
        {r.str(0), r.str(1), r.str(2), r.code(3), r.flag(4), r.flag(5)});
  });
  load_table(directory, files[6], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("service_problems.csv", line, "serviceProblemId", r.str(0));
    ds.service_problems.push_back(
        {r.str(0), r.str(1), r.str(2), r.str(3), r.str(4), r.ts(5)});
  });
  load_table(directory, files[7], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("trouble_tickets.csv", line, "troubleTicketId", r.str(0));
    ds.trouble_tickets.push_back({r.str(0), r.str(1),
                                  linked_order_kind_from_string(r.str(2)), r.str(3),
                                  r.ts(4), r.opt_ts(5), r.ts(6), r.opt_ts(7)});
  });
  load_table(directory, files[8], issues, [&](const RowReader& r, std::size_t line) {
    issues.check_unique("customer_inquiries.csv", line, "customerInquiryId", r.str(0));
    ds.customer_inquiries.push_back({r.str(0), r.str(1), r.str(2), r.ts(3)});
  });

  issues.raise_if_any();
  return ds;
}

const std::array<std::string_view, 7>& validation_rules() {
  static const std::array<std::string_view, 7> rules = {
      kRuleDuplicateId,    kRuleTemporalOrder, kRuleDanglingRef, kRuleOrphanChain,
      kRuleDuplicateChain, kRuleEmptyField,    kRuleBadStatus,
  };
  return rules;
}

namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void violation(std::string_view entity, const std::string& id,
                 std::string_view rule, std::string detail) {
    report_.violations.push_back(
        {std::string(entity), id, std::string(rule), std::move(detail)});
  }

  void unique(std::string_view entity, const std::string& id) {
    if (!seen_[std::string(entity)].insert(id).second) {
      violation(entity, id, kRuleDuplicateId, "identifier occurs more than once");
    }
  }

  void non_empty(std::string_view entity, const std::string& id,
                 const std::string& value, std::string_view field) {
    if (value.empty()) {
      violation(entity, id, kRuleEmptyField, std::string(field) + " is empty");
    }
  }

  void ordered(std::string_view entity, const std::string& id, Timestamp earlier,
               std::optional<Timestamp> later, std::string_view what) {
    if (later && *later < earlier) {
      violation(entity, id, kRuleTemporalOrder, std::string(what));
    }
  }

 private:
  ValidationReport& report_;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen_;
};

}  // namespace

ValidationReport validate(const SourceDataset& ds) {
  ValidationReport report;
  Checker check(report);

  std::unordered_set<std::string> customer_ids, place_ids;
  for (const auto& c : ds.customers) customer_ids.insert(c.customer_id);
  for (const auto& p : ds.places) place_ids.insert(p.place_id);

  std::unordered_map<std::string, int> co_chains, so_chains, ro_chains;
  for (const auto& o : ds.customer_orders) ++co_chains[o.chain_id];
  for (const auto& o : ds.service_orders) ++so_chains[o.chain_id];
  for (const auto& o : ds.resource_orders) ++ro_chains[o.chain_id];

  const auto chain_of_co = [&](const std::string& chain) {
    return co_chains.find(chain) != co_chains.end();
  };

  for (const auto& c : ds.customers) {
    check.unique("customers", c.customer_id);
    check.non_empty("customers", c.customer_id, c.customer_id, "customerId");
    check.non_empty("customers", c.customer_id, c.party_role_name, "partyRoleName");
  }
  for (const auto& p : ds.places) {
    check.unique("places", p.place_id);
    check.non_empty("places", p.place_id, p.place_id, "placeId");
  }
  for (const auto& o : ds.customer_orders) {
    check.unique("customer_orders", o.customer_order_id);
    check.non_empty("customer_orders", o.customer_order_id, o.chain_id, "chainId");
    check.ordered("customer_orders", o.customer_order_id, o.interaction_date,
                  o.interaction_date_complete,
                  "interactionDateComplete before interactionDate");
    check.ordered("customer_orders", o.customer_order_id, o.interaction_date,
                  o.delivery_date, "deliveryDate before interactionDate");
    if (!customer_ids.count(o.customer_ref)) {
      check.violation("customer_orders", o.customer_order_id, kRuleDanglingRef,
                      "customerRef '" + o.customer_ref + "' does not resolve");
    }
    if (!place_ids.count(o.place_ref)) {
      check.violation("customer_orders", o.customer_order_id, kRuleDanglingRef,
                      "placeRef '" + o.place_ref + "' does not resolve");
    }
    if (!o.chain_id.empty() && co_chains[o.chain_id] > 1) {
      check.violation("customer_orders", o.customer_order_id, kRuleDuplicateChain,
                      "chainId '" + o.chain_id + "' has several customer orders");
    }
  }
  for (const auto& o : ds.service_orders) {
    check.unique("service_orders", o.service_order_id);
    check.non_empty("service_orders", o.service_order_id, o.chain_id, "chainId");
    check.ordered("service_orders", o.service_order_id, o.interaction_date,
                  o.interaction_date_complete,
                  "interactionDateComplete before interactionDate");
    check.ordered("service_orders", o.service_order_id, o.interaction_date,
                  o.delivery_date, "deliveryDate before interactionDate");
    if (!o.chain_id.empty() && !chain_of_co(o.chain_id)) {
      check.violation("service_orders", o.service_order_id, kRuleOrphanChain,
                      "chainId '" + o.chain_id + "' has no customer order");
    }
    if (!o.chain_id.empty() && so_chains[o.chain_id] > 1) {
      check.violation("service_orders", o.service_order_id, kRuleDuplicateChain,
                      "chainId '" + o.chain_id + "' has several service orders");
    }
  }
  for (const auto& o : ds.resource_orders) {
    check.unique("resource_orders", o.resource_order_id);
    check.non_empty("resource_orders", o.resource_order_id, o.chain_id, "chainId");
    check.ordered("resource_orders", o.resource_order_id, o.interaction_date,
                  o.interaction_date_complete,
                  "interactionDateComplete before interactionDate");
    check.ordered("resource_orders", o.resource_order_id, o.interaction_date,
                  o.delivery_date, "deliveryDate before interactionDate");
    if (!o.chain_id.empty() && !chain_of_co(o.chain_id)) {
      check.violation("resource_orders", o.resource_order_id, kRuleOrphanChain,
                      "chainId '" + o.chain_id + "' has no customer order");
    }
    if (!o.chain_id.empty() && ro_chains[o.chain_id] > 1) {
      check.violation("resource_orders", o.resource_order_id, kRuleDuplicateChain,
                      "chainId '" + o.chain_id + "' has several resource orders");
    }
  }
  for (const auto& s : ds.services) {
    check.unique("cfs", s.cfs_id);
    check.non_empty("cfs", s.cfs_id, s.chain_id, "chainId");
    if (s.cfs_status < 0 || s.cfs_status > kCfsStatusMax) {
      check.violation("cfs", s.cfs_id, kRuleBadStatus,
                      "cfsStatus " + std::to_string(s.cfs_status) +
                          " outside declared code set 0-" +
                          std::to_string(kCfsStatusMax));
    }
    if (!s.chain_id.empty() && !chain_of_co(s.chain_id)) {
      check.violation("cfs", s.cfs_id, kRuleOrphanChain,
                      "chainId '" + s.chain_id + "' has no customer order");
    }
  }
  for (const auto& p : ds.service_problems) {
    check.unique("service_problems", p.service_problem_id);
    check.non_empty("service_problems", p.service_problem_id, p.chain_id, "chainId");
    if (!p.chain_id.empty() && !chain_of_co(p.chain_id)) {
      check.violation("service_problems", p.service_problem_id, kRuleOrphanChain,
                      "chainId '" + p.chain_id + "' has no customer order");
    }
  }
  for (const auto& t : ds.trouble_tickets) {
    check.unique("trouble_tickets", t.trouble_ticket_id);
    check.non_empty("trouble_tickets", t.trouble_ticket_id, t.chain_id, "chainId");
    check.ordered("trouble_tickets", t.trouble_ticket_id, t.trouble_detection_date,
                  t.service_restored_date,
                  "serviceRestoredDate before troubleDetectionDate");
    check.ordered("trouble_tickets", t.trouble_ticket_id, t.interaction_date,
                  t.interaction_date_complete,
                  "interactionDateComplete before interactionDate");
    if (!t.chain_id.empty() && !chain_of_co(t.chain_id)) {
      check.violation("trouble_tickets", t.trouble_ticket_id, kRuleOrphanChain,
                      "chainId '" + t.chain_id + "' has no customer order");
    }
  }
  for (const auto& q : ds.customer_inquiries) {
    check.unique("customer_inquiries", q.customer_inquiry_id);
    if (!customer_ids.count(q.customer_ref)) {
      check.violation("customer_inquiries", q.customer_inquiry_id, kRuleDanglingRef,
                      "customerRef '" + q.customer_ref + "' does not resolve");
    }
  }
  return report;
}

}  // namespace otp
