#include "otpmart/etl.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include "otpmart/errors.hpp"

namespace otp {

namespace {

constexpr std::int64_t kEarlyFaultWindowSecs = 28 * kSecondsPerDay;

// Per-chain lookup over the source entities. Lists are sorted by id so
// "the chain's first problem/service" is deterministic; the oracle in the
// KPI engine follows the same convention.
struct ChainIndex {
  std::unordered_map<std::string, const CustomerOrder*> customer_order;
  std::unordered_map<std::string, const ServiceOrder*> service_order;
  std::unordered_map<std::string, const ResourceOrder*> resource_order;
  std::unordered_map<std::string, std::vector<const CustomerFacingService*>> services;
  std::unordered_map<std::string, std::vector<const ServiceProblem*>> problems;

  static ChainIndex build(const SourceDataset& ds) {
    ChainIndex idx;
    for (const auto& o : ds.customer_orders) idx.customer_order[o.chain_id] = &o;
    for (const auto& o : ds.service_orders) idx.service_order[o.chain_id] = &o;
    for (const auto& o : ds.resource_orders) idx.resource_order[o.chain_id] = &o;
    for (const auto& s : ds.services) idx.services[s.chain_id].push_back(&s);
    for (const auto& p : ds.service_problems) idx.problems[p.chain_id].push_back(&p);
    for (auto& [_, v] : idx.services) {
      std::sort(v.begin(), v.end(),
                [](auto* a, auto* b) { return a->cfs_id < b->cfs_id; });
    }
    for (auto& [_, v] : idx.problems) {
      std::sort(v.begin(), v.end(), [](auto* a, auto* b) {
        return a->service_problem_id < b->service_problem_id;
      });
    }
    return idx;
  }

  const CustomerOrder* co(const std::string& chain) const {
    auto it = customer_order.find(chain);
    return it == customer_order.end() ? nullptr : it->second;
  }
  const ServiceOrder* so(const std::string& chain) const {
    auto it = service_order.find(chain);
    return it == service_order.end() ? nullptr : it->second;
  }
  const ResourceOrder* ro(const std::string& chain) const {
    auto it = resource_order.find(chain);
    return it == resource_order.end() ? nullptr : it->second;
  }
  const CustomerFacingService* first_service(const std::string& chain) const {
    auto it = services.find(chain);
    return it == services.end() || it->second.empty() ? nullptr : it->second.front();
  }
  const std::vector<const ServiceProblem*>* chain_problems(const std::string& chain) const {
    auto it = problems.find(chain);
    return it == problems.end() ? nullptr : &it->second;
  }
  const ServiceProblem* first_problem(const std::string& chain) const {
    auto* v = chain_problems(chain);
    return v && !v->empty() ? v->front() : nullptr;
  }
  // First problem matching the activation-failure conjunction.
  const ServiceProblem* qualifying_problem(const std::string& chain) const {
    auto* v = chain_problems(chain);
    if (!v) return nullptr;
    for (const auto* p : *v) {
      if (p->reason == kReasonActivationFailure &&
          p->first_alert == kFirstAlertCustomerReport) {
        return p;
      }
    }
    return nullptr;
  }

  int customer_key_of_chain(const std::string& chain, const Dimensions& dims) const {
    const auto* order = co(chain);
    return order ? dims.customer_key(order->customer_ref) : 0;
  }
};

int key_of(std::optional<Timestamp> t) { return t ? t->time_key() : 0; }

}  // namespace

AssociationTables derive_associations(const SourceDataset& ds) {
  AssociationTables t;
  for (const auto& o : ds.customer_orders) {
    const std::string role_id = "BIR-" + o.customer_order_id;
    t.business_interaction_role.push_back({role_id, o.customer_order_id});
    t.business_interaction_role_involves_party_role.push_back(
        {role_id, o.customer_ref});
  }
  return t;
}

int Dimensions::customer_key(const std::string& id) const {
  auto it = customer_keys_.find(id);
  return it == customer_keys_.end() ? 0 : it->second;
}
int Dimensions::place_key(const std::string& id) const {
  auto it = place_keys_.find(id);
  return it == place_keys_.end() ? 0 : it->second;
}
int Dimensions::service_key(const std::string& id) const {
  auto it = service_keys_.find(id);
  return it == service_keys_.end() ? 0 : it->second;
}
int Dimensions::service_problem_key(const std::string& id) const {
  auto it = problem_keys_.find(id);
  return it == problem_keys_.end() ? 0 : it->second;
}

void Dimensions::build_lookups() {
  customer_keys_.clear();
  place_keys_.clear();
  service_keys_.clear();
  problem_keys_.clear();
  for (const auto& r : customer) customer_keys_[r.customer_id] = r.customer_key;
  for (const auto& r : place) place_keys_[r.place_id] = r.place_key;
  for (const auto& r : service) service_keys_[r.cfs_id] = r.service_key;
  for (const auto& r : service_problem) problem_keys_[r.service_problem_id] = r.sp_key;
}

Dimensions build_dimensions(const SourceDataset& ds) {
  Dimensions dims;

  std::set<int> time_keys;
  const auto note = [&](const Timestamp& t) { time_keys.insert(t.time_key()); };
  const auto note_opt = [&](const std::optional<Timestamp>& t) {
    if (t) time_keys.insert(t->time_key());
  };
  for (const auto& o : ds.customer_orders) {
    note(o.interaction_date);
    note_opt(o.interaction_date_complete);
    note_opt(o.delivery_date);
    note(o.due_date);
    note(o.customer_required_date);
  }
  for (const auto& o : ds.service_orders) {
    note(o.interaction_date);
    note_opt(o.interaction_date_complete);
    note(o.due_date);
    note(o.customer_required_date);
    note_opt(o.delivery_date);
  }
  for (const auto& o : ds.resource_orders) {
    note(o.interaction_date);
    note_opt(o.interaction_date_complete);
    note(o.due_date);
    note(o.customer_required_date);
    note_opt(o.delivery_date);
  }
  for (const auto& p : ds.service_problems) note(p.time_raised);
  for (const auto& t : ds.trouble_tickets) {
    note(t.trouble_detection_date);
    note_opt(t.service_restored_date);
    note(t.interaction_date);
    note_opt(t.interaction_date_complete);
  }
  for (const auto& q : ds.customer_inquiries) note(q.interaction_date);

  for (int key : time_keys) {
    const CivilDate d = civil_from_time_key(key);
    dims.time.push_back({key, d.day, d.month, d.year});
  }

  std::vector<std::string> ids;
  const auto assign = [&](auto& out, auto make_row) {
    std::sort(ids.begin(), ids.end());
    int key = 0;
    for (const auto& id : ids) out.push_back(make_row(++key, id));
    ids.clear();
  };

  std::unordered_map<std::string, const Customer*> customers_by_id;
  for (const auto& c : ds.customers) {
    customers_by_id[c.customer_id] = &c;
    ids.push_back(c.customer_id);
  }
  assign(dims.customer, [&](int key, const std::string& id) {
    return DimCustomerRow{key, id, customers_by_id.at(id)->party_role_name};
  });

  std::unordered_map<std::string, const Place*> places_by_id;
  for (const auto& p : ds.places) {
    places_by_id[p.place_id] = &p;
    ids.push_back(p.place_id);
  }
  assign(dims.place, [&](int key, const std::string& id) {
    return DimPlaceRow{key, id, places_by_id.at(id)->geographic_area};
  });

  std::unordered_map<std::string, const CustomerFacingService*> services_by_id;
  for (const auto& s : ds.services) {
    services_by_id[s.cfs_id] = &s;
    ids.push_back(s.cfs_id);
  }
  assign(dims.service, [&](int key, const std::string& id) {
    const auto* s = services_by_id.at(id);
    return DimServiceRow{key, id, s->service_component, s->cfs_status};
  });

  std::unordered_map<std::string, const ServiceProblem*> problems_by_id;
  for (const auto& p : ds.service_problems) {
    problems_by_id[p.service_problem_id] = &p;
    ids.push_back(p.service_problem_id);
  }
  assign(dims.service_problem, [&](int key, const std::string& id) {
    const auto* p = problems_by_id.at(id);
    return DimServiceProblemRow{key, id, p->originating_system, p->reason};
  });

  dims.build_lookups();
  return dims;
}

std::vector<FactOrderFulfillmentRow> transform_order_facts(
    const SourceDataset& ds, const Dimensions& dims,
    const AssociationTables& associations) {
  // Join on customerOrderId -> role -> partyRole instead of reading
  // customerRef off the order; both paths must agree (tested).
  std::unordered_map<std::string, std::string> party_of_role;
  for (const auto& r : associations.business_interaction_role_involves_party_role) {
    party_of_role[r.role_id] = r.party_role_id;
  }
  std::unordered_map<std::string, std::string> customer_of_order;
  for (const auto& r : associations.business_interaction_role) {
    auto it = party_of_role.find(r.role_id);
    if (it != party_of_role.end()) customer_of_order[r.interaction_id] = it->second;
  }

  std::vector<FactOrderFulfillmentRow> rows;
  rows.reserve(ds.customer_orders.size());
  for (const auto& o : ds.customer_orders) {
    FactOrderFulfillmentRow f;
    f.customer_order_id = o.customer_order_id;
    auto it = customer_of_order.find(o.customer_order_id);
    f.customer_key = it == customer_of_order.end() ? 0 : dims.customer_key(it->second);
    f.completion_time_key = key_of(o.interaction_date_complete);
    f.due_time_key = o.due_date.time_key();
    f.delivery_time_key = key_of(o.delivery_date);
    if (o.interaction_date_complete) {
      f.order_duration_secs = *o.interaction_date_complete - o.interaction_date;
    }
    f.order_delay_secs = o.due_date - o.customer_required_date;
    if (o.delivery_date) {
      f.on_time_flag = *o.delivery_date <= o.due_date ? 1 : 0;  // ties are on time
    }
    f.completed_flag = o.interaction_date_complete ? 1 : 0;
    f.delivered_flag = o.delivery_date ? 1 : 0;
    rows.push_back(std::move(f));
  }
  return rows;
}

MetaProcessFacts transform_meta_process_facts(const SourceDataset& ds,
                                              const Dimensions& dims) {
  const auto idx = ChainIndex::build(ds);
  MetaProcessFacts out;
  for (const auto& co : ds.customer_orders) {
    const auto* so = idx.so(co.chain_id);
    const auto* ro = idx.ro(co.chain_id);
    if (!so || !ro) continue;
    if (!co.interaction_date_complete || !so->interaction_date_complete ||
        !ro->interaction_date_complete) {
      continue;
    }
    FactOrderToActivationRow f;
    f.chain_id = co.chain_id;
    f.customer_key = dims.customer_key(co.customer_ref);
    f.place_key = dims.place_key(co.place_ref);
    f.completion_time_key = co.interaction_date_complete->time_key();
    f.mp_secs[0] = so->interaction_date - co.interaction_date;
    f.mp_secs[1] = ro->interaction_date - so->interaction_date;
    f.mp_secs[2] = *ro->interaction_date_complete - ro->interaction_date;
    f.mp_secs[3] = *so->interaction_date_complete - *ro->interaction_date_complete;
    f.mp_secs[4] = *co.interaction_date_complete - *so->interaction_date_complete;
    f.total_secs = 0;
    for (auto s : f.mp_secs) f.total_secs += s;
    for (int b = 1; b <= 5; ++b) {
      out.activation_by_process.push_back({f.chain_id, f.customer_key,
                                           f.completion_time_key, b,
                                           f.mp_secs[std::size_t(b - 1)]});
    }
    out.order_to_activation.push_back(std::move(f));
  }
  return out;
}

namespace {

std::vector<FactUsabilityQueryRow> transform_usability_queries(
    const SourceDataset& ds, const Dimensions& dims, const ChainIndex& idx) {
  std::vector<FactUsabilityQueryRow> rows;
  for (const auto& q : ds.customer_inquiries) {
    if (q.inquiry_type != kInquiryTypeUsability) continue;
    rows.push_back({"inquiry", dims.customer_key(q.customer_ref), 0,
                    q.interaction_date.time_key(), 1});
  }
  for (const auto& s : ds.services) {
    if (s.cfs_status != kCfsStatusDelivered) continue;
    const auto* so = idx.so(s.chain_id);
    if (!so || !so->interaction_date_complete) continue;
    rows.push_back({"activation", idx.customer_key_of_chain(s.chain_id, dims),
                    dims.service_key(s.cfs_id),
                    so->interaction_date_complete->time_key(), 1});
  }
  return rows;
}

std::vector<FactActivationFailureRow> transform_activation_failures(
    const SourceDataset& ds, const Dimensions& dims, const ChainIndex& idx) {
  std::vector<FactActivationFailureRow> rows;
  for (const auto& s : ds.services) {
    FactActivationFailureRow f;
    f.service_key = dims.service_key(s.cfs_id);
    f.customer_key = idx.customer_key_of_chain(s.chain_id, dims);
    const auto* qualifying = idx.qualifying_problem(s.chain_id);
    const bool failed = s.cfs_status == kCfsStatusFailed && qualifying != nullptr;
    f.failed_flag = failed ? 1 : 0;
    f.delivered_flag = s.cfs_status == kCfsStatusDelivered ? 1 : 0;
    f.sp_key = failed ? dims.service_problem_key(qualifying->service_problem_id) : 0;
    if (failed) {
      f.time_key = qualifying->time_raised.time_key();
    } else {
      const auto* so = idx.so(s.chain_id);
      f.time_key = so && so->interaction_date_complete
                       ? so->interaction_date_complete->time_key()
                       : 0;
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

std::vector<FactEarlyLifeFaultRow> transform_early_life_faults(
    const SourceDataset& ds, const Dimensions& dims, const ChainIndex& idx) {
  std::vector<FactEarlyLifeFaultRow> rows;
  rows.reserve(ds.customer_orders.size());
  for (const auto& o : ds.customer_orders) {
    FactEarlyLifeFaultRow f;
    f.customer_order_id = o.customer_order_id;
    f.customer_key = dims.customer_key(o.customer_ref);
    const auto* cfs = idx.first_service(o.chain_id);
    f.service_key = cfs ? dims.service_key(cfs->cfs_id) : 0;
    f.completion_time_key = key_of(o.interaction_date_complete);
    f.early_fault_flag = 0;
    if (o.delivery_date) {
      if (const auto* problems = idx.chain_problems(o.chain_id)) {
        for (const auto* p : *problems) {
          const std::int64_t lag = p->time_raised - *o.delivery_date;
          if (lag >= 0 && lag <= kEarlyFaultWindowSecs) {  // day 28 still counts
            f.early_fault_flag = 1;
            break;
          }
        }
      }
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

std::vector<FactReworkRow> transform_rework(const SourceDataset& ds,
                                            const Dimensions& dims,
                                            const ChainIndex& idx) {
  std::vector<FactReworkRow> rows;
  rows.reserve(ds.service_orders.size());
  for (const auto& o : ds.service_orders) {
    const auto* problem = idx.first_problem(o.chain_id);
    const auto* cfs = idx.first_service(o.chain_id);
    rows.push_back({o.service_order_id,
                    problem ? dims.service_problem_key(problem->service_problem_id) : 0,
                    cfs ? dims.service_key(cfs->cfs_id) : 0,
                    key_of(o.interaction_date_complete), o.rework_no > 0 ? 1 : 0});
  }
  return rows;
}

std::vector<FactReworkHandlingRow> transform_rework_handling(
    const SourceDataset& ds, const Dimensions& dims, const ChainIndex& idx) {
  std::vector<FactReworkHandlingRow> rows;
  for (const auto& t : ds.trouble_tickets) {
    if (t.linked_order_kind != LinkedOrderKind::kServiceOrder) continue;
    FactReworkHandlingRow f;
    f.trouble_ticket_id = t.trouble_ticket_id;
    f.customer_key = idx.customer_key_of_chain(t.chain_id, dims);
    const auto* cfs = idx.first_service(t.chain_id);
    f.service_key = cfs ? dims.service_key(cfs->cfs_id) : 0;
    const auto* problem = idx.first_problem(t.chain_id);
    f.sp_key = problem ? dims.service_problem_key(problem->service_problem_id) : 0;
    f.restored_time_key = key_of(t.service_restored_date);
    if (t.service_restored_date) {
      f.resolution_secs = *t.service_restored_date - t.trouble_detection_date;
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

std::vector<FactPendingErrorFixRow> transform_pending_error_fix(
    const SourceDataset& ds, const Dimensions& dims, const ChainIndex& idx) {
  std::vector<FactPendingErrorFixRow> rows;
  for (const auto& t : ds.trouble_tickets) {
    if (t.linked_order_kind != LinkedOrderKind::kCustomerOrder) continue;
    const auto* cfs = idx.first_service(t.chain_id);
    rows.push_back({t.trouble_ticket_id, idx.customer_key_of_chain(t.chain_id, dims),
                    cfs ? dims.service_key(cfs->cfs_id) : 0,
                    t.trouble_detection_date.time_key(),
                    t.trouble_ticket_state == kTicketStatePending ? 1 : 0});
  }
  return rows;
}

}  // namespace

RemainingFacts transform_remaining_facts(const SourceDataset& ds,
                                         const Dimensions& dims) {
  const auto idx = ChainIndex::build(ds);
  RemainingFacts out;
  out.usability_queries = transform_usability_queries(ds, dims, idx);
  out.activation_failures = transform_activation_failures(ds, dims, idx);
  out.early_life_faults = transform_early_life_faults(ds, dims, idx);
  out.rework = transform_rework(ds, dims, idx);
  out.rework_handling = transform_rework_handling(ds, dims, idx);
  out.pending_error_fix = transform_pending_error_fix(ds, dims, idx);
  return out;
}

MartSnapshot build_mart(const SourceDataset& ds, bool parallel_facts) {
  const Dimensions dims = build_dimensions(ds);  // barrier
  const AssociationTables associations = derive_associations(ds);

  MartSnapshot mart;
  mart.dim_time = dims.time;
  mart.dim_customer = dims.customer;
  mart.dim_place = dims.place;
  mart.dim_service = dims.service;
  mart.dim_service_problem = dims.service_problem;

  if (parallel_facts) {
    const auto idx = ChainIndex::build(ds);
    auto f_orders = std::async(std::launch::async, [&] {
      return transform_order_facts(ds, dims, associations);
    });
    auto f_meta = std::async(std::launch::async,
                             [&] { return transform_meta_process_facts(ds, dims); });
    auto f_fce3 = std::async(std::launch::async,
                             [&] { return transform_usability_queries(ds, dims, idx); });
    auto f_fce4 = std::async(std::launch::async, [&] {
      return transform_activation_failures(ds, dims, idx);
    });
    auto f_fce4b = std::async(std::launch::async,
                              [&] { return transform_early_life_faults(ds, dims, idx); });
    auto f_foe3a =
        std::async(std::launch::async, [&] { return transform_rework(ds, dims, idx); });
    auto f_foe3b = std::async(std::launch::async,
                              [&] { return transform_rework_handling(ds, dims, idx); });
    auto f_foe3d = std::async(std::launch::async, [&] {
      return transform_pending_error_fix(ds, dims, idx);
    });
    mart.fact_order_fulfillment = f_orders.get();
    auto meta = f_meta.get();
    mart.fact_order_to_activation = std::move(meta.order_to_activation);
    mart.fact_activation_by_process = std::move(meta.activation_by_process);
    mart.fact_usability_queries = f_fce3.get();
    mart.fact_activation_failures = f_fce4.get();
    mart.fact_early_life_faults = f_fce4b.get();
    mart.fact_rework = f_foe3a.get();
    mart.fact_rework_handling = f_foe3b.get();
    mart.fact_pending_error_fix = f_foe3d.get();
  } else {
    mart.fact_order_fulfillment = transform_order_facts(ds, dims, associations);
    auto meta = transform_meta_process_facts(ds, dims);
    mart.fact_order_to_activation = std::move(meta.order_to_activation);
    mart.fact_activation_by_process = std::move(meta.activation_by_process);
    auto remaining = transform_remaining_facts(ds, dims);
    mart.fact_usability_queries = std::move(remaining.usability_queries);
    mart.fact_activation_failures = std::move(remaining.activation_failures);
    mart.fact_early_life_faults = std::move(remaining.early_life_faults);
    mart.fact_rework = std::move(remaining.rework);
    mart.fact_rework_handling = std::move(remaining.rework_handling);
    mart.fact_pending_error_fix = std::move(remaining.pending_error_fix);
  }
  return mart;
}

std::string RunSummary::to_text() const {
  std::ostringstream out;
  out << "source rows read\n";
  for (const auto& [table, n] : rows_read) out << "  " << table << " " << n << "\n";
  out << "mart rows written\n";
  for (const auto& [table, n] : rows_written) out << "  " << table << " " << n << "\n";
  return out.str();
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("source validation failed with " +
                         std::to_string(report.violations.size()) + " violation(s)"),
      report_(std::move(report)) {}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.source_dir == config.mart_dir) {
    throw ConfigError("source and mart directories must differ");
  }
  const SourceDataset ds = load_source(config.source_dir);
  ValidationReport report = validate(ds);
  if (!report.empty()) throw ValidationError(std::move(report));

  PipelineResult result;
  result.mart = build_mart(ds, config.parallel_facts);

  RunSummary& summary = result.summary;
  summary.rows_read = {
      {"customers", ds.customers.size()},
      {"places", ds.places.size()},
      {"customer_orders", ds.customer_orders.size()},
      {"service_orders", ds.service_orders.size()},
      {"resource_orders", ds.resource_orders.size()},
      {"cfs", ds.services.size()},
      {"service_problems", ds.service_problems.size()},
      {"trouble_tickets", ds.trouble_tickets.size()},
      {"customer_inquiries", ds.customer_inquiries.size()},
  };
  const FileManifest manifest = write_mart(result.mart, config.mart_dir);
  for (const auto& e : manifest.entries) {
    std::string table = e.file_name;
    if (table.size() > 4 && table.ends_with(".csv")) table.resize(table.size() - 4);
    summary.rows_written.emplace_back(table, e.rows);
  }

  std::ofstream out(config.mart_dir / "run_summary.txt",
                    std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + (config.mart_dir / "run_summary.txt").string());
  }
  out << summary.to_text();
  return result;
}

}  // namespace otp
