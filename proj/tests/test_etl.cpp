#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "otpmart/datagen.hpp"
#include "otpmart/errors.hpp"
#include "otpmart/etl.hpp"
#include "test_util.hpp"

using namespace otp;
using testutil::TempDir;
using testutil::ts;

namespace {

// One fully specified chain: CO 00:00 Jan1 .. 00:00 Jan4, SO 12:00 Jan1 ..
// 12:00 Jan3, RO 00:00 Jan2 .. 00:00 Jan3. Blocks: 0.5, 0.5, 1, 0.5, 0.5.
SourceDataset forced_chain_dataset() {
  SourceDataset ds;
  ds.customers = {{"C1", "consumer"}};
  ds.places = {{"P1", "north"}};

  CustomerOrder co;
  co.customer_order_id = "CO1";
  co.chain_id = "CH1";
  co.customer_ref = "C1";
  co.place_ref = "P1";
  co.interaction_date = ts("2024-01-01T00:00:00Z");
  co.interaction_date_complete = ts("2024-01-04T00:00:00Z");
  co.delivery_date = ts("2024-01-04T00:00:00Z");
  co.due_date = ts("2024-01-06T00:00:00Z");
  co.customer_required_date = ts("2024-01-05T00:00:00Z");
  ds.customer_orders = {co};

  ServiceOrder so;
  so.service_order_id = "SO1";
  so.chain_id = "CH1";
  so.interaction_date = ts("2024-01-01T12:00:00Z");
  so.interaction_date_complete = ts("2024-01-03T12:00:00Z");
  so.due_date = ts("2024-01-05T00:00:00Z");
  so.customer_required_date = ts("2024-01-04T00:00:00Z");
  ds.service_orders = {so};

  ResourceOrder ro;
  ro.resource_order_id = "RO1";
  ro.chain_id = "CH1";
  ro.interaction_date = ts("2024-01-02T00:00:00Z");
  ro.interaction_date_complete = ts("2024-01-03T00:00:00Z");
  ro.due_date = ts("2024-01-05T00:00:00Z");
  ro.customer_required_date = ts("2024-01-04T00:00:00Z");
  ds.resource_orders = {ro};
  return ds;
}

}  // namespace

TEST_CASE("associations: empty dataset yields empty tables") {
  const AssociationTables t = derive_associations(SourceDataset{});
  CHECK(t.business_interaction_role.empty());
  CHECK(t.business_interaction_role_involves_party_role.empty());
}

TEST_CASE("associations: one order joins back to its customer") {
  const SourceDataset ds = forced_chain_dataset();
  const AssociationTables t = derive_associations(ds);
  REQUIRE(t.business_interaction_role.size() == 1);
  REQUIRE(t.business_interaction_role_involves_party_role.size() == 1);
  CHECK(t.business_interaction_role[0].interaction_id == "CO1");
  CHECK(t.business_interaction_role[0].role_id ==
        t.business_interaction_role_involves_party_role[0].role_id);
  CHECK(t.business_interaction_role_involves_party_role[0].party_role_id == "C1");
}

TEST_CASE("associations: joined pairs equal direct customerRef pairs") {
  const SourceDataset ds = generate(testutil::gen_config(17, 100));
  const AssociationTables t = derive_associations(ds);

  std::map<std::string, std::string> party_of_role;
  for (const auto& r : t.business_interaction_role_involves_party_role) {
    party_of_role[r.role_id] = r.party_role_id;
  }
  std::set<std::pair<std::string, std::string>> joined;
  for (const auto& r : t.business_interaction_role) {
    joined.emplace(r.interaction_id, party_of_role.at(r.role_id));
  }
  std::set<std::pair<std::string, std::string>> direct;
  for (const auto& o : ds.customer_orders) {
    direct.emplace(o.customer_order_id, o.customer_ref);
  }
  CHECK(joined == direct);
}

TEST_CASE("dimensions: one calendar date yields one DimTime row") {
  SourceDataset ds;
  ds.customers = {{"C1", "consumer"}};
  ds.places = {{"P1", "north"}};
  CustomerOrder co;
  co.customer_order_id = "CO1";
  co.chain_id = "CH1";
  co.customer_ref = "C1";
  co.place_ref = "P1";
  co.interaction_date = ts("2024-01-15T08:00:00Z");
  co.due_date = ts("2024-01-15T18:00:00Z");
  co.customer_required_date = ts("2024-01-15T12:00:00Z");
  ds.customer_orders = {co};

  const Dimensions dims = build_dimensions(ds);
  REQUIRE(dims.time.size() == 1);
  CHECK(dims.time[0].time_key == 20240115);
  CHECK(dims.time[0].day == 15);
  CHECK(dims.time[0].month == 1);
  CHECK(dims.time[0].year == 2024);
}

TEST_CASE("dimensions: surrogate keys follow sorted natural keys") {
  SourceDataset ds;
  ds.customers = {{"C2", "largeenterprise"}, {"C1", "consumer"}};
  const Dimensions dims = build_dimensions(ds);
  REQUIRE(dims.customer.size() == 2);
  CHECK(dims.customer[0].customer_key == 1);
  CHECK(dims.customer[0].customer_id == "C1");
  CHECK(dims.customer[1].customer_key == 2);
  CHECK(dims.customer[1].customer_id == "C2");
  CHECK(dims.customer_key("C1") == 1);
  CHECK(dims.customer_key("C2") == 2);
  CHECK(dims.customer_key("nope") == 0);
}

TEST_CASE("dimensions: row counts equal distinct value counts in source") {
  const SourceDataset ds = generate(testutil::gen_config(42, 120));
  const Dimensions dims = build_dimensions(ds);

  std::set<int> distinct_dates;
  const auto note = [&](const std::optional<Timestamp>& t) {
    if (t) distinct_dates.insert(t->time_key());
  };
  for (const auto& o : ds.customer_orders) {
    distinct_dates.insert(o.interaction_date.time_key());
    distinct_dates.insert(o.due_date.time_key());
    distinct_dates.insert(o.customer_required_date.time_key());
    note(o.interaction_date_complete);
    note(o.delivery_date);
  }
  for (const auto& o : ds.service_orders) {
    distinct_dates.insert(o.interaction_date.time_key());
    distinct_dates.insert(o.due_date.time_key());
    distinct_dates.insert(o.customer_required_date.time_key());
    note(o.interaction_date_complete);
    note(o.delivery_date);
  }
  for (const auto& o : ds.resource_orders) {
    distinct_dates.insert(o.interaction_date.time_key());
    distinct_dates.insert(o.due_date.time_key());
    distinct_dates.insert(o.customer_required_date.time_key());
    note(o.interaction_date_complete);
    note(o.delivery_date);
  }
  for (const auto& p : ds.service_problems) distinct_dates.insert(p.time_raised.time_key());
  for (const auto& t : ds.trouble_tickets) {
    distinct_dates.insert(t.trouble_detection_date.time_key());
    distinct_dates.insert(t.interaction_date.time_key());
    note(t.service_restored_date);
    note(t.interaction_date_complete);
  }
  for (const auto& q : ds.customer_inquiries) {
    distinct_dates.insert(q.interaction_date.time_key());
  }

  CHECK(dims.time.size() == distinct_dates.size());
  CHECK(dims.customer.size() == ds.customers.size());
  CHECK(dims.place.size() == ds.places.size());
  CHECK(dims.service.size() == ds.services.size());
  CHECK(dims.service_problem.size() == ds.service_problems.size());
}

TEST_CASE("order facts: duration, delay, on-time and flags") {
  SourceDataset ds = forced_chain_dataset();
  // start Jan1 00:00, complete Jan4 12:00 -> 3.5 days
  ds.customer_orders[0].interaction_date_complete = ts("2024-01-04T12:00:00Z");
  ds.customer_orders[0].delivery_date = ts("2024-01-06T00:00:00Z");  // = dueDate
  const Dimensions dims = build_dimensions(ds);
  const auto rows = transform_order_facts(ds, dims, derive_associations(ds));
  REQUIRE(rows.size() == 1);
  const auto& f = rows[0];
  CHECK(f.customer_order_id == "CO1");
  CHECK(f.customer_key == 1);
  REQUIRE(f.order_duration_secs.has_value());
  CHECK(seconds_to_days(*f.order_duration_secs) == doctest::Approx(3.5).epsilon(1e-12));
  // dueDate Jan6 - customerRequiredDate Jan5 = 1 day
  REQUIRE(f.order_delay_secs.has_value());
  CHECK(*f.order_delay_secs == 86400);
  // delivery == due counts as on time
  REQUIRE(f.on_time_flag.has_value());
  CHECK(*f.on_time_flag == 1);
  CHECK(f.completed_flag == 1);
  CHECK(f.delivered_flag == 1);
  CHECK(f.completion_time_key == 20240104);
  CHECK(f.due_time_key == 20240106);
  CHECK(f.delivery_time_key == 20240106);
}

TEST_CASE("order facts: late delivery is not on time") {
  SourceDataset ds = forced_chain_dataset();
  ds.customer_orders[0].delivery_date = ts("2024-01-06T00:00:01Z");  // 1s past due
  const Dimensions dims = build_dimensions(ds);
  const auto rows = transform_order_facts(ds, dims, derive_associations(ds));
  REQUIRE(rows[0].on_time_flag.has_value());
  CHECK(*rows[0].on_time_flag == 0);
}

TEST_CASE("order facts: open order has absent duration and flag") {
  SourceDataset ds = forced_chain_dataset();
  ds.customer_orders[0].interaction_date_complete = std::nullopt;
  ds.customer_orders[0].delivery_date = std::nullopt;
  const Dimensions dims = build_dimensions(ds);
  const auto rows = transform_order_facts(ds, dims, derive_associations(ds));
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].order_duration_secs.has_value());
  CHECK_FALSE(rows[0].on_time_flag.has_value());
  CHECK(rows[0].completed_flag == 0);
  CHECK(rows[0].delivered_flag == 0);
  CHECK(rows[0].completion_time_key == 0);
  CHECK(rows[0].delivery_time_key == 0);
}

TEST_CASE("meta-process facts: degenerate chain yields zeros") {
  SourceDataset ds = forced_chain_dataset();
  const Timestamp t0 = ts("2024-01-01T00:00:00Z");
  auto& co = ds.customer_orders[0];
  auto& so = ds.service_orders[0];
  auto& ro = ds.resource_orders[0];
  co.interaction_date = so.interaction_date = ro.interaction_date = t0;
  co.interaction_date_complete = so.interaction_date_complete =
      ro.interaction_date_complete = t0;
  co.delivery_date = t0;

  const Dimensions dims = build_dimensions(ds);
  const MetaProcessFacts facts = transform_meta_process_facts(ds, dims);
  REQUIRE(facts.order_to_activation.size() == 1);
  for (auto s : facts.order_to_activation[0].mp_secs) CHECK(s == 0);
  CHECK(facts.order_to_activation[0].total_secs == 0);
}

TEST_CASE("meta-process facts: forced arithmetic over the five blocks") {
  const SourceDataset ds = forced_chain_dataset();
  const Dimensions dims = build_dimensions(ds);
  const MetaProcessFacts facts = transform_meta_process_facts(ds, dims);
  REQUIRE(facts.order_to_activation.size() == 1);
  const auto& f = facts.order_to_activation[0];
  const double expected[5] = {0.5, 0.5, 1.0, 0.5, 0.5};
  for (int i = 0; i < 5; ++i) {
    CHECK(seconds_to_days(f.mp_secs[std::size_t(i)]) ==
          doctest::Approx(expected[i]).epsilon(1e-12));
  }
  CHECK(seconds_to_days(f.total_secs) == doctest::Approx(3.0).epsilon(1e-12));

  REQUIRE(facts.activation_by_process.size() == 5);
  for (int b = 1; b <= 5; ++b) {
    const auto& row = facts.activation_by_process[std::size_t(b - 1)];
    CHECK(row.block_id == b);
    CHECK(row.duration_secs == f.mp_secs[std::size_t(b - 1)]);
    CHECK(row.chain_id == "CH1");
  }
}

TEST_CASE("meta-process facts: telescoping identity on generated chains") {
  const SourceDataset ds = generate(testutil::gen_config(42, 250));
  const Dimensions dims = build_dimensions(ds);
  const MetaProcessFacts facts = transform_meta_process_facts(ds, dims);

  std::map<std::string, const CustomerOrder*> co_by_chain;
  for (const auto& o : ds.customer_orders) co_by_chain[o.chain_id] = &o;
  REQUIRE_FALSE(facts.order_to_activation.empty());
  for (const auto& f : facts.order_to_activation) {
    std::int64_t sum = 0;
    for (auto s : f.mp_secs) sum += s;
    REQUIRE(f.total_secs == sum);
    const auto* co = co_by_chain.at(f.chain_id);
    REQUIRE(f.total_secs == *co->interaction_date_complete - co->interaction_date);
  }
}

TEST_CASE("incomplete chains produce no meta-process rows") {
  SourceDataset ds = forced_chain_dataset();
  ds.resource_orders[0].interaction_date_complete = std::nullopt;
  const Dimensions dims = build_dimensions(ds);
  const MetaProcessFacts facts = transform_meta_process_facts(ds, dims);
  CHECK(facts.order_to_activation.empty());
  CHECK(facts.activation_by_process.empty());
}

TEST_CASE("remaining facts: ticket resolution arithmetic") {
  SourceDataset ds = forced_chain_dataset();
  ds.trouble_tickets.push_back({"TT1", "CH1", LinkedOrderKind::kServiceOrder, "Closed",
                                ts("2024-01-01T00:00:00Z"), ts("2024-01-02T06:00:00Z"),
                                ts("2024-01-01T00:00:00Z"), ts("2024-01-02T06:00:00Z")});
  const Dimensions dims = build_dimensions(ds);
  const RemainingFacts facts = transform_remaining_facts(ds, dims);
  REQUIRE(facts.rework_handling.size() == 1);
  REQUIRE(facts.rework_handling[0].resolution_secs.has_value());
  CHECK(seconds_to_days(*facts.rework_handling[0].resolution_secs) ==
        doctest::Approx(1.25).epsilon(1e-12));
  CHECK(facts.rework_handling[0].restored_time_key == 20240102);
}

TEST_CASE("remaining facts: the 28th day still counts as an early-life fault") {
  SourceDataset ds = forced_chain_dataset();
  // delivery Jan4 00:00; problem raised exactly 28 days later
  ds.service_problems.push_back({"SP1", "CH1", "NMS", "equipment fault", "network alarm",
                                 ts("2024-02-01T00:00:00Z")});
  const Dimensions dims = build_dimensions(ds);
  const RemainingFacts facts = transform_remaining_facts(ds, dims);
  REQUIRE(facts.early_life_faults.size() == 1);
  CHECK(facts.early_life_faults[0].early_fault_flag == 1);

  // one second past the window no longer counts
  ds.service_problems[0].time_raised = ts("2024-02-01T00:00:01Z");
  const RemainingFacts facts2 = transform_remaining_facts(ds, build_dimensions(ds));
  CHECK(facts2.early_life_faults[0].early_fault_flag == 0);

  // a problem raised before delivery does not count either
  ds.service_problems[0].time_raised = ts("2024-01-03T23:59:59Z");
  const RemainingFacts facts3 = transform_remaining_facts(ds, build_dimensions(ds));
  CHECK(facts3.early_life_faults[0].early_fault_flag == 0);
}

TEST_CASE("remaining facts: rework flags match a direct scan") {
  const SourceDataset ds = generate(testutil::gen_config(42, 200));
  const RemainingFacts facts = transform_remaining_facts(ds, build_dimensions(ds));
  std::size_t expected = 0;
  for (const auto& o : ds.service_orders) {
    if (o.rework_no > 0) ++expected;
  }
  std::size_t flagged = 0;
  for (const auto& f : facts.rework) flagged += std::size_t(f.rework_flag);
  CHECK(facts.rework.size() == ds.service_orders.size());
  CHECK(flagged == expected);
}

TEST_CASE("remaining facts: activation failure conjunction") {
  SourceDataset ds = forced_chain_dataset();
  ds.services.push_back({"CFS1", "CH1", "broadband", kCfsStatusFailed, false, false});
  // reason matches but alert does not: not a qualifying failure
  ds.service_problems.push_back({"SP1", "CH1", "NMS",
                                 std::string(kReasonActivationFailure), "network alarm",
                                 ts("2024-01-02T00:00:00Z")});
  RemainingFacts facts = transform_remaining_facts(ds, build_dimensions(ds));
  REQUIRE(facts.activation_failures.size() == 1);
  CHECK(facts.activation_failures[0].failed_flag == 0);

  ds.service_problems.push_back({"SP2", "CH1", "NMS",
                                 std::string(kReasonActivationFailure),
                                 std::string(kFirstAlertCustomerReport),
                                 ts("2024-01-03T00:00:00Z")});
  facts = transform_remaining_facts(ds, build_dimensions(ds));
  CHECK(facts.activation_failures[0].failed_flag == 1);
  CHECK(facts.activation_failures[0].time_key == 20240103);
  CHECK(facts.activation_failures[0].sp_key != 0);
}

TEST_CASE("remaining facts: pending flag on customer-order tickets") {
  SourceDataset ds = forced_chain_dataset();
  ds.trouble_tickets.push_back({"TT1", "CH1", LinkedOrderKind::kCustomerOrder,
                                std::string(kTicketStatePending),
                                ts("2024-01-02T00:00:00Z"), std::nullopt,
                                ts("2024-01-02T00:00:00Z"), std::nullopt});
  ds.trouble_tickets.push_back({"TT2", "CH1", LinkedOrderKind::kCustomerOrder, "Closed",
                                ts("2024-01-02T00:00:00Z"), ts("2024-01-03T00:00:00Z"),
                                ts("2024-01-02T00:00:00Z"), ts("2024-01-03T00:00:00Z")});
  const RemainingFacts facts = transform_remaining_facts(ds, build_dimensions(ds));
  REQUIRE(facts.pending_error_fix.size() == 2);
  CHECK(facts.pending_error_fix[0].pending_flag == 1);
  CHECK(facts.pending_error_fix[1].pending_flag == 0);
}

TEST_CASE("run_pipeline on an empty source writes an empty mart") {
  TempDir src, mart;
  write_source(SourceDataset{}, src.path());
  const PipelineResult result = run_pipeline({src.path(), mart.path(), false});
  for (const auto& [table, n] : result.summary.rows_read) {
    CAPTURE(table);
    CHECK(n == 0);
  }
  for (const auto& [table, n] : result.summary.rows_written) {
    CAPTURE(table);
    CHECK(n == 0);
  }
  CHECK(std::filesystem::exists(mart / "run_summary.txt"));
}

TEST_CASE("run_pipeline is idempotent byte for byte") {
  TempDir src, mart;
  write_source(generate(testutil::gen_config(42, 100)), src.path());
  run_pipeline({src.path(), mart.path(), false});
  const auto first = testutil::dir_contents(mart.path());
  run_pipeline({src.path(), mart.path(), false});
  CHECK(testutil::dir_contents(mart.path()) == first);
}

TEST_CASE("run_pipeline row conservation at 1000 orders") {
  TempDir src, mart;
  const SourceDataset ds = generate(testutil::gen_config(42, 1000));
  write_source(ds, src.path());
  const PipelineResult result = run_pipeline({src.path(), mart.path(), false});
  CHECK(result.mart.fact_order_fulfillment.size() == 1000);
  CHECK(result.mart.fact_early_life_faults.size() == 1000);
  CHECK(result.mart.fact_rework.size() == 1000);

  std::size_t complete_chains = result.mart.fact_order_to_activation.size();
  CHECK(result.mart.fact_activation_by_process.size() == 5 * complete_chains);

  std::size_t co_tickets = 0;
  for (const auto& t : ds.trouble_tickets) {
    if (t.linked_order_kind == LinkedOrderKind::kCustomerOrder) ++co_tickets;
  }
  CHECK(result.mart.fact_pending_error_fix.size() == co_tickets);
}

TEST_CASE("validation failures abort the pipeline before any write") {
  TempDir src, mart;
  SourceDataset ds = forced_chain_dataset();
  ds.customer_orders[0].customer_ref = "missing";
  write_source(ds, src.path());
  CHECK_THROWS_AS(run_pipeline({src.path(), mart.path(), false}), ValidationError);
  CHECK_FALSE(std::filesystem::exists(mart / "dim_time.csv"));
}

TEST_CASE("parallel and sequential transforms agree byte for byte") {
  const SourceDataset ds = generate(testutil::gen_config(13, 300));
  TempDir a, b;
  write_mart(build_mart(ds, false), a.path());
  write_mart(build_mart(ds, true), b.path());
  CHECK(testutil::dir_contents(a.path()) == testutil::dir_contents(b.path()));
}

TEST_CASE("customer attribution matches between join path and direct refs") {
  const SourceDataset ds = generate(testutil::gen_config(23, 150));
  const Dimensions dims = build_dimensions(ds);
  const auto rows = transform_order_facts(ds, dims, derive_associations(ds));
  std::map<std::string, const CustomerOrder*> co_by_id;
  for (const auto& o : ds.customer_orders) co_by_id[o.customer_order_id] = &o;
  for (const auto& f : rows) {
    const auto* co = co_by_id.at(f.customer_order_id);
    REQUIRE(f.customer_key == dims.customer_key(co->customer_ref));
  }
}

TEST_CASE("identical source and mart directories are rejected") {
  TempDir dir;
  CHECK_THROWS_AS(run_pipeline({dir.path(), dir.path(), false}), ConfigError);
}
