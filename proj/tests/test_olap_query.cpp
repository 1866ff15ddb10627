#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "otpmart/datagen.hpp"
#include "otpmart/errors.hpp"
#include "otpmart/etl.hpp"
#include "otpmart/olap_query.hpp"
#include "test_util.hpp"

using namespace otp;

TEST_CASE("query text parsing") {
  const Query q = Query::parse(
      "fact=fact_fce2abc;measure=mean(orderDurationDays);by=partyRoleName,month;"
      "filter=partyRoleName=consumer;level=month");
  CHECK(q.fact_table == "fact_fce2abc");
  REQUIRE(q.measures.size() == 1);
  CHECK(q.measures[0].field == "orderDurationDays");
  CHECK(q.measures[0].agg == Agg::kMean);
  CHECK(q.row_axis == std::vector<std::string>{"partyRoleName", "month"});
  REQUIRE(q.filters.size() == 1);
  CHECK(q.filters[0] == std::pair<std::string, std::string>{"partyRoleName", "consumer"});
  CHECK(q.time_level == TimeLevel::kMonth);

  CHECK_THROWS_AS(Query::parse("measure=sum(x)"), ParseError);          // no fact
  CHECK_THROWS_AS(Query::parse("fact=f"), ParseError);                  // no measure
  CHECK_THROWS_AS(Query::parse("fact=f;measure=max(x)"), ParseError);   // bad agg
  CHECK_THROWS_AS(Query::parse("fact=f;measure=sum(x);level=week"), ParseError);
  CHECK_THROWS_AS(Query::parse("fact=f;measure=sum(x);nope=1"), ParseError);
}

TEST_CASE("no axis yields a single grand-total row") {
  const SourceDataset ds = testutil::figure22_dataset();
  const MartSnapshot mart = build_mart(ds);
  Query q;
  q.fact_table = "fact_fce2abc";
  q.measures = {{"orderDurationDays", Agg::kSum}, {"orderDurationDays", Agg::kCount}};
  const ResultGrid grid = run_query(mart, q);
  REQUIRE(grid.rows.size() == 1);
  CHECK(grid.rows[0].axis.empty());
  CHECK(grid.rows[0].values[0] == doctest::Approx(8.5).epsilon(1e-12));
  CHECK(grid.rows[0].values[1] == 2);
}

TEST_CASE("mean by segment reproduces the worked means") {
  const SourceDataset ds = testutil::figure22_dataset();
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse(
      "fact=fact_fce2abc;measure=mean(orderDurationDays);by=partyRoleName");
  const ResultGrid grid = run_query(mart, q);
  REQUIRE(grid.rows.size() == 2);
  CHECK(grid.rows[0].axis[0] == "consumer");
  CHECK(grid.rows[0].values[0] == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(grid.rows[1].axis[0] == "largeenterprise");
  CHECK(grid.rows[1].values[0] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("monthly sums match direct scans of the fact table") {
  const SourceDataset ds = generate(testutil::gen_config(42, 300));
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse("fact=fact_fce3;measure=sum(count);by=month");
  const ResultGrid grid = run_query(mart, q);

  std::map<std::string, double> expected;
  for (const auto& f : mart.fact_usability_queries) {
    if (f.time_key == 0) continue;
    char label[8];
    std::snprintf(label, sizeof label, "%04d-%02d", f.time_key / 10000,
                  (f.time_key / 100) % 100);
    expected[label] += f.count;
  }
  REQUIRE(grid.rows.size() == expected.size());
  for (const auto& row : grid.rows) {
    REQUIRE(expected.count(row.axis[0]) == 1);
    REQUIRE(row.values[0] == expected.at(row.axis[0]));
  }
}

TEST_CASE("filters restrict rows") {
  const SourceDataset ds = testutil::figure22_dataset();
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse(
      "fact=fact_fce2abc;measure=count(orderDurationDays);"
      "filter=partyRoleName=consumer");
  const ResultGrid grid = run_query(mart, q);
  REQUIRE(grid.rows.size() == 1);
  CHECK(grid.rows[0].values[0] == 1);
}

TEST_CASE("drill year to month keeps single-month data intact") {
  const SourceDataset ds = testutil::figure22_dataset();  // January only
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse(
      "fact=fact_fce2abc;measure=sum(orderDurationDays);by=year;level=year");
  const ResultGrid year_grid = run_query(mart, q);
  REQUIRE(year_grid.rows.size() == 1);

  const ResultGrid month_grid = drill(year_grid, TimeLevel::kYear, TimeLevel::kMonth,
                                      mart, q);
  REQUIRE(month_grid.rows.size() == 1);
  CHECK(month_grid.rows[0].axis[0] == "2024-01");
  CHECK(month_grid.rows[0].values[0] == year_grid.rows[0].values[0]);
}

TEST_CASE("sum and count measures roll up exactly across levels") {
  const SourceDataset ds = generate(testutil::gen_config(42, 400));
  const MartSnapshot mart = build_mart(ds);
  for (const char* fact : {"fact_fce2abc", "fact_fce3", "fact_foe2a", "fact_foe3a"}) {
    CAPTURE(fact);
    Query q;
    q.fact_table = fact;
    const std::string field = std::string(fact) == "fact_fce2abc" ? "orderDurationDays"
                              : std::string(fact) == "fact_fce3"  ? "count"
                              : std::string(fact) == "fact_foe2a" ? "totalDays"
                                                                  : "reworkFlag";
    q.measures = {{field, Agg::kSum}, {field, Agg::kCount}};
    q.row_axis = {"year"};
    q.time_level = TimeLevel::kYear;
    const ResultGrid year_grid = run_query(mart, q);

    const ResultGrid month_grid = drill(year_grid, TimeLevel::kYear, TimeLevel::kMonth,
                                        mart, q);
    std::map<std::string, std::pair<double, double>> by_year;
    for (const auto& row : month_grid.rows) {
      auto& [sum, count] = by_year[row.axis[0].substr(0, 4)];
      sum += row.values[0];
      count += row.values[1];
    }
    REQUIRE(year_grid.rows.size() == by_year.size());
    for (const auto& row : year_grid.rows) {
      const auto& [sum, count] = by_year.at(row.axis[0]);
      REQUIRE(std::fabs(row.values[0] - sum) <= 1e-9);
      REQUIRE(row.values[1] == count);
    }

    // month to day as well
    Query qm = q;
    qm.row_axis = {"month"};
    qm.time_level = TimeLevel::kMonth;
    const ResultGrid months = run_query(mart, qm);
    const ResultGrid days = drill(months, TimeLevel::kMonth, TimeLevel::kDay, mart, qm);
    std::map<std::string, double> day_sums;
    for (const auto& row : days.rows) day_sums[row.axis[0].substr(0, 7)] += row.values[0];
    for (const auto& row : months.rows) {
      REQUIRE(std::fabs(row.values[0] - day_sums.at(row.axis[0])) <= 1e-9);
    }
  }
}

TEST_CASE("drill then re-aggregate is the identity for sums") {
  const SourceDataset ds = generate(testutil::gen_config(5, 150));
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse(
      "fact=fact_fce2abc;measure=sum(orderDelayDays);by=partyRoleName,year;level=year");
  const ResultGrid original = run_query(mart, q);
  const ResultGrid finer = drill(original, TimeLevel::kYear, TimeLevel::kMonth, mart, q);

  std::map<std::vector<std::string>, double> rolled;
  for (const auto& row : finer.rows) {
    rolled[{row.axis[0], row.axis[1].substr(0, 4)}] += row.values[0];
  }
  REQUIRE(rolled.size() == original.rows.size());
  for (const auto& row : original.rows) {
    REQUIRE(std::fabs(rolled.at(row.axis) - row.values[0]) <= 1e-9);
  }
}

TEST_CASE("identical queries serialize identically") {
  const SourceDataset ds = generate(testutil::gen_config(3, 120));
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse(
      "fact=fact_foe2b;measure=mean(durationDays);by=partyRoleName,month;level=month");
  CHECK(run_query(mart, q).to_csv() == run_query(mart, q).to_csv());
}

TEST_CASE("mean equals sum over count on the same grid rows") {
  const SourceDataset ds = generate(testutil::gen_config(9, 200));
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse(
      "fact=fact_fce2abc;measure=mean(orderDurationDays);"
      "measure=sum(orderDurationDays);measure=count(orderDurationDays);"
      "by=partyRoleName,month;level=month");
  const ResultGrid grid = run_query(mart, q);
  REQUIRE_FALSE(grid.rows.empty());
  for (const auto& row : grid.rows) {
    REQUIRE(row.values[2] > 0);
    REQUIRE(std::fabs(row.values[0] - row.values[1] / row.values[2]) <= 1e-9);
  }
}

TEST_CASE("bad drills and unknown attributes are rejected") {
  const MartSnapshot mart = build_mart(testutil::figure22_dataset());
  const Query q = Query::parse("fact=fact_fce2abc;measure=sum(orderDurationDays);by=month");
  const ResultGrid grid = run_query(mart, q);
  CHECK_THROWS_AS(drill(grid, TimeLevel::kMonth, TimeLevel::kYear, mart, q), DomainError);
  CHECK_THROWS_AS(drill(grid, TimeLevel::kYear, TimeLevel::kMonth, mart, q), DomainError);

  Query bad = q;
  bad.row_axis = {"originatingSystem"};  // not reachable from fact_fce2abc
  CHECK_THROWS_AS(run_query(mart, bad), DomainError);
  Query bad2 = q;
  bad2.measures = {{"nope", Agg::kSum}};
  CHECK_THROWS_AS(run_query(mart, bad2), DomainError);
  Query bad3 = q;
  bad3.fact_table = "fact_zzz";
  CHECK_THROWS_AS(run_query(mart, bad3), DomainError);
}

TEST_CASE("undelivered rows are excluded from mean but counted by flags") {
  SourceDataset ds = testutil::figure22_dataset();
  ds.customer_orders[0].interaction_date_complete = std::nullopt;  // open order
  ds.customer_orders[0].delivery_date = std::nullopt;
  const MartSnapshot mart = build_mart(ds);
  const Query q = Query::parse(
      "fact=fact_fce2abc;measure=mean(orderDurationDays);"
      "measure=count(orderDurationDays);measure=count(completedFlag)");
  const ResultGrid grid = run_query(mart, q);
  REQUIRE(grid.rows.size() == 1);
  CHECK(grid.rows[0].values[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(grid.rows[0].values[1] == 1);  // only the completed order has a duration
  CHECK(grid.rows[0].values[2] == 2);  // flag fields are present on every row
}
