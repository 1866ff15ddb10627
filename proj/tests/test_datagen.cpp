#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otpmart/datagen.hpp"
#include "otpmart/errors.hpp"
#include "otpmart/source_model.hpp"
#include "test_util.hpp"

using namespace otp;
using testutil::TempDir;

TEST_CASE("orderCount 0 yields customers and places only") {
  const SourceDataset ds = generate(testutil::gen_config(1, 0));
  CHECK(ds.customers.size() == 2);
  CHECK(ds.places.size() == 2);
  CHECK(ds.customer_orders.empty());
  CHECK(ds.service_orders.empty());
  CHECK(ds.resource_orders.empty());
  CHECK(ds.services.empty());
  CHECK(validate(ds).empty());
}

TEST_CASE("generation is deterministic") {
  const GenConfig cfg = testutil::gen_config(123, 200);
  CHECK(generate(cfg) == generate(cfg));
}

TEST_CASE("different seeds differ") {
  CHECK_FALSE(generate(testutil::gen_config(1, 50)) ==
              generate(testutil::gen_config(2, 50)));
}

TEST_CASE("failure rate lands in the binomial 99% interval") {
  GenConfig cfg = testutil::gen_config(42, 1000);
  cfg.failure_rate = 0.1;
  const SourceDataset ds = generate(cfg);
  std::size_t failed = 0;
  for (const auto& s : ds.services) {
    if (s.cfs_status == kCfsStatusFailed) ++failed;
  }
  const double fraction = double(failed) / double(ds.services.size());
  // n=1000, p=0.1: 99% interval 0.1 +- 2.576*sqrt(0.1*0.9/1000) ~ [0.076, 0.124]
  CHECK(fraction >= 0.07);
  CHECK(fraction <= 0.13);
}

TEST_CASE("generated datasets always validate clean") {
  for (std::uint64_t seed : {1ULL, 7ULL, 42ULL, 99ULL, 12345ULL}) {
    CAPTURE(seed);
    const SourceDataset ds = generate(testutil::gen_config(seed, 150));
    const ValidationReport report = validate(ds);
    REQUIRE(report.violations.empty());
  }
}

TEST_CASE("chains are 1:1:1 with nested lifecycles") {
  const SourceDataset ds = generate(testutil::gen_config(7, 300));
  REQUIRE(ds.service_orders.size() == ds.customer_orders.size());
  REQUIRE(ds.resource_orders.size() == ds.customer_orders.size());
  for (std::size_t i = 0; i < ds.customer_orders.size(); ++i) {
    const auto& co = ds.customer_orders[i];
    const auto& so = ds.service_orders[i];
    const auto& ro = ds.resource_orders[i];
    REQUIRE(co.chain_id == so.chain_id);
    REQUIRE(co.chain_id == ro.chain_id);
    REQUIRE(co.interaction_date <= so.interaction_date);
    REQUIRE(so.interaction_date <= ro.interaction_date);
    REQUIRE(co.interaction_date_complete.has_value() ==
            so.interaction_date_complete.has_value());
    REQUIRE(co.interaction_date_complete.has_value() ==
            ro.interaction_date_complete.has_value());
    if (co.interaction_date_complete) {
      REQUIRE(ro.interaction_date <= *ro.interaction_date_complete);
      REQUIRE(*ro.interaction_date_complete <= *so.interaction_date_complete);
      REQUIRE(*so.interaction_date_complete <= *co.interaction_date_complete);
    }
  }
}

TEST_CASE("failed chains carry a qualifying service problem") {
  const SourceDataset ds = generate(testutil::gen_config(21, 400));
  for (const auto& s : ds.services) {
    if (s.cfs_status != kCfsStatusFailed) continue;
    bool qualifying = false;
    for (const auto& p : ds.service_problems) {
      if (p.chain_id == s.chain_id && p.reason == kReasonActivationFailure &&
          p.first_alert == kFirstAlertCustomerReport) {
        qualifying = true;
        break;
      }
    }
    REQUIRE(qualifying);
  }
}

TEST_CASE("open-order fraction responds to the config") {
  GenConfig cfg = testutil::gen_config(5, 1000);
  cfg.open_order_rate = 0.3;
  const SourceDataset ds = generate(cfg);
  std::size_t open = 0;
  for (const auto& o : ds.customer_orders) {
    if (!o.interaction_date_complete) ++open;
  }
  const double fraction = double(open) / 1000.0;
  CHECK(fraction > 0.22);
  CHECK(fraction < 0.38);
}

TEST_CASE("write_source emits nine header-only files for an empty dataset") {
  TempDir dir;
  const FileManifest manifest = write_source(SourceDataset{}, dir.path());
  CHECK(manifest.entries.size() == 9);
  for (const auto& e : manifest.entries) {
    CHECK(e.rows == 0);
    const std::string text = testutil::read_file(dir / e.file_name);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  }
}

TEST_CASE("write_source twice is byte-identical") {
  const SourceDataset ds = generate(testutil::gen_config(1, 80));
  TempDir a, b;
  write_source(ds, a.path());
  write_source(ds, b.path());
  CHECK(testutil::dir_contents(a.path()) == testutil::dir_contents(b.path()));
}

TEST_CASE("write then load round-trips") {
  const SourceDataset ds = generate(testutil::gen_config(77, 120));
  TempDir dir;
  write_source(ds, dir.path());
  CHECK(load_source(dir.path()) == ds);
}

TEST_CASE("invalid configs are rejected") {
  GenConfig cfg;
  cfg.failure_rate = 1.5;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = GenConfig{};
  cfg.period_end = cfg.period_start;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = GenConfig{};
  cfg.order_count = -1;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = GenConfig{};
  cfg.segment_weights = {{"consumer", 0.0}};
  CHECK_THROWS_AS(cfg.check(), ConfigError);
}

TEST_CASE("config file parsing with overrides and comments") {
  TempDir dir;
  testutil::write_file(dir / "gen.conf",
                       "# generator settings\n"
                       "seed=42\n"
                       "orders = 250\n"
                       "failure-rate=0.2\n"
                       "segments=consumer:0.5,largeenterprise:0.5\n"
                       "period-start=2023-01-01T00:00:00Z\n"
                       "period-end=2023-07-01T00:00:00Z\n");
  const GenConfig cfg = GenConfig::from_file(dir / "gen.conf");
  CHECK(cfg.seed == 42);
  CHECK(cfg.order_count == 250);
  CHECK(cfg.failure_rate == doctest::Approx(0.2));
  REQUIRE(cfg.segment_weights.size() == 2);
  CHECK(cfg.segment_weights[0].first == "consumer");
  CHECK(cfg.period_start == testutil::ts("2023-01-01T00:00:00Z"));

  testutil::write_file(dir / "bad.conf", "unknown-key=1\n");
  CHECK_THROWS_AS(GenConfig::from_file(dir / "bad.conf"), ConfigError);
  CHECK_THROWS_AS(GenConfig::from_file(dir / "missing.conf"), IoError);
}
