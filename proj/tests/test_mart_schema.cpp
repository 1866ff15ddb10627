#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "otpmart/datagen.hpp"
#include "otpmart/errors.hpp"
#include "otpmart/etl.hpp"
#include "otpmart/mart_schema.hpp"
#include "test_util.hpp"

using namespace otp;
using testutil::TempDir;

TEST_CASE("the constellation is exactly 5 dimensions and 9 facts") {
  const auto& tables = mart_tables();
  CHECK(tables.size() == 14);
  const auto facts = std::count_if(tables.begin(), tables.end(),
                                   [](const MartTableInfo& t) { return t.is_fact; });
  CHECK(facts == 9);
  CHECK(tables.size() - std::size_t(facts) == 5);
}

TEST_CASE("schema docs list every table with its header") {
  const std::string docs =
      testutil::read_file(std::filesystem::path(OTPMART_SOURCE_DIR) / "docs/schema.md");
  REQUIRE_FALSE(docs.empty());
  for (const auto& t : mart_tables()) {
    CAPTURE(t.table);
    CHECK(docs.find(t.table) != std::string::npos);
    std::string header;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i) header += ',';
      header += t.columns[i];
    }
    CHECK(docs.find(header) != std::string::npos);
  }
  for (const auto& f : source_files()) {
    CAPTURE(f.file_name);
    CHECK(docs.find(f.file_name) != std::string::npos);
  }
}

TEST_CASE("empty mart writes 14 header-only files") {
  TempDir dir;
  const FileManifest manifest = write_mart(MartSnapshot{}, dir.path());
  CHECK(manifest.entries.size() == 14);
  for (const auto& e : manifest.entries) {
    CHECK(e.rows == 0);
    const std::string text = testutil::read_file(dir / e.file_name);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  }
  CHECK(read_mart(dir.path()) == MartSnapshot{});
}

TEST_CASE("write_mart is deterministic") {
  const SourceDataset ds = generate(testutil::gen_config(42, 150));
  const MartSnapshot mart = build_mart(ds);
  TempDir a, b;
  write_mart(mart, a.path());
  write_mart(mart, b.path());
  CHECK(testutil::dir_contents(a.path()) == testutil::dir_contents(b.path()));
}

TEST_CASE("write then read round-trips the snapshot") {
  const SourceDataset ds = generate(testutil::gen_config(42, 200));
  MartSnapshot mart = build_mart(ds);
  TempDir dir;
  write_mart(mart, dir.path());
  const MartSnapshot back = read_mart(dir.path());

  // write_mart sorts rows; sort the original the same way before comparing
  TempDir dir2;
  write_mart(back, dir2.path());
  CHECK(testutil::dir_contents(dir.path()) == testutil::dir_contents(dir2.path()));
  CHECK(check_foreign_keys(back).empty());
  CHECK(back.fact_order_fulfillment.size() == mart.fact_order_fulfillment.size());
  CHECK(back.fact_activation_by_process.size() == mart.fact_activation_by_process.size());
}

TEST_CASE("foreign-key closure holds on a generated mart") {
  const SourceDataset ds = generate(testutil::gen_config(7, 250));
  CHECK(check_foreign_keys(build_mart(ds)).empty());
}

TEST_CASE("dangling keys are detected and block read_mart") {
  const SourceDataset ds = generate(testutil::gen_config(3, 30));
  MartSnapshot mart = build_mart(ds);
  REQUIRE_FALSE(mart.fact_order_fulfillment.empty());
  mart.fact_order_fulfillment[0].customer_key = 999999;
  const auto dangling = check_foreign_keys(mart);
  REQUIRE(dangling.size() == 1);
  CHECK(dangling[0].find("fact_fce2abc") != std::string::npos);
  CHECK(dangling[0].find("999999") != std::string::npos);

  TempDir dir;
  write_mart(mart, dir.path());
  CHECK_THROWS_AS(read_mart(dir.path()), LoadError);
}

TEST_CASE("the reserved 0 member is always allowed") {
  MartSnapshot mart;
  mart.fact_usability_queries.push_back({"inquiry", 0, 0, 0, 1});
  CHECK(check_foreign_keys(mart).empty());
}

TEST_CASE("telescoping holds exactly in stored facts") {
  const SourceDataset ds = generate(testutil::gen_config(11, 300));
  MartSnapshot mart = build_mart(ds);
  TempDir dir;
  write_mart(mart, dir.path());
  const MartSnapshot back = read_mart(dir.path());
  REQUIRE_FALSE(back.fact_order_to_activation.empty());
  for (const auto& f : back.fact_order_to_activation) {
    std::int64_t sum = 0;
    for (auto s : f.mp_secs) sum += s;
    REQUIRE(f.total_secs == sum);  // exact, same-unit integer seconds
  }
}

TEST_CASE("missing mart file raises IoError") {
  TempDir dir;
  write_mart(MartSnapshot{}, dir.path());
  std::filesystem::remove(dir / "dim_time.csv");
  CHECK_THROWS_AS(read_mart(dir.path()), IoError);
}

TEST_CASE("bad mart header raises LoadError") {
  TempDir dir;
  write_mart(MartSnapshot{}, dir.path());
  testutil::write_file(dir / "dim_time.csv", "wrong,header\n");
  CHECK_THROWS_AS(read_mart(dir.path()), LoadError);
}
