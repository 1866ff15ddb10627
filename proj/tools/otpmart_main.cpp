#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otpmart/datagen.hpp"
#include "otpmart/errors.hpp"
#include "otpmart/etl.hpp"
#include "otpmart/kpi_engine.hpp"
#include "otpmart/mart_schema.hpp"
#include "otpmart/olap_query.hpp"
#include "otpmart/report.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 1 domain/flag/validation error, 2 IO/config error.
constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kIoError = 2;

// Flat key=value defaults file; command-line flags override it.
std::map<std::string, std::string> read_config_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw otp::IoError("cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw otp::ConfigError(path.string() + ":" + std::to_string(line_no) +
                             ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// Applies a config default to an option the user did not pass explicitly.
void apply_config(const CLI::App& cmd, const std::map<std::string, std::string>& kv,
                  const std::string& key, std::string& target) {
  const auto it = kv.find(key);
  if (it == kv.end()) return;
  const CLI::Option* opt = cmd.get_option("--" + key);
  if (opt->count() == 0) target = it->second;
}

otp::Filters parse_filter_flags(const std::vector<std::string>& flags) {
  otp::Filters filters;
  for (const auto& f : flags) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) {
      throw otp::DomainError("--filter expects attr=value, got '" + f + "'");
    }
    filters.emplace_back(f.substr(0, eq), f.substr(eq + 1));
  }
  return filters;
}

json manifest_json(const otp::FileManifest& manifest, const std::string& directory) {
  json files = json::array();
  for (const auto& e : manifest.entries) {
    files.push_back({{"name", e.file_name}, {"rows", e.rows}});
  }
  return json{{"directory", directory}, {"files", std::move(files)}};
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string out;
  std::string config_path;
  // textual values so a config file can fill anything the flags did not
  std::string seed_s, orders_s, period_start_s, period_end_s, segments_s;
  std::string failure_s, rework_s, usability_s, early_fault_s, pending_s, open_s;
};

void parse_segments(const std::string& text, otp::GenConfig& cfg) {
  cfg.segment_weights.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw otp::ConfigError("segments expects label:weight pairs, got '" + item + "'");
    }
    cfg.segment_weights.emplace_back(item.substr(0, colon),
                                     std::stod(item.substr(colon + 1)));
  }
}

int cmd_generate(const CLI::App& cmd, GenerateArgs& args) {
  if (!args.config_path.empty()) {
    const auto kv = read_config_map(args.config_path);
    const char* keys[] = {"seed",           "orders",
                          "period-start",   "period-end",
                          "segments",       "failure-rate",
                          "rework-rate",    "usability-inquiry-rate",
                          "early-fault-rate", "pending-ticket-rate",
                          "open-order-rate", "out"};
    std::string* slots[] = {&args.seed_s,        &args.orders_s,
                            &args.period_start_s, &args.period_end_s,
                            &args.segments_s,    &args.failure_s,
                            &args.rework_s,      &args.usability_s,
                            &args.early_fault_s, &args.pending_s,
                            &args.open_s,        &args.out};
    for (std::size_t i = 0; i < std::size(keys); ++i) {
      apply_config(cmd, kv, keys[i], *slots[i]);
    }
  }
  if (args.out.empty()) {
    throw otp::DomainError("missing required flag --out");
  }
  otp::GenConfig cfg;
  try {
    if (!args.seed_s.empty()) cfg.seed = std::stoull(args.seed_s);
    if (!args.orders_s.empty()) cfg.order_count = std::stoi(args.orders_s);
    if (!args.failure_s.empty()) cfg.failure_rate = std::stod(args.failure_s);
    if (!args.rework_s.empty()) cfg.rework_rate = std::stod(args.rework_s);
    if (!args.usability_s.empty()) cfg.usability_inquiry_rate = std::stod(args.usability_s);
    if (!args.early_fault_s.empty()) cfg.early_fault_rate = std::stod(args.early_fault_s);
    if (!args.pending_s.empty()) cfg.pending_ticket_rate = std::stod(args.pending_s);
    if (!args.open_s.empty()) cfg.open_order_rate = std::stod(args.open_s);
  } catch (const std::logic_error&) {
    throw otp::DomainError("malformed numeric flag value");
  }
  if (!args.period_start_s.empty()) {
    cfg.period_start = otp::Timestamp::parse(args.period_start_s);
  }
  if (!args.period_end_s.empty()) {
    cfg.period_end = otp::Timestamp::parse(args.period_end_s);
  }
  if (!args.segments_s.empty()) parse_segments(args.segments_s, cfg);
  cfg.check();

  const otp::SourceDataset ds = otp::generate(cfg);
  const otp::FileManifest manifest = otp::write_source(ds, args.out);
  std::cout << manifest_json(manifest, args.out).dump(2) << "\n";
  return kOk;
}

// --- etl ----------------------------------------------------------------------

int cmd_etl(const std::string& source, const std::string& mart, bool parallel) {
  otp::PipelineConfig cfg{source, mart, parallel};
  const otp::PipelineResult result = otp::run_pipeline(cfg);
  json read = json::object(), written = json::object();
  for (const auto& [table, n] : result.summary.rows_read) read[table] = n;
  for (const auto& [table, n] : result.summary.rows_written) written[table] = n;
  std::cout << json{{"sourceRowsRead", std::move(read)},
                    {"martRowsWritten", std::move(written)}}
                   .dump(2)
            << "\n";
  return kOk;
}

// --- kpi ------------------------------------------------------------------------

int cmd_kpi(const std::string& mart_dir, const std::string& metric,
            const std::string& period_text, const std::vector<std::string>& filter_flags,
            const std::string& group_by) {
  const otp::ReportingPeriod period = otp::ReportingPeriod::parse(period_text);
  const otp::Filters filters = parse_filter_flags(filter_flags);
  const otp::MartSnapshot mart = otp::read_mart(mart_dir);

  if (group_by.empty()) {
    const auto values = otp::evaluate(mart, metric, period, filters);
    if (values.size() == 1) {
      std::cout << values[0].to_json().dump(2) << "\n";
    } else {
      json arr = json::array();
      for (const auto& v : values) arr.push_back(v.to_json());
      std::cout << arr.dump(2) << "\n";
    }
  } else {
    const auto groups = otp::evaluate_grouped(mart, metric, period, group_by, filters);
    json out = json::object();
    for (const auto& [label, values] : groups) {
      if (values.size() == 1) {
        out[label] = values[0].to_json();
      } else {
        json arr = json::array();
        for (const auto& v : values) arr.push_back(v.to_json());
        out[label] = std::move(arr);
      }
    }
    std::cout << out.dump(2) << "\n";
  }
  return kOk;
}

// --- query ----------------------------------------------------------------------

int cmd_query(const std::string& mart_dir, const std::string& query_text) {
  const otp::Query query = otp::Query::parse(query_text);
  const otp::MartSnapshot mart = otp::read_mart(mart_dir);
  std::cout << otp::run_query(mart, query).to_csv();
  return kOk;
}

// --- report ---------------------------------------------------------------------

// Splits the period into calendar months, clipped to the period bounds.
std::vector<otp::ReportingPeriod> month_series(const otp::ReportingPeriod& period) {
  std::vector<otp::ReportingPeriod> months;
  const otp::CivilDate first = otp::civil_from_time_key(period.start_key);
  int start = otp::time_key_from_civil(first.year, first.month, 1);
  while (start < period.end_key) {
    const otp::CivilDate m = otp::civil_from_time_key(start);
    auto p = otp::ReportingPeriod::month(m.year, m.month);
    const int next = p.end_key;
    p.start_key = std::max(p.start_key, period.start_key);
    p.end_key = std::min(p.end_key, period.end_key);
    months.push_back(std::move(p));
    start = next;
  }
  return months;
}

int cmd_report(const std::string& mart_dir, const std::string& metric,
               const std::string& period_text, const std::string& group_by,
               const std::string& chart, const std::string& out_prefix,
               const std::vector<std::string>& filter_flags) {
  const otp::ChartKind kind = otp::chart_kind_from_string(chart);
  const otp::ReportingPeriod period = otp::ReportingPeriod::parse(period_text);
  const otp::Filters filters = parse_filter_flags(filter_flags);
  const otp::MetricDef& def = otp::metric_def(metric);
  if (def.id == "F-OE-2b") {
    throw otp::DomainError(
        "F-OE-2b yields five block values per group; query it via the kpi command");
  }
  const otp::MartSnapshot mart = otp::read_mart(mart_dir);

  std::vector<otp::ReportRow> rows;
  if (group_by == "month") {
    for (const auto& month : month_series(period)) {
      const auto values = otp::evaluate(mart, metric, month, filters);
      rows.push_back({month.label, values[0].value, std::nullopt});
    }
  } else {
    const auto groups = otp::evaluate_grouped(mart, metric, period, group_by, filters);
    for (const auto& [label, values] : groups) {
      rows.push_back({label, values[0].value, std::nullopt});
    }
  }

  std::vector<std::pair<std::string, double>> defined;
  for (const auto& row : rows) {
    if (row.value) defined.emplace_back(row.label, *row.value);
  }
  if (defined.empty()) {
    throw otp::DomainError("no group has a defined value for " + metric + " over " +
                           period.label);
  }
  const auto percents = otp::percent_of_total(defined);
  std::size_t pi = 0;
  for (auto& row : rows) {
    if (row.value) row.percent_of_total = percents[pi++].percent_of_total;
  }

  otp::Report report;
  report.title = def.name + " by " + group_by + " for " + period.label;
  report.unit = std::string(otp::to_string(def.unit));
  report.period_label = period.label;
  report.metric_id = def.id;
  report.rows = std::move(rows);

  const auto write_text = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw otp::IoError("cannot write " + path.string());
    out << text;
  };
  const std::filesystem::path prefix(out_prefix);
  if (prefix.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(prefix.parent_path(), ec);
    if (ec) {
      throw otp::IoError("cannot create directory " + prefix.parent_path().string());
    }
  }
  write_text(out_prefix + ".csv", otp::render_table_csv(report));
  write_text(out_prefix + ".json", otp::render_table_json(report));
  write_text(out_prefix + ".svg", otp::render_chart_svg(report, kind));

  std::cout << json{{"files",
                     {out_prefix + ".csv", out_prefix + ".json", out_prefix + ".svg"}}}
                   .dump(2)
            << "\n";
  return kOk;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Order-to-Payment customer-experience data mart"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "write synthetic source CSVs");
  GenerateArgs gen_args;
  generate->add_option("--seed", gen_args.seed_s, "PRNG seed (default 1)");
  generate->add_option("--orders", gen_args.orders_s, "number of fulfillment chains");
  generate->add_option("--out", gen_args.out, "output directory");
  generate->add_option("--config", gen_args.config_path, "key=value defaults file");
  generate->add_option("--period-start", gen_args.period_start_s,
                       "earliest order date, ISO-8601");
  generate->add_option("--period-end", gen_args.period_end_s,
                       "end of the order window, ISO-8601, exclusive");
  generate->add_option("--segments", gen_args.segments_s,
                       "label:weight[,label:weight...]");
  generate->add_option("--failure-rate", gen_args.failure_s, "P(cfsStatus=6)");
  generate->add_option("--rework-rate", gen_args.rework_s, "P(service order rework)");
  generate->add_option("--usability-inquiry-rate", gen_args.usability_s,
                       "P(usability inquiry per chain)");
  generate->add_option("--early-fault-rate", gen_args.early_fault_s,
                       "P(fault within 28 days of delivery)");
  generate->add_option("--pending-ticket-rate", gen_args.pending_s,
                       "P(customer ticket stays pending)");
  generate->add_option("--open-order-rate", gen_args.open_s,
                       "fraction of chains left open");

  auto* etl = app.add_subcommand("etl", "load source CSVs into the mart");
  std::string etl_source, etl_mart, etl_config;
  bool etl_parallel = false;
  etl->add_option("--source", etl_source, "source directory");
  etl->add_option("--mart", etl_mart, "mart output directory");
  etl->add_option("--config", etl_config, "key=value defaults file");
  etl->add_flag("--parallel", etl_parallel, "run fact transforms concurrently");

  auto* kpi = app.add_subcommand("kpi", "evaluate one of the 11 business metrics");
  std::string kpi_mart, kpi_metric, kpi_period, kpi_group, kpi_config;
  std::vector<std::string> kpi_filters;
  kpi->add_option("--mart", kpi_mart, "mart directory");
  kpi->add_option("--metric", kpi_metric, "metric id, e.g. F-CE-2a");
  kpi->add_option("--period", kpi_period, "YYYY | YYYY-MM | YYYY-MM-DD..YYYY-MM-DD");
  kpi->add_option("--filter", kpi_filters, "attr=value (repeatable)");
  kpi->add_option("--group-by", kpi_group, "dimension attribute");
  kpi->add_option("--config", kpi_config, "key=value defaults file");

  auto* query = app.add_subcommand("query", "dimensional slice/rollup");
  std::string query_mart, query_text, query_config;
  query->add_option("--mart", query_mart, "mart directory");
  query->add_option("--q", query_text,
                    "fact=...;measure=agg(field);by=...;filter=...;level=...");
  query->add_option("--config", query_config, "key=value defaults file");

  auto* report = app.add_subcommand("report", "emit table + chart files");
  std::string rep_mart, rep_metric, rep_period, rep_group, rep_chart, rep_out, rep_config;
  std::vector<std::string> rep_filters;
  report->add_option("--mart", rep_mart, "mart directory");
  report->add_option("--metric", rep_metric, "metric id");
  report->add_option("--period", rep_period, "reporting period");
  report->add_option("--group-by", rep_group, "dimension attribute or 'month'");
  report->add_option("--chart", rep_chart, "pie | bar");
  report->add_option("--out", rep_out, "output path prefix");
  report->add_option("--filter", rep_filters, "attr=value (repeatable)");
  report->add_option("--config", rep_config, "key=value defaults file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return kOk;
    }
    std::cerr << e.what() << "\n" << app.help();
    return kDomainError;
  }

  const auto require = [](const std::string& value, const char* flag) {
    if (value.empty()) {
      throw otp::DomainError(std::string("missing required flag ") + flag);
    }
  };

  if (generate->parsed()) {
    return cmd_generate(*generate, gen_args);
  }
  if (etl->parsed()) {
    if (!etl_config.empty()) {
      const auto kv = read_config_map(etl_config);
      apply_config(*etl, kv, "source", etl_source);
      apply_config(*etl, kv, "mart", etl_mart);
    }
    require(etl_source, "--source");
    require(etl_mart, "--mart");
    return cmd_etl(etl_source, etl_mart, etl_parallel);
  }
  if (kpi->parsed()) {
    if (!kpi_config.empty()) {
      const auto kv = read_config_map(kpi_config);
      apply_config(*kpi, kv, "mart", kpi_mart);
      apply_config(*kpi, kv, "metric", kpi_metric);
      apply_config(*kpi, kv, "period", kpi_period);
      apply_config(*kpi, kv, "group-by", kpi_group);
    }
    require(kpi_mart, "--mart");
    require(kpi_metric, "--metric");
    require(kpi_period, "--period");
    return cmd_kpi(kpi_mart, kpi_metric, kpi_period, kpi_filters, kpi_group);
  }
  if (query->parsed()) {
    if (!query_config.empty()) {
      const auto kv = read_config_map(query_config);
      apply_config(*query, kv, "mart", query_mart);
      apply_config(*query, kv, "q", query_text);
    }
    require(query_mart, "--mart");
    require(query_text, "--q");
    return cmd_query(query_mart, query_text);
  }
  if (report->parsed()) {
    if (!rep_config.empty()) {
      const auto kv = read_config_map(rep_config);
      apply_config(*report, kv, "mart", rep_mart);
      apply_config(*report, kv, "metric", rep_metric);
      apply_config(*report, kv, "period", rep_period);
      apply_config(*report, kv, "group-by", rep_group);
      apply_config(*report, kv, "chart", rep_chart);
      apply_config(*report, kv, "out", rep_out);
    }
    require(rep_mart, "--mart");
    require(rep_metric, "--metric");
    require(rep_period, "--period");
    require(rep_group, "--group-by");
    require(rep_chart, "--chart");
    require(rep_out, "--out");
    return cmd_report(rep_mart, rep_metric, rep_period, rep_group, rep_chart, rep_out,
                      rep_filters);
  }
  return kDomainError;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const otp::ValidationError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& v : e.report().violations) {
      std::cerr << "  " << v.entity << " " << v.id << ": " << v.rule << " (" << v.detail
                << ")\n";
    }
    return kDomainError;
  } catch (const otp::LoadError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << "\n";
    return kDomainError;
  } catch (const otp::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const otp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kIoError;
  } catch (const otp::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const otp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kIoError;
  }
}
