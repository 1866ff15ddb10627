#include "otpmart/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "otpmart/csv.hpp"
#include "otpmart/errors.hpp"

namespace otp {

namespace {

constexpr std::int64_t kHour = 3600;
constexpr std::int64_t kDay = kSecondsPerDay;

// Documented generator constants (see docs/schema.md).
const std::vector<std::string> kServiceComponents = {"broadband", "iptv", "voip"};
const std::vector<std::string> kGeographicAreas = {"east", "north", "south", "west"};
const std::vector<std::string> kOriginatingSystems = {"NMS", "OSS-Assurance",
                                                      "OSS-Fulfillment"};
constexpr double kCoTicketRate = 0.25;       // chains that open a CO-linked ticket
constexpr double kLateFaultRate = 0.05;      // faults raised after the 28-day window
constexpr double kTicketUnresolvedRate = 0.2;
constexpr double kCoReworkRate = 0.05;
constexpr double kBillingInquiryRate = 0.1;

std::string padded_id(const char* prefix, int n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%s%06d", prefix, n);
  return buf;
}

std::string pick_segment(SplitMix64& rng,
                         const std::vector<std::pair<std::string, double>>& weights) {
  double total = 0;
  for (const auto& [_, w] : weights) total += w;
  double x = rng.chance() * total;
  for (const auto& [label, w] : weights) {
    x -= w;
    if (x < 0) return label;
  }
  return weights.back().first;
}

void check_rate(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(std::string(name) + " must be in [0,1], got " +
                      std::to_string(v));
  }
}

}  // namespace

void GenConfig::check() const {
  if (order_count < 0) throw ConfigError("orders must be >= 0");
  if (!(period_start < period_end)) throw ConfigError("period-start must precede period-end");
  if (segment_weights.empty()) throw ConfigError("segments must not be empty");
  for (const auto& [label, w] : segment_weights) {
    if (label.empty()) throw ConfigError("segment label must not be empty");
    if (!(w > 0)) throw ConfigError("segment weight for '" + label + "' must be > 0");
  }
  check_rate(failure_rate, "failure-rate");
  check_rate(rework_rate, "rework-rate");
  check_rate(usability_inquiry_rate, "usability-inquiry-rate");
  check_rate(early_fault_rate, "early-fault-rate");
  check_rate(pending_ticket_rate, "pending-ticket-rate");
  check_rate(open_order_rate, "open-order-rate");
}

GenConfig GenConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  GenConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    const auto trim = [](std::string s) {
      const auto sb = s.find_first_not_of(" \t");
      if (sb == std::string::npos) return std::string{};
      const auto se = s.find_last_not_of(" \t");
      return s.substr(sb, se - sb + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "orders") {
        cfg.order_count = std::stoi(value);
      } else if (key == "period-start") {
        cfg.period_start = Timestamp::parse(value);
      } else if (key == "period-end") {
        cfg.period_end = Timestamp::parse(value);
      } else if (key == "segments") {
        // "label:weight,label:weight"
        cfg.segment_weights.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw ConfigError("expected label:weight");
          cfg.segment_weights.emplace_back(item.substr(0, colon),
                                           std::stod(item.substr(colon + 1)));
        }
      } else if (key == "failure-rate") {
        cfg.failure_rate = std::stod(value);
      } else if (key == "rework-rate") {
        cfg.rework_rate = std::stod(value);
      } else if (key == "usability-inquiry-rate") {
        cfg.usability_inquiry_rate = std::stod(value);
      } else if (key == "early-fault-rate") {
        cfg.early_fault_rate = std::stod(value);
      } else if (key == "pending-ticket-rate") {
        cfg.pending_ticket_rate = std::stod(value);
      } else if (key == "open-order-rate") {
        cfg.open_order_rate = std::stod(value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": bad value for '" + key + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": value out of range for '" + key + "'");
    }
  }
  return cfg;
}

SourceDataset generate(const GenConfig& cfg) {
  cfg.check();
  SplitMix64 rng(cfg.seed);
  SourceDataset ds;

  const int n_customers = std::max(2, cfg.order_count / 5);
  const int n_places = std::max(2, cfg.order_count / 10);

  // Draw order is fixed: customers, places, then per order every field in
  // the sequence below. Branch draws only happen when the branch is taken.
  for (int i = 0; i < n_customers; ++i) {
    ds.customers.push_back(
        {padded_id("C", i + 1), pick_segment(rng, cfg.segment_weights)});
  }
  for (int i = 0; i < n_places; ++i) {
    ds.places.push_back(
        {padded_id("P", i + 1),
         kGeographicAreas[std::size_t(rng.uniform(0, std::int64_t(kGeographicAreas.size()) - 1))]});
  }

  const std::int64_t span = cfg.period_end - cfg.period_start;
  int problem_seq = 0, ticket_seq = 0, inquiry_seq = 0;

  for (int i = 0; i < cfg.order_count; ++i) {
    const std::string chain = padded_id("CH", i + 1);
    const std::string& customer =
        ds.customers[std::size_t(rng.uniform(0, n_customers - 1))].customer_id;
    const std::string& place =
        ds.places[std::size_t(rng.uniform(0, n_places - 1))].place_id;

    const Timestamp co_start = cfg.period_start + rng.uniform(0, span - 1);
    const bool open = rng.bernoulli(cfg.open_order_rate);
    const std::int64_t d1 = rng.uniform(kHour, kDay);
    const std::int64_t d2 = rng.uniform(kHour, kDay);
    const std::int64_t d3 = rng.uniform(kDay, 5 * kDay);
    const std::int64_t d4 = rng.uniform(kHour, kDay);
    const std::int64_t d5 = rng.uniform(kHour, kDay);

    const Timestamp so_start = co_start + d1;
    const Timestamp ro_start = so_start + d2;
    const Timestamp ro_complete = ro_start + d3;
    const Timestamp so_complete = ro_complete + d4;
    const Timestamp co_complete = so_complete + d5;

    const Timestamp co_due = co_start + rng.uniform(2 * kDay, 10 * kDay);
    const Timestamp co_crd = co_due + rng.uniform(-4 * kDay, 2 * kDay);
    const Timestamp so_due = so_start + rng.uniform(kDay, 8 * kDay);
    const Timestamp so_crd = so_due + rng.uniform(-2 * kDay, kDay);
    const Timestamp ro_due = ro_start + rng.uniform(kDay, 8 * kDay);
    const Timestamp ro_crd = ro_due + rng.uniform(-2 * kDay, kDay);

    const int co_rework = rng.bernoulli(kCoReworkRate) ? int(rng.uniform(1, 2)) : 0;
    const int so_rework = rng.bernoulli(cfg.rework_rate) ? int(rng.uniform(1, 3)) : 0;

    CustomerOrder co{padded_id("CO", i + 1), chain, customer, place, co_start,
                     std::nullopt,           std::nullopt,     co_due,
                     co_crd,                 co_rework};
    ServiceOrder so{padded_id("SO", i + 1), chain,  so_start, std::nullopt,
                    so_due,                 so_crd, std::nullopt, so_rework};
    ResourceOrder ro{padded_id("RO", i + 1), chain,  ro_start, std::nullopt,
                     ro_due,                 ro_crd, std::nullopt, 0};
    if (!open) {
      co.interaction_date_complete = co_complete;
      co.delivery_date = co_complete;  // delivery coincides with acceptance
      so.interaction_date_complete = so_complete;
      so.delivery_date = so_complete;
      ro.interaction_date_complete = ro_complete;
      ro.delivery_date = ro_complete;
    }

    const bool failed = rng.bernoulli(cfg.failure_rate);
    const int cfs_status = failed ? kCfsStatusFailed : (open ? 2 : kCfsStatusDelivered);
    ds.services.push_back({padded_id("CFS", i + 1), chain,
                           kServiceComponents[std::size_t(rng.uniform(
                               0, std::int64_t(kServiceComponents.size()) - 1))],
                           cfs_status, cfs_status == kCfsStatusDelivered,
                           cfs_status != kCfsStatusFailed});

    if (failed) {
      ds.service_problems.push_back(
          {padded_id("SP", ++problem_seq), chain,
           kOriginatingSystems[std::size_t(
               rng.uniform(0, std::int64_t(kOriginatingSystems.size()) - 1))],
           std::string(kReasonActivationFailure),
           std::string(kFirstAlertCustomerReport),
           so_start + rng.uniform(0, 3 * kDay)});
    }
    if (!open) {
      if (rng.bernoulli(cfg.early_fault_rate)) {
        ds.service_problems.push_back(
            {padded_id("SP", ++problem_seq), chain,
             kOriginatingSystems[std::size_t(
                 rng.uniform(0, std::int64_t(kOriginatingSystems.size()) - 1))],
             "equipment fault", "network alarm",
             co_complete + rng.uniform(0, 28 * kDay)});
      } else if (rng.bernoulli(kLateFaultRate)) {
        ds.service_problems.push_back(
            {padded_id("SP", ++problem_seq), chain,
             kOriginatingSystems[std::size_t(
                 rng.uniform(0, std::int64_t(kOriginatingSystems.size()) - 1))],
             "equipment fault", "network alarm",
             co_complete + 28 * kDay + rng.uniform(1, 30 * kDay)});
      }
    }

    if (so_rework > 0) {
      const Timestamp detection = so_start + rng.uniform(kHour, 2 * kDay);
      TroubleTicket t{padded_id("TT", ++ticket_seq),
                      chain,
                      LinkedOrderKind::kServiceOrder,
                      "Closed",
                      detection,
                      std::nullopt,
                      detection,
                      std::nullopt};
      if (rng.bernoulli(kTicketUnresolvedRate)) {
        t.trouble_ticket_state = "Open";
      } else {
        const Timestamp restored = detection + rng.uniform(4 * kHour, 5 * kDay);
        t.service_restored_date = restored;
        t.interaction_date_complete = restored;
      }
      ds.trouble_tickets.push_back(std::move(t));
    }

    if (rng.bernoulli(kCoTicketRate)) {
      const Timestamp detection = co_start + rng.uniform(kHour, 3 * kDay);
      TroubleTicket t{padded_id("TT", ++ticket_seq),
                      chain,
                      LinkedOrderKind::kCustomerOrder,
                      "Closed",
                      detection,
                      std::nullopt,
                      detection,
                      std::nullopt};
      if (rng.bernoulli(cfg.pending_ticket_rate)) {
        t.trouble_ticket_state = std::string(kTicketStatePending);
      } else {
        const Timestamp restored = detection + rng.uniform(4 * kHour, 5 * kDay);
        t.service_restored_date = restored;
        t.interaction_date_complete = restored;
      }
      ds.trouble_tickets.push_back(std::move(t));
    }

    if (rng.bernoulli(cfg.usability_inquiry_rate)) {
      const Timestamp base = open ? co_start : co_complete;
      ds.customer_inquiries.push_back({padded_id("INQ", ++inquiry_seq), customer,
                                       std::string(kInquiryTypeUsability),
                                       base + rng.uniform(0, 14 * kDay)});
    }
    if (rng.bernoulli(kBillingInquiryRate)) {
      ds.customer_inquiries.push_back({padded_id("INQ", ++inquiry_seq), customer,
                                       "billing inquiry",
                                       co_start + rng.uniform(0, 30 * kDay)});
    }

    ds.customer_orders.push_back(std::move(co));
    ds.service_orders.push_back(std::move(so));
    ds.resource_orders.push_back(std::move(ro));
  }
  return ds;
}

namespace {

template <typename T, typename Key>
std::vector<T> sorted_by(std::vector<T> v, Key key) {
  std::sort(v.begin(), v.end(),
            [&](const T& a, const T& b) { return key(a) < key(b); });
  return v;
}

}  // namespace

FileManifest write_source(const SourceDataset& ds,
                          const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  FileManifest manifest;
  const auto emit = [&](std::string_view file, const CsvRow& header,
                        const std::vector<CsvRow>& rows) {
    csv_write_file(dir / file, header, rows);
    manifest.entries.push_back({std::string(file), rows.size()});
  };

  const auto& files = source_files();
  const auto header_of = [&](std::size_t i) {
    CsvRow h;
    for (auto c : files[i].columns) h.emplace_back(c);
    return h;
  };

  std::vector<CsvRow> rows;

  for (const auto& c : sorted_by(ds.customers, [](const Customer& x) { return x.customer_id; }))
    rows.push_back({c.customer_id, c.party_role_name});
  emit("customers.csv", header_of(0), rows);
  rows.clear();

  for (const auto& p : sorted_by(ds.places, [](const Place& x) { return x.place_id; }))
    rows.push_back({p.place_id, p.geographic_area});
  emit("places.csv", header_of(1), rows);
  rows.clear();

  for (const auto& o : sorted_by(ds.customer_orders,
                                 [](const CustomerOrder& x) { return x.customer_order_id; })) {
    rows.push_back({o.customer_order_id, o.chain_id, o.customer_ref, o.place_ref,
                    o.interaction_date.to_string(),
                    format_timestamp_field(o.interaction_date_complete),
                    format_timestamp_field(o.delivery_date), o.due_date.to_string(),
                    o.customer_required_date.to_string(), std::to_string(o.rework_no)});
  }
  emit("customer_orders.csv", header_of(2), rows);
  rows.clear();

  for (const auto& o : sorted_by(ds.service_orders,
                                 [](const ServiceOrder& x) { return x.service_order_id; })) {
    rows.push_back({o.service_order_id, o.chain_id, o.interaction_date.to_string(),
                    format_timestamp_field(o.interaction_date_complete),
                    o.due_date.to_string(), o.customer_required_date.to_string(),
                    format_timestamp_field(o.delivery_date), std::to_string(o.rework_no)});
  }
  emit("service_orders.csv", header_of(3), rows);
  rows.clear();

  for (const auto& o : sorted_by(ds.resource_orders,
                                 [](const ResourceOrder& x) { return x.resource_order_id; })) {
    rows.push_back({o.resource_order_id, o.chain_id, o.interaction_date.to_string(),
                    format_timestamp_field(o.interaction_date_complete),
                    o.due_date.to_string(), o.customer_required_date.to_string(),
                    format_timestamp_field(o.delivery_date), std::to_string(o.rework_no)});
  }
  emit("resource_orders.csv", header_of(4), rows);
  rows.clear();

  for (const auto& s : sorted_by(ds.services,
                                 [](const CustomerFacingService& x) { return x.cfs_id; })) {
    rows.push_back({s.cfs_id, s.chain_id, s.service_component,
                    std::to_string(s.cfs_status), s.is_service_enabled ? "1" : "0",
                    s.has_started ? "1" : "0"});
  }
  emit("cfs.csv", header_of(5), rows);
  rows.clear();

  for (const auto& p : sorted_by(ds.service_problems,
                                 [](const ServiceProblem& x) { return x.service_problem_id; })) {
    rows.push_back({p.service_problem_id, p.chain_id, p.originating_system, p.reason,
                    p.first_alert, p.time_raised.to_string()});
  }
  emit("service_problems.csv", header_of(6), rows);
  rows.clear();

  for (const auto& t : sorted_by(ds.trouble_tickets,
                                 [](const TroubleTicket& x) { return x.trouble_ticket_id; })) {
    rows.push_back({t.trouble_ticket_id, t.chain_id,
                    std::string(to_string(t.linked_order_kind)), t.trouble_ticket_state,
                    t.trouble_detection_date.to_string(),
                    format_timestamp_field(t.service_restored_date),
                    t.interaction_date.to_string(),
                    format_timestamp_field(t.interaction_date_complete)});
  }
  emit("trouble_tickets.csv", header_of(7), rows);
  rows.clear();

  for (const auto& q : sorted_by(ds.customer_inquiries,
                                 [](const CustomerInquiry& x) { return x.customer_inquiry_id; })) {
    rows.push_back({q.customer_inquiry_id, q.customer_ref, q.inquiry_type,
                    q.interaction_date.to_string()});
  }
  emit("customer_inquiries.csv", header_of(8), rows);

  return manifest;
}

}  // namespace otp
