#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace otp {

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// UTC instant at whole-second granularity.
///
/// Serialized form is ISO-8601 "YYYY-MM-DDThh:mm:ssZ" and round-trips
/// exactly. Comparison follows the instant's total order.
class Timestamp {
 public:
  Timestamp() = default;
  explicit constexpr Timestamp(std::int64_t epoch_seconds) : secs_(epoch_seconds) {}

  // Throws ParseError unless the input is exactly "YYYY-MM-DDThh:mm:ssZ"
  // with a valid calendar date and time-of-day.
  static Timestamp parse(std::string_view iso);
  static std::optional<Timestamp> try_parse(std::string_view iso);

  std::string to_string() const;

  constexpr std::int64_t epoch_seconds() const { return secs_; }

  // YYYYMMDD integer of the UTC calendar date. Key 0 is reserved for
  // "no date" and is never produced here.
  int time_key() const;

  constexpr auto operator<=>(const Timestamp&) const = default;

 private:
  std::int64_t secs_ = 0;
};

constexpr std::int64_t operator-(Timestamp a, Timestamp b) {
  return a.epoch_seconds() - b.epoch_seconds();
}

constexpr Timestamp operator+(Timestamp t, std::int64_t seconds) {
  return Timestamp{t.epoch_seconds() + seconds};
}

double seconds_to_days(std::int64_t seconds);

// Inverse of formatting a whole-second duration with 6 fractional-day
// decimals: rounds to the nearest second, which recovers it exactly
// (the 6-decimal grid is ~0.04 s wide).
std::int64_t days_to_seconds(double days);

struct CivilDate {
  int year;
  int month;  // 1-12
  int day;    // 1-31

  bool operator==(const CivilDate&) const = default;
};

bool civil_ok(int year, int month, int day);
int time_key_from_civil(int year, int month, int day);
CivilDate civil_from_time_key(int time_key);

// First day of the month following (year, month), as a time key.
int next_month_key(int year, int month);

inline int month_of_key(int time_key) { return time_key / 100; }  // YYYYMM
inline int year_of_key(int time_key) { return time_key / 10000; }

}  // namespace otp
