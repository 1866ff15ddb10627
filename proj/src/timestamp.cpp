#include "otpmart/timestamp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "otpmart/errors.hpp"

namespace otp {

namespace {

namespace chr = std::chrono;

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return !s.empty();
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

std::optional<Timestamp> Timestamp::try_parse(std::string_view iso) {
  // YYYY-MM-DDThh:mm:ssZ, 20 chars, no offsets, no fractions.
  if (iso.size() != 20) return std::nullopt;
  if (iso[4] != '-' || iso[7] != '-' || iso[10] != 'T' || iso[13] != ':' ||
      iso[16] != ':' || iso[19] != 'Z') {
    return std::nullopt;
  }
  const auto y = iso.substr(0, 4), mo = iso.substr(5, 2), d = iso.substr(8, 2);
  const auto h = iso.substr(11, 2), mi = iso.substr(14, 2), s = iso.substr(17, 2);
  if (!all_digits(y) || !all_digits(mo) || !all_digits(d) || !all_digits(h) ||
      !all_digits(mi) || !all_digits(s)) {
    return std::nullopt;
  }
  const int year = to_int(y), month = to_int(mo), day = to_int(d);
  const int hour = to_int(h), minute = to_int(mi), second = to_int(s);
  if (!civil_ok(year, month, day)) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 59) return std::nullopt;

  const chr::sys_days sd{chr::year{year} / chr::month{unsigned(month)} /
                         chr::day{unsigned(day)}};
  const std::int64_t secs = std::int64_t{sd.time_since_epoch().count()} * kSecondsPerDay +
                            hour * 3600 + minute * 60 + second;
  return Timestamp{secs};
}

Timestamp Timestamp::parse(std::string_view iso) {
  if (auto t = try_parse(iso)) return *t;
  throw ParseError("malformed timestamp '" + std::string(iso) +
                   "' (expected YYYY-MM-DDThh:mm:ssZ)");
}

std::string Timestamp::to_string() const {
  // Floor division so pre-1970 instants format correctly too.
  std::int64_t days = secs_ / kSecondsPerDay;
  std::int64_t rem = secs_ % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  const chr::sys_days sd{chr::days{days}};
  const chr::year_month_day ymd{sd};
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                int(rem / 3600), int((rem / 60) % 60), int(rem % 60));
  return buf;
}

int Timestamp::time_key() const {
  std::int64_t days = secs_ / kSecondsPerDay;
  if (secs_ % kSecondsPerDay < 0) --days;
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  return int(ymd.year()) * 10000 + int(unsigned(ymd.month())) * 100 +
         int(unsigned(ymd.day()));
}

double seconds_to_days(std::int64_t seconds) {
  return double(seconds) / double(kSecondsPerDay);
}

std::int64_t days_to_seconds(double days) {
  return std::llround(days * double(kSecondsPerDay));
}

bool civil_ok(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1) return false;
  const chr::year_month_day ymd{chr::year{year}, chr::month{unsigned(month)},
                                chr::day{unsigned(day)}};
  return ymd.ok();
}

int time_key_from_civil(int year, int month, int day) {
  return year * 10000 + month * 100 + day;
}

CivilDate civil_from_time_key(int time_key) {
  return CivilDate{time_key / 10000, (time_key / 100) % 100, time_key % 100};
}

int next_month_key(int year, int month) {
  return month == 12 ? time_key_from_civil(year + 1, 1, 1)
                     : time_key_from_civil(year, month + 1, 1);
}

}  // namespace otp
