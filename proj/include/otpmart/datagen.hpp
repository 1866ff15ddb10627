#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "otpmart/source_model.hpp"
#include "otpmart/timestamp.hpp"

namespace otp {

/// SplitMix64 (Steele, Lea & Flood 2014). Chosen because the full stream is
/// defined by three multiply-xorshift constants, so any language can
/// reproduce it bit for bit. All derived draws are documented in
/// docs/schema.md: uniform(lo,hi) = lo + next() % span, chance() uses the
/// top 53 bits.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Inclusive bounds. Modulo reduction; the bias at desk scale is far below
  // the sampling noise the tests allow for.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    return lo + std::int64_t(next() % std::uint64_t(hi - lo + 1));
  }

  double chance() { return double(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return chance() < p; }

 private:
  std::uint64_t state_;
};

struct GenConfig {
  std::uint64_t seed = 1;
  int order_count = 100;
  Timestamp period_start{1704067200};  // 2024-01-01T00:00:00Z
  Timestamp period_end{1735689600};    // 2025-01-01T00:00:00Z
  // Ordered list; the weighted pick walks it front to back.
  std::vector<std::pair<std::string, double>> segment_weights = {
      {"consumer", 0.7}, {"largeenterprise", 0.3}};
  double failure_rate = 0.08;
  double rework_rate = 0.15;
  double usability_inquiry_rate = 0.2;
  double early_fault_rate = 0.1;
  double pending_ticket_rate = 0.3;
  double open_order_rate = 0.1;

  // Throws ConfigError when a rate is outside [0,1], the period is empty,
  // a weight is non-positive, or order_count is negative.
  void check() const;

  // Flat key=value file; keys match the CLI flag names (see README).
  // Unknown keys are rejected.
  static GenConfig from_file(const std::filesystem::path& path);
};

// Deterministic synthetic dataset: a pure function of the config. Every
// generated dataset passes validate() with an empty report, chains are
// 1:1:1 CO/SO/RO with nested lifecycles, and failed-CFS chains carry a
// customer-reported activation-failure problem.
SourceDataset generate(const GenConfig& config);

struct FileManifest {
  struct Entry {
    std::string file_name;
    std::size_t rows;

    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;

  bool operator==(const FileManifest&) const = default;
};

// Writes the nine source CSVs, rows sorted by primary identifier. Creates
// the directory if needed; throws IoError when unwritable.
FileManifest write_source(const SourceDataset& dataset,
                          const std::filesystem::path& directory);

}  // namespace otp
