#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "buddysim/controller.h"

namespace buddysim {

struct HostCostParams {
  double bitcount_gbps = 20.0;  // host popcount processing rate
  double channel_gbps = 28.8;   // bandwidth-bound baseline channel
};

// Everything a workload or microbenchmark run needs.
struct SimParams {
  SubarrayConfig subarray;
  TimingParams timing;
  EnergyParams energy = default_energy_params();
  AapMode mode = AapMode::OPTIMIZED;
  int banks = 1;
  HostCostParams host;
  ExecOptions exec;
};

struct OpCounts {
  std::map<std::string, uint64_t> bitwise;  // op name -> logical op count
  uint64_t bitcount = 0;
  uint64_t copies = 0;

  uint64_t bitwise_total() const;
  uint64_t of(const std::string& name) const;
};

// One evaluated predicate: the result bit per value.
struct ScanResult {
  uint32_t c1 = 0;
  uint32_t c2 = 0;
  std::vector<bool> matches;
  uint64_t match_count = 0;
};

struct WorkloadReport {
  std::string name;
  bool oracle_pass = false;
  OpCounts counts;
  CostReport cost;
  double buddy_ns = 0.0;     // in-DRAM bitwise time incl. PSM + flush
  double baseline_ns = 0.0;  // bandwidth-bound baseline for the same stream
  double bitcount_ns = 0.0;  // host popcount time (paid by both sides)
  bool any_fault = false;
  CommandTrace trace;
  std::string results_json;         // workload-specific results document
  std::vector<ScanResult> scans;    // bitweaving only
};

// Weekly-activity bitmap index query: per week, OR of seven daily bitmaps;
// unique users active every week; male users active per week. 6n ORs,
// 2n-1 ANDs, n+1 host bitcounts.
struct BitmapQueryParams {
  uint64_t m = 1u << 20;  // users
  int n = 4;              // weeks
  double density = 0.3;
  uint64_t seed = 1;
};
WorkloadReport run_bitmap_query(const BitmapQueryParams& p, const SimParams& sim);

// Vertical bit-sliced column scan of the predicate c1 <= val <= c2, evaluated
// MSB to LSB with broadcast constant rows; popcount on the host.
struct BitweavingParams {
  int b = 8;           // bits per value
  uint64_t r = 65536;  // values in the column
  int predicates = 10;
  uint64_t seed = 1;
  // When nonempty these predicates run instead of random ones.
  std::vector<std::pair<uint32_t, uint32_t>> explicit_predicates;
};
WorkloadReport run_bitweaving_scan(const BitweavingParams& p, const SimParams& sim);

// Set union/intersection/difference over bit-vector sets.
struct SetOpsParams {
  int k = 15;
  uint64_t elements_per_set = 4096;
  int domain_bits = 19;  // elements in [0, 2^domain_bits)
  uint64_t seed = 1;
  // Explicit membership lists; overrides random generation when present.
  std::optional<std::vector<std::vector<uint32_t>>> sets;
};
WorkloadReport run_set_ops(const SetOpsParams& p, const SimParams& sim);

}  // namespace buddysim
