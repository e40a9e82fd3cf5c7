#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "buddysim/command.h"
#include "buddysim/cost.h"

namespace buddysim {

// Row-wide bulk bitwise request on OS-visible, row-aligned byte addresses.
struct BopRequest {
  BitwiseOp op = BitwiseOp::AND;
  uint64_t dst = 0;
  uint64_t src1 = 0;
  std::optional<uint64_t> src2;
  uint64_t size_bytes = 0;
};

struct RowLoc {
  int bank = 0;
  int subarray = 0;  // within the bank
  int row = 0;       // local D index
  bool operator==(const RowLoc&) const = default;
};

// OS row index -> physical location.
struct Placement {
  std::vector<RowLoc> rows;

  // Contiguous OS view: consecutive D addresses fill one subarray before
  // moving to the next (global D index = subarray id * data_rows + local).
  static Placement interleaved(int total_os_rows, int data_rows_per_subarray,
                               int subarrays_per_bank);
  static Placement from_json(const std::string& text);
  std::string to_json() const;

  const RowLoc& loc(uint64_t os_row) const;
};

enum class SliceKind { IN_DRAM, CPU_FALLBACK };

struct SlicePlan {
  SliceKind kind = SliceKind::IN_DRAM;
  uint64_t dst_row = 0;
  uint64_t src1_row = 0;
  std::optional<uint64_t> src2_row;
  int psm_count = 0;
  std::string fallback_reason;
};

struct CoherenceCounts {
  uint64_t flush_rows = 0;       // dirty source rows flushed before the op
  uint64_t invalidate_rows = 0;  // destination rows invalidated in parallel
};

struct ExecutionPlan {
  BitwiseOp op = BitwiseOp::AND;
  uint64_t row_bytes = 0;
  std::vector<SlicePlan> slices;
  CoherenceCounts coherence;
};

struct DispatchResult {
  CommandTrace trace;  // aggregated commands + PSM transfer records
  uint64_t in_dram_slices = 0;
  uint64_t fallback_slices = 0;
  uint64_t fallback_result_bytes = 0;
  CoherenceCounts coherence;
  bool any_fault = false;
  bool any_stale = false;
};

// A set of banks of subarrays plus the OS row placement. Owns the functional
// state the controller plans against and dispatches into.
class MemorySystem {
 public:
  MemorySystem(const SubarrayConfig& sub_cfg, int banks, int subarrays_per_bank,
               Placement placement);

  int banks() const { return banks_; }
  int subarrays_per_bank() const { return subs_per_bank_; }
  uint64_t row_bytes() const { return static_cast<uint64_t>(cfg_.row_bits) / 8; }
  const Placement& placement() const { return placement_; }

  Subarray& subarray(int bank, int sub);
  const Subarray& subarray(int bank, int sub) const;
  Subarray& subarray_at(const RowLoc& loc) { return subarray(loc.bank, loc.subarray); }

  void write_os_row(uint64_t os_row, const BitRow& bits);
  BitRow read_os_row(uint64_t os_row) const;

  // Alignment/size checks, per-slice PSM counting against the destination's
  // subarray, and the three-transfer CPU fallback rule.
  ExecutionPlan plan(const BopRequest& req) const;
  DispatchResult dispatch(const ExecutionPlan& plan, const ExecOptions& opts = {});

  // Placement-checked in-subarray copy of one OS row.
  void copy_os_row(uint64_t src_row, uint64_t dst_row, CommandTrace* trace_out,
                   const ExecOptions& opts = {});

 private:
  SubarrayConfig cfg_;
  int banks_;
  int subs_per_bank_;
  Placement placement_;
  std::vector<Subarray> subs_;
};

struct CapacityReport {
  int total_rows = 1024;
  int data_rows = 1006;
  int reserved_row_equivalents = 10;  // 4 T + 2x2 DCC + 2 control
  double os_visible_fraction = 0.0;   // data_rows / total_rows
  double reserved_area_fraction = 0.0;
  double hidden_address_fraction = 0.0;
};

// Both capacity accountings: the 10-row-equivalent area view (~1%) and the
// 18-hidden-address view (1006 of 1024 exposed).
CapacityReport capacity_report(int total_rows = 1024, int data_rows = 1006);

}  // namespace buddysim
