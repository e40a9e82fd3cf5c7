#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "buddysim/analog.h"
#include "buddysim/bitrow.h"

namespace buddysim {

enum class ReliabilityMode { ANALYTIC, CALIBRATED };

// Physical wordlines of one subarray. The DCC n-wordlines gate the cell onto
// bitline-bar; every other line gates onto the bitline.
enum class Line : uint8_t {
  T0, T1, T2, T3,
  DCC0_D, DCC0_N,
  DCC1_D, DCC1_N,
  C0, C1,
  DATA,
};

struct Wordline {
  Line line = Line::DATA;
  int data_index = 0;  // meaningful only for DATA

  static Wordline t(int i);
  static Wordline dcc_d(int i);
  static Wordline dcc_n(int i);
  static Wordline c0() { return {Line::C0, 0}; }
  static Wordline c1() { return {Line::C1, 0}; }
  static Wordline data(int i) { return {Line::DATA, i}; }

  std::string str() const;
  bool operator==(const Wordline&) const = default;
};

// 1-3 simultaneously raised wordlines.
using WordlineSet = std::vector<Wordline>;

struct SubarrayConfig {
  int row_bits = 65536;  // 8 KB rank-level row
  int data_rows = 1006;  // D-group size for a 1024-row subarray
  ReliabilityMode reliability = ReliabilityMode::CALIBRATED;
  double variation_pct = 0.0;   // symmetric process variation for TRA checks
  double cb_over_cc = 4.0;
  double tie_epsilon = 1e-9;
  uint64_t stale_window_ops = 64;  // commands until an untouched row goes stale
  LatencyCalibration calibration = LatencyCalibration::defaults();

  void validate() const;
};

struct ActivationInfo {
  int wordline_count = 0;
  bool forced_overwrite = false;  // second activation onto an open row buffer
  bool fault = false;             // tie, or calibrated FAIL at this variation
  bool stale_source = false;      // charge sharing consumed rows past the window
  uint64_t fault_bits = 0;
  std::optional<double> latency_ns;  // calibrated, worst pattern present
};

enum class Phase { PRECHARGED, ACTIVATED };

// Functional state machine of one DRAM subarray: data rows, four designated
// rows T0-T3, two dual-contact rows, the all-0/all-1 control rows, and the
// sense-amp latch. Reliability problems are reported through ActivationInfo;
// only protocol violations throw.
class Subarray {
 public:
  explicit Subarray(SubarrayConfig cfg = {});

  const SubarrayConfig& config() const { return cfg_; }
  Phase phase() const { return activated_ ? Phase::ACTIVATED : Phase::PRECHARGED; }
  uint64_t op_counter() const { return op_counter_; }
  int row_bytes() const { return cfg_.row_bits / 8; }

  // From PRECHARGED: charge sharing over the raised lines decides the latch
  // (n-wordline cells contribute their complement) and every connected row is
  // overwritten with the result. From ACTIVATED: forced overwrite, newly
  // raised rows copy the latch without recomputation; raising three lines at
  // once in this phase is rejected.
  ActivationInfo activate(const WordlineSet& lines);
  void precharge();

  const BitRow& read_row() const;      // requires ACTIVATED
  void write_row(const BitRow& bits);  // overwrites latch and all raised rows

  // Direct cell access for setup and inspection. Both wordlines of a DCC name
  // the same cell row. Control rows cannot be set.
  const BitRow& row(const Wordline& wl) const;
  void set_row(const Wordline& wl, const BitRow& bits);

  std::string dump_json() const;
  static Subarray load_json(const std::string& text);

 private:
  struct Resolved {
    int row;
    bool bar;  // connected through bitline-bar
  };
  Resolved resolve(const Wordline& wl) const;
  void store_through(const Resolved& r, const BitRow& value);
  void reassert_control_rows(const std::vector<Resolved>& touched);
  ActivationInfo first_activation(const std::vector<Resolved>& lines);

  SubarrayConfig cfg_;
  std::vector<BitRow> rows_;  // [0..3]=T, [4..5]=DCC cells, [6..7]=C0/C1, [8..]=data
  std::vector<uint64_t> last_touch_;
  BitRow latch_;
  bool activated_ = false;
  std::vector<Wordline> raised_;
  uint64_t op_counter_ = 0;
};

}  // namespace buddysim
