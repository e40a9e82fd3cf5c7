#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>

namespace buddysim {

// Electrical state of one cell taking part in charge sharing.
struct CellElectrical {
  double charge_fraction = 1.0;  // 1 = fully charged to VDD, 0 = fully empty
  double cap_multiplier = 1.0;   // 1 = nominal cell capacitance

  void validate() const;
};

struct ChargeShareConfig {
  double cell_cap_fF = 22.0;     // nominal cell capacitance
  double bitline_cap_fF = 88.0;  // not standardized; default C_b/C_c = 4
  double tie_epsilon = 1e-9;     // deviation (in VDD) the sense amp cannot resolve

  void validate() const;
};

// Bitline deviation after charge sharing, as a signed fraction of VDD:
//   delta = (sum_i q_i*C_i + C_b/2) / (sum_i C_i + C_b) - 1/2
// For three nominal, fully charged/empty cells this reduces to
// (2k - 3)*C_c / (6*C_c + 2*C_b) where k is the number of charged cells.
double charge_share_delta(std::span<const CellElectrical> cells,
                          const ChargeShareConfig& cfg);

enum class TraOutcome { ONE, ZERO, FAIL_TIE };

// Sense-amp decision after a triple-row activation. With nominal cells this
// is the bitwise majority of the three stored values.
TraOutcome tra_outcome(const std::array<CellElectrical, 3>& cells,
                       const ChargeShareConfig& cfg);

// Symmetric cap variation v at which one strong charged cell first overrides
// two weak empty cells: (1+v) >= 2(1-v), i.e. v = 1/3. C_b cancels out of the
// sign analysis, so the result is independent of the config.
double analytic_failure_threshold(const ChargeShareConfig& cfg);

// Triple-activation cell patterns, named (strong cell)(weak)(weak).
enum class TraPattern { P0s0w0w, P1s0w0w, P0s1w1w, P1s1w1w };

inline constexpr std::array<TraPattern, 4> kAllTraPatterns = {
    TraPattern::P0s0w0w, TraPattern::P1s0w0w, TraPattern::P0s1w1w,
    TraPattern::P1s1w1w};

const char* tra_pattern_name(TraPattern p);
std::optional<TraPattern> tra_pattern_from_name(const std::string& name);
// Majority value the pattern stores when activation works correctly.
bool tra_pattern_majority(TraPattern p);

// Cells for a pattern under symmetric +/-variation: the strong cell gets cap
// 1+v and the two weak cells 1-v, charges taken from the pattern.
std::array<CellElectrical, 3> pattern_cells(TraPattern p, double variation_pct);

// TRA latency table indexed by pattern and variation percent, plus the
// single-cell activation latencies. FAIL entries are nullopt.
struct LatencyCalibration {
  static constexpr std::array<int, 6> kVariationGrid = {0, 5, 10, 15, 20, 25};

  std::array<std::array<std::optional<double>, 6>, 4> tra_ns{};
  double single_act_charged_ns = 20.9;
  double single_act_empty_ns = 13.5;
  double standard_act_ns = 35.0;

  static LatencyCalibration defaults();
  static LatencyCalibration from_json(const std::string& text);
  std::string to_json() const;
};

struct ActivationQuery {
  enum Kind { SINGLE_CHARGED, SINGLE_EMPTY, SINGLE_STANDARD, TRA } kind;
  TraPattern pattern = TraPattern::P0s0w0w;
  double variation_pct = 0.0;

  static ActivationQuery single_charged() { return {SINGLE_CHARGED}; }
  static ActivationQuery single_empty() { return {SINGLE_EMPTY}; }
  static ActivationQuery single_standard() { return {SINGLE_STANDARD}; }
  static ActivationQuery tra(TraPattern p, double variation_pct) {
    return {TRA, p, variation_pct};
  }
};

// Calibrated activation latency in ns; nullopt means the activation fails.
// TRA latencies interpolate linearly between grid points. Past the last
// numeric point a failing pattern reports FAIL, a non-failing one clamps.
std::optional<double> activation_latency(const ActivationQuery& q,
                                         const LatencyCalibration& cal);

// First grid variation percent at which the pattern's calibrated entry is
// FAIL; nullopt if the pattern never fails in the table.
std::optional<double> calibrated_failure_threshold(const LatencyCalibration& cal,
                                                   TraPattern p);

}  // namespace buddysim
