#include "buddysim/cost.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "buddysim/errors.h"

namespace buddysim {

void TimingParams::validate() const {
  if (!(tras_ns > 0) || !(trp_ns > 0))
    throw SimError(ErrCode::BAD_CONFIG, "tRAS and tRP must be positive");
  if (!(aap_overlap_extra_ns >= 0))
    throw SimError(ErrCode::BAD_CONFIG, "aap_overlap_extra_ns must be >= 0");
  if (!(tfaw_ns > 0)) throw SimError(ErrCode::BAD_CONFIG, "tFAW must be positive");
  if (!(psm_bus_bytes_per_ns > 0))
    throw SimError(ErrCode::BAD_CONFIG, "psm_bus_bytes_per_ns must be positive");
  if (!(flush_ns_per_row >= 0))
    throw SimError(ErrCode::BAD_CONFIG, "flush_ns_per_row must be >= 0");
}

const char* aap_mode_name(AapMode m) {
  return m == AapMode::NAIVE ? "naive" : "optimized";
}

namespace {
bool has_b_group(const DramCommand& a, const DramCommand& b) {
  return (a.addr && a.addr->group == AddrGroup::B) ||
         (b.addr && b.addr->group == AddrGroup::B);
}
}  // namespace

double trace_latency(const CommandTrace& t, const TimingParams& p, AapMode mode) {
  p.validate();
  t.validate();
  double ns = 0.0;
  size_t i = 0;
  while (i < t.commands.size()) {
    const DramCommand& c = t.commands[i];
    if (c.kind == CmdKind::ACTIVATE && c.role == CmdRole::FIRST_OF_AAP) {
      // The overlapped rate needs the split B-group decoder; an AAP between
      // two C/D-group addresses serializes even in optimized mode.
      bool overlap = mode == AapMode::OPTIMIZED && has_b_group(c, t.commands[i + 1]);
      ns += overlap ? p.aap_optimized_ns() : p.aap_naive_ns();
      i += 3;
      continue;
    }
    if (c.kind == CmdKind::ACTIVATE) {  // standalone: AP (plus free READ/WRITEs)
      ns += p.tras_ns;
      ++i;
      continue;
    }
    if (c.kind == CmdKind::PRECHARGE) {
      ns += p.trp_ns;
      ++i;
      continue;
    }
    ++i;  // READ/WRITE carry no cost in this model
  }
  for (const auto& x : t.transfers)
    ns += static_cast<double>(x.bytes) / p.psm_bus_bytes_per_ns;
  return ns;
}

double EnergyParams::wordline_factor(int wordlines) {
  return 1.0 + 0.22 * (wordlines - 1);
}

std::vector<std::pair<BitwiseOp, double>> default_energy_targets() {
  return {{BitwiseOp::NOT, 1.6},
          {BitwiseOp::AND, 3.2},
          {BitwiseOp::NAND, 4.0},
          {BitwiseOp::XOR, 5.5}};
}

namespace {

struct TraceCoeffs {
  double act_first = 0.0;   // sum of wordline factors over first/standalone ACTs
  double act_second = 0.0;  // sum of wordline factors over second ACTs
  double pre = 0.0;
};

TraceCoeffs coeffs_of(const CommandTrace& t) {
  TraceCoeffs c;
  for (const auto& cmd : t.commands) {
    switch (cmd.kind) {
      case CmdKind::ACTIVATE:
        if (cmd.role == CmdRole::SECOND_OF_AAP)
          c.act_second += EnergyParams::wordline_factor(cmd.wordlines);
        else
          c.act_first += EnergyParams::wordline_factor(cmd.wordlines);
        break;
      case CmdKind::PRECHARGE:
        c.pre += 1.0;
        break;
      default:
        break;
    }
  }
  return c;
}

CommandTrace reference_trace(BitwiseOp op) {
  return compile_bitwise(op, RowAddress::d(2), RowAddress::d(0),
                         is_binary(op) ? std::optional<RowAddress>(RowAddress::d(1))
                                       : std::nullopt);
}

// Solves the 3x3 system M*x = r by Cramer's rule.
bool solve3(const double M[3][3], const double r[3], double x[3]) {
  auto det3 = [](const double A[3][3]) {
    return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
           A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
           A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
  };
  double d = det3(M);
  if (std::abs(d) < 1e-30) return false;
  for (int k = 0; k < 3; ++k) {
    double A[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A[i][j] = j == k ? r[i] : M[i][j];
    x[k] = det3(A) / d;
  }
  return true;
}

}  // namespace

EnergyFit calibrate_energy(const std::vector<std::pair<BitwiseOp, double>>& targets,
                           double row_bytes) {
  if (targets.size() < 2)
    throw SimError(ErrCode::BAD_CONFIG, "calibration needs at least two targets");
  const double row_kb = row_bytes / 1024.0;

  // Rows scaled by 1/target so the least squares minimizes relative error.
  std::vector<std::array<double, 3>> A;
  std::vector<double> b;
  for (const auto& [op, nj_per_kb] : targets) {
    if (!(nj_per_kb > 0))
      throw SimError(ErrCode::BAD_CONFIG, "energy target must be positive");
    TraceCoeffs c = coeffs_of(reference_trace(op));
    double total = nj_per_kb * row_kb;
    A.push_back({c.act_first / total, c.act_second / total, c.pre / total});
    b.push_back(1.0);
  }

  // Normal equations with a whisper of Tikhonov so a rank-deficient target
  // set (two ops) still yields the minimum-norm exact fit.
  auto solve_masked = [&](const bool active[3], double x[3]) {
    double M[3][3] = {};
    double r[3] = {};
    double tr = 0.0;
    for (size_t n = 0; n < A.size(); ++n)
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) M[i][j] += A[n][i] * A[n][j];
        r[i] += A[n][i] * b[n];
      }
    for (int i = 0; i < 3; ++i) tr += M[i][i];
    double lambda = 1e-12 * (tr > 0 ? tr : 1.0);
    for (int i = 0; i < 3; ++i) {
      M[i][i] += lambda;
      if (!active[i]) {
        for (int j = 0; j < 3; ++j) M[i][j] = M[j][i] = 0.0;
        M[i][i] = 1.0;
        r[i] = 0.0;
      }
    }
    if (!solve3(M, r, x))
      throw SimError(ErrCode::FIT_DIVERGED, "singular calibration system");
  };

  bool active[3] = {true, true, true};
  double x[3];
  solve_masked(active, x);
  // One clamp pass: negative energies are unphysical; pin them at zero.
  bool clamped = false;
  for (int i = 0; i < 3; ++i)
    if (x[i] < 0) {
      active[i] = false;
      clamped = true;
    }
  if (clamped) solve_masked(active, x);
  for (int i = 0; i < 3; ++i) x[i] = std::max(x[i], 0.0);

  EnergyFit fit;
  fit.params.e_act_nJ = x[0];
  fit.params.e_act_second_nJ = x[1];
  fit.params.e_pre_nJ = x[2];
  fit.params.row_bytes_ref = row_bytes;
  fit.params.calibrated = true;

  for (auto op : kAllOps) {
    TraceCoeffs c = coeffs_of(reference_trace(op));
    double nj = c.act_first * x[0] + c.act_second * x[1] + c.pre * x[2];
    fit.per_op_nJ_per_KB.emplace_back(op, nj / row_kb);
  }
  fit.max_rel_error = 0.0;
  for (const auto& [op, tgt] : targets) {
    for (const auto& [op2, got] : fit.per_op_nJ_per_KB)
      if (op2 == op)
        fit.max_rel_error = std::max(fit.max_rel_error, std::abs(got - tgt) / tgt);
  }
  if (fit.max_rel_error > 0.25)
    throw SimError(ErrCode::FIT_DIVERGED,
                   "calibration misses a target by " +
                       std::to_string(fit.max_rel_error * 100.0) + "%");
  return fit;
}

const EnergyParams& default_energy_params() {
  static const EnergyParams params = calibrate_energy(default_energy_targets()).params;
  return params;
}

double trace_energy_nJ(const CommandTrace& t, const EnergyParams& e) {
  if (!e.calibrated)
    throw SimError(ErrCode::UNCALIBRATED, "energy parameters not calibrated");
  TraceCoeffs c = coeffs_of(t);
  return c.act_first * e.e_act_nJ + c.act_second * e.e_act_second_nJ +
         c.pre * e.e_pre_nJ;
}

double trace_energy_nJ_per_KB(const CommandTrace& t, const EnergyParams& e,
                              double result_bytes) {
  if (!(result_bytes > 0))
    throw SimError(ErrCode::BAD_CONFIG, "result_bytes must be positive");
  return trace_energy_nJ(t, e) / (result_bytes / 1024.0);
}

ThroughputResult throughput(double trace_latency_ns, int activates_in_trace,
                            double row_bytes, int banks, const TimingParams& t) {
  t.validate();
  if (banks < 1) throw SimError(ErrCode::BAD_CONFIG, "banks must be >= 1");
  if (!(trace_latency_ns > 0))
    throw SimError(ErrCode::BAD_CONFIG, "latency must be positive");
  ThroughputResult r;
  double single = row_bytes / trace_latency_ns;  // bytes/ns == GB/s
  r.linear_gbps = single * banks;
  if (activates_in_trace <= 0) {
    r.gbps = r.linear_gbps;
    return r;
  }
  // The rank issues at most 4 ACTIVATEs per tFAW; each bank wants
  // activates/latency of that budget.
  double max_banks = 4.0 * trace_latency_ns / (t.tfaw_ns * activates_in_trace);
  double eff_banks = std::min(static_cast<double>(banks), max_banks);
  r.clamped = eff_banks < banks;
  r.gbps = single * eff_banks;
  return r;
}

int baseline_traffic_factor(BitwiseOp op) {
  return is_binary(op) ? 3 : 2;  // sources read + result written per result byte
}

double baseline_throughput_gbps(BitwiseOp op, double channel_gbps) {
  if (!(channel_gbps > 0))
    throw SimError(ErrCode::BAD_CONFIG, "channel bandwidth must be positive");
  return channel_gbps / baseline_traffic_factor(op);
}

double baseline_energy_nJ_per_KB(BitwiseOp op, const EnergyParams& e) {
  return baseline_traffic_factor(op) * e.ddr_transfer_nJ_per_KB;
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace

std::string CostReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["latency_ns"] = latency_ns;
  j["energy_nJ_per_KB"] = energy_nJ_per_KB;
  j["throughput_GBps"] = throughput_gbps;
  j["baseline_throughput_GBps"] = baseline_throughput_gbps;
  j["speedup"] = speedup;
  j["energy_reduction_factor"] = energy_reduction_factor;
  return j.dump();
}

std::string CostReport::csv_header() {
  return "label,latency_ns,energy_nJ_per_KB,throughput_GBps,"
         "baseline_throughput_GBps,speedup,energy_reduction_factor";
}

std::string CostReport::csv_row(const std::string& label) const {
  return label + "," + fmt(latency_ns) + "," + fmt(energy_nJ_per_KB) + "," +
         fmt(throughput_gbps) + "," + fmt(baseline_throughput_gbps) + "," +
         fmt(speedup) + "," + fmt(energy_reduction_factor);
}

CostReport op_cost_report(BitwiseOp op, const CommandTrace& trace,
                          const TimingParams& t, const EnergyParams& e,
                          AapMode mode, double row_bytes, int banks,
                          double channel_gbps) {
  CostReport r;
  r.latency_ns = trace_latency(trace, t, mode);
  r.energy_nJ_per_KB = trace_energy_nJ_per_KB(trace, e, row_bytes);
  ThroughputResult tp = throughput(r.latency_ns,
                                   static_cast<int>(trace.activate_count()),
                                   row_bytes, banks, t);
  r.throughput_gbps = tp.gbps;
  r.baseline_throughput_gbps = baseline_throughput_gbps(op, channel_gbps);
  r.speedup = r.throughput_gbps / r.baseline_throughput_gbps;
  double base_e = baseline_energy_nJ_per_KB(op, e);
  r.energy_reduction_factor = base_e / r.energy_nJ_per_KB;
  return r;
}

}  // namespace buddysim
