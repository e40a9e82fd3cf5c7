#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "buddysim/workloads.h"

namespace buddysim {

struct WorkloadSpec {
  std::string name;  // bitmap | bitweaving | sets
  std::string params_json;
};

// Batch run configuration. JSON with strict key checking: unknown keys are
// rejected, every field has a shipped default.
struct RunConfig {
  uint64_t seed = 1;
  int row_bits = 65536;
  int banks = 1;
  AapMode mode = AapMode::OPTIMIZED;
  std::string out_dir = "out";
  bool allow_faults = false;

  TimingParams timing;
  bool energy_auto_calibrate = true;
  EnergyParams energy;  // used when auto calibration is off

  ReliabilityMode reliability = ReliabilityMode::CALIBRATED;
  double variation_pct = 0.0;
  double cb_over_cc = 4.0;
  double tie_epsilon = 1e-9;
  uint64_t stale_window_ops = 64;
  std::string calibration_file;

  HostCostParams host;
  std::vector<WorkloadSpec> workloads;

  static RunConfig from_json(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json() const;

  SimParams to_sim_params() const;
};

// CLI entry point shared by the binary and the tests.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace buddysim
