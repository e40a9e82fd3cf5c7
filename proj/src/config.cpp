#include "buddysim/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "buddysim/errors.h"

namespace buddysim {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!known.count(key))
      throw SimError(ErrCode::BAD_CONFIG,
                     "unknown key '" + key + "' in " + where);
}

double num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw SimError(ErrCode::BAD_CONFIG, std::string(key) + " must be a number");
  return j[key].get<double>();
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SimError(ErrCode::BAD_CONFIG, std::string("config json: ") + e.what());
  }
  if (!j.is_object()) throw SimError(ErrCode::BAD_CONFIG, "config must be an object");
  reject_unknown(j, {"schema_version", "seed", "row_bits", "banks", "mode",
                     "out_dir", "allow_faults", "timing", "energy",
                     "reliability", "host", "workloads"},
                 "config");

  RunConfig c;
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("row_bits")) c.row_bits = j["row_bits"].get<int>();
  if (j.contains("banks")) c.banks = j["banks"].get<int>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("allow_faults")) c.allow_faults = j["allow_faults"].get<bool>();
  if (j.contains("mode")) {
    std::string m = j["mode"].get<std::string>();
    if (m == "naive")
      c.mode = AapMode::NAIVE;
    else if (m == "optimized")
      c.mode = AapMode::OPTIMIZED;
    else
      throw SimError(ErrCode::BAD_CONFIG, "mode must be naive or optimized");
  }

  if (j.contains("timing")) {
    const json& t = j["timing"];
    reject_unknown(t,
                   {"tras_ns", "trp_ns", "aap_overlap_extra_ns", "tfaw_ns",
                    "psm_bus_bytes_per_ns", "flush_ns_per_row"},
                   "timing");
    c.timing.tras_ns = num(t, "tras_ns", c.timing.tras_ns);
    c.timing.trp_ns = num(t, "trp_ns", c.timing.trp_ns);
    c.timing.aap_overlap_extra_ns =
        num(t, "aap_overlap_extra_ns", c.timing.aap_overlap_extra_ns);
    c.timing.tfaw_ns = num(t, "tfaw_ns", c.timing.tfaw_ns);
    c.timing.psm_bus_bytes_per_ns =
        num(t, "psm_bus_bytes_per_ns", c.timing.psm_bus_bytes_per_ns);
    c.timing.flush_ns_per_row = num(t, "flush_ns_per_row", c.timing.flush_ns_per_row);
  }

  if (j.contains("energy")) {
    const json& e = j["energy"];
    reject_unknown(e,
                   {"auto_calibrate", "e_act_nJ", "e_pre_nJ", "e_act_second_nJ",
                    "ddr_transfer_nJ_per_KB"},
                   "energy");
    if (e.contains("auto_calibrate"))
      c.energy_auto_calibrate = e["auto_calibrate"].get<bool>();
    if (!c.energy_auto_calibrate) {
      c.energy.e_act_nJ = num(e, "e_act_nJ", 0.0);
      c.energy.e_pre_nJ = num(e, "e_pre_nJ", 0.0);
      c.energy.e_act_second_nJ = num(e, "e_act_second_nJ", 0.0);
      c.energy.calibrated = true;
    }
    c.energy.ddr_transfer_nJ_per_KB =
        num(e, "ddr_transfer_nJ_per_KB", c.energy.ddr_transfer_nJ_per_KB);
  }

  if (j.contains("reliability")) {
    const json& r = j["reliability"];
    reject_unknown(r,
                   {"mode", "variation_pct", "cb_over_cc", "tie_epsilon",
                    "stale_window_ops", "calibration_file"},
                   "reliability");
    if (r.contains("mode")) {
      std::string m = r["mode"].get<std::string>();
      if (m == "analytic")
        c.reliability = ReliabilityMode::ANALYTIC;
      else if (m == "calibrated")
        c.reliability = ReliabilityMode::CALIBRATED;
      else
        throw SimError(ErrCode::BAD_CONFIG,
                       "reliability mode must be analytic or calibrated");
    }
    c.variation_pct = num(r, "variation_pct", c.variation_pct);
    c.cb_over_cc = num(r, "cb_over_cc", c.cb_over_cc);
    c.tie_epsilon = num(r, "tie_epsilon", c.tie_epsilon);
    if (r.contains("stale_window_ops"))
      c.stale_window_ops = r["stale_window_ops"].get<uint64_t>();
    if (r.contains("calibration_file"))
      c.calibration_file = r["calibration_file"].get<std::string>();
  }

  if (j.contains("host")) {
    const json& h = j["host"];
    reject_unknown(h, {"bitcount_gbps", "channel_gbps"}, "host");
    c.host.bitcount_gbps = num(h, "bitcount_gbps", c.host.bitcount_gbps);
    c.host.channel_gbps = num(h, "channel_gbps", c.host.channel_gbps);
  }

  if (j.contains("workloads")) {
    if (!j["workloads"].is_array())
      throw SimError(ErrCode::BAD_CONFIG, "workloads must be an array");
    for (const auto& w : j["workloads"]) {
      if (!w.is_object() || !w.contains("name"))
        throw SimError(ErrCode::BAD_CONFIG, "each workload needs a name");
      WorkloadSpec spec;
      spec.name = w["name"].get<std::string>();
      json params = w;
      params.erase("name");
      spec.params_json = params.dump();
      c.workloads.push_back(std::move(spec));
    }
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError(ErrCode::BAD_CONFIG, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["seed"] = seed;
  j["row_bits"] = row_bits;
  j["banks"] = banks;
  j["mode"] = aap_mode_name(mode);
  j["out_dir"] = out_dir;
  j["allow_faults"] = allow_faults;
  j["timing"] = {{"tras_ns", timing.tras_ns},
                 {"trp_ns", timing.trp_ns},
                 {"aap_overlap_extra_ns", timing.aap_overlap_extra_ns},
                 {"tfaw_ns", timing.tfaw_ns},
                 {"psm_bus_bytes_per_ns", timing.psm_bus_bytes_per_ns},
                 {"flush_ns_per_row", timing.flush_ns_per_row}};
  j["energy"] = {{"auto_calibrate", energy_auto_calibrate},
                 {"ddr_transfer_nJ_per_KB", energy.ddr_transfer_nJ_per_KB}};
  j["reliability"] = {
      {"mode", reliability == ReliabilityMode::ANALYTIC ? "analytic" : "calibrated"},
      {"variation_pct", variation_pct},
      {"cb_over_cc", cb_over_cc},
      {"tie_epsilon", tie_epsilon},
      {"stale_window_ops", stale_window_ops},
      {"calibration_file", calibration_file}};
  j["host"] = {{"bitcount_gbps", host.bitcount_gbps},
               {"channel_gbps", host.channel_gbps}};
  json ws = json::array();
  for (const auto& w : workloads) {
    json e = json::parse(w.params_json);
    e["name"] = w.name;
    ws.push_back(std::move(e));
  }
  j["workloads"] = ws;
  return j.dump(2);
}

SimParams RunConfig::to_sim_params() const {
  SimParams s;
  s.subarray.row_bits = row_bits;
  s.subarray.reliability = reliability;
  s.subarray.variation_pct = variation_pct;
  s.subarray.cb_over_cc = cb_over_cc;
  s.subarray.tie_epsilon = tie_epsilon;
  s.subarray.stale_window_ops = stale_window_ops;
  if (!calibration_file.empty()) {
    std::ifstream in(calibration_file);
    if (!in)
      throw SimError(ErrCode::BAD_CONFIG,
                     "cannot open calibration file " + calibration_file);
    std::stringstream ss;
    ss << in.rdbuf();
    s.subarray.calibration = LatencyCalibration::from_json(ss.str());
  }
  s.timing = timing;
  if (energy_auto_calibrate) {
    EnergyParams e = default_energy_params();
    e.ddr_transfer_nJ_per_KB = energy.ddr_transfer_nJ_per_KB;
    s.energy = e;
  } else {
    s.energy = energy;
  }
  s.mode = mode;
  s.banks = banks;
  s.host = host;
  s.exec.allow_faults = allow_faults;
  s.subarray.validate();
  s.timing.validate();
  return s;
}

}  // namespace buddysim
