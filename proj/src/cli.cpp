#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "buddysim/config.h"
#include "buddysim/errors.h"

namespace buddysim {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SimError(ErrCode::BAD_CONFIG, "cannot write " + path.string());
  f << content;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

uint64_t derive_seed(uint64_t base, size_t index) {
  uint64_t x = base + 0x9e3779b97f4a7c15ull * (index + 1);
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdull;
  x ^= x >> 33;
  return x;
}

// ---- reliability sweep ----------------------------------------------------

std::string reliability_csv(const SimParams& sim, ReliabilityMode mode,
                            const std::vector<std::string>& pattern_names,
                            const std::vector<double>& variations) {
  std::string csv = "#schema_version=1\n";
  if (mode == ReliabilityMode::CALIBRATED)
    csv += "pattern,variation_pct,latency_ns,outcome\n";
  else
    csv += "pattern,variation_pct,delta_vdd,outcome,majority_ok,analytic_threshold_pct\n";

  ChargeShareConfig cs{22.0, 22.0 * sim.subarray.cb_over_cc,
                       sim.subarray.tie_epsilon};
  double threshold_pct = analytic_failure_threshold(cs) * 100.0;

  for (const auto& name : pattern_names) {
    auto p = tra_pattern_from_name(name);
    if (!p) throw SimError(ErrCode::BAD_CONFIG, "unknown pattern " + name);
    for (double v : variations) {
      if (mode == ReliabilityMode::CALIBRATED) {
        auto lat = activation_latency(ActivationQuery::tra(*p, v),
                                      sim.subarray.calibration);
        std::string outcome =
            lat ? (tra_pattern_majority(*p) ? "1" : "0") : "FAIL";
        csv += name + "," + fmt(v) + "," + (lat ? fmt(*lat) : "") + "," +
               outcome + "\n";
      } else {
        auto cells = pattern_cells(*p, v);
        double delta = charge_share_delta(cells, cs);
        TraOutcome o = tra_outcome(cells, cs);
        std::string outcome = o == TraOutcome::ONE   ? "1"
                              : o == TraOutcome::ZERO ? "0"
                                                      : "TIE";
        bool ok = (o == TraOutcome::ONE) == tra_pattern_majority(*p) &&
                  o != TraOutcome::FAIL_TIE;
        csv += name + "," + fmt(v) + "," + fmt(delta) + "," + outcome + "," +
               (ok ? "1" : "0") + "," + fmt(threshold_pct) + "\n";
      }
    }
  }
  return csv;
}

// ---- op microbenchmark ----------------------------------------------------

struct BenchOutcome {
  std::string csv;
  bool oracle_ok = true;
  bool any_fault = false;
};

BenchOutcome run_bench(const SimParams& sim, const std::vector<BitwiseOp>& ops,
                       const std::vector<int>& banks_list, uint64_t seed) {
  BenchOutcome out;
  out.csv =
      "#schema_version=1\n"
      "op,banks,mode,latency_ns,buddy_GBps,baseline_GBps,speedup,"
      "buddy_nJ_per_KB,baseline_nJ_per_KB,energy_reduction,tfaw_clamped\n";
  const double row_bytes = sim.subarray.row_bits / 8.0;
  std::mt19937_64 rng(seed);

  for (BitwiseOp op : ops) {
    // one functional run per op: compile, execute, check against the host
    Subarray sub(sim.subarray);
    BitRow a(sim.subarray.row_bits), b(sim.subarray.row_bits);
    a.randomize(rng);
    b.randomize(rng);
    sub.set_row(Wordline::data(0), a);
    sub.set_row(Wordline::data(1), b);
    CommandTrace trace = compile_bitwise(
        op, RowAddress::d(2), RowAddress::d(0),
        is_binary(op) ? std::optional<RowAddress>(RowAddress::d(1)) : std::nullopt);
    ExecutedTrace et = execute(trace, sub, sim.exec);
    out.any_fault |= et.any_fault;
    BitRow want = host_bitwise(op, a, is_binary(op) ? &b : nullptr);
    if (!et.any_fault && sub.row(Wordline::data(2)) != want) out.oracle_ok = false;

    for (int banks : banks_list) {
      CostReport r = op_cost_report(op, trace, sim.timing, sim.energy, sim.mode,
                                    row_bytes, banks, sim.host.channel_gbps);
      ThroughputResult tp =
          throughput(r.latency_ns, static_cast<int>(trace.activate_count()),
                     row_bytes, banks, sim.timing);
      out.csv += std::string(op_name(op)) + "," + std::to_string(banks) + "," +
                 aap_mode_name(sim.mode) + "," + fmt(r.latency_ns) + "," +
                 fmt(r.throughput_gbps) + "," + fmt(r.baseline_throughput_gbps) +
                 "," + fmt(r.speedup) + "," + fmt(r.energy_nJ_per_KB) + "," +
                 fmt(baseline_energy_nJ_per_KB(op, sim.energy)) + "," +
                 fmt(r.energy_reduction_factor) + "," +
                 (tp.clamped ? "1" : "0") + "\n";
    }
  }
  return out;
}

// ---- workload dispatch ----------------------------------------------------

WorkloadReport run_named_workload(const std::string& name,
                                  const std::string& params_json,
                                  uint64_t default_seed, const SimParams& sim) {
  json p = params_json.empty() ? json::object() : json::parse(params_json);
  auto u64 = [&](const char* key, uint64_t fb) {
    return p.contains(key) ? p[key].get<uint64_t>() : fb;
  };
  auto i32 = [&](const char* key, int fb) {
    return p.contains(key) ? p[key].get<int>() : fb;
  };
  if (name == "bitmap") {
    for (const auto& [k, _] : p.items())
      if (k != "m" && k != "n" && k != "density" && k != "seed")
        throw SimError(ErrCode::BAD_CONFIG, "unknown bitmap param '" + k + "'");
    BitmapQueryParams bp;
    bp.m = u64("m", bp.m);
    bp.n = i32("n", bp.n);
    bp.density = p.contains("density") ? p["density"].get<double>() : bp.density;
    bp.seed = u64("seed", default_seed);
    return run_bitmap_query(bp, sim);
  }
  if (name == "bitweaving") {
    for (const auto& [k, _] : p.items())
      if (k != "b" && k != "r" && k != "predicates" && k != "seed")
        throw SimError(ErrCode::BAD_CONFIG, "unknown bitweaving param '" + k + "'");
    BitweavingParams wp;
    wp.b = i32("b", wp.b);
    wp.r = u64("r", wp.r);
    wp.predicates = i32("predicates", wp.predicates);
    wp.seed = u64("seed", default_seed);
    return run_bitweaving_scan(wp, sim);
  }
  if (name == "sets") {
    for (const auto& [k, _] : p.items())
      if (k != "k" && k != "elements_per_set" && k != "domain_bits" && k != "seed")
        throw SimError(ErrCode::BAD_CONFIG, "unknown sets param '" + k + "'");
    SetOpsParams sp;
    sp.k = i32("k", sp.k);
    sp.elements_per_set = u64("elements_per_set", sp.elements_per_set);
    sp.domain_bits = i32("domain_bits", sp.domain_bits);
    sp.seed = u64("seed", default_seed);
    return run_set_ops(sp, sim);
  }
  throw SimError(ErrCode::BAD_CONFIG, "unknown workload '" + name + "'");
}

void write_workload_outputs(const std::filesystem::path& dir,
                            const WorkloadReport& rep) {
  json res = json::parse(rep.results_json);
  json doc;
  doc["schema_version"] = 1;
  doc["name"] = rep.name;
  doc["oracle_pass"] = rep.oracle_pass;
  doc["results"] = res;
  json counts;
  for (const auto& [k, v] : rep.counts.bitwise) counts[k] = v;
  counts["bitcount"] = rep.counts.bitcount;
  counts["copies"] = rep.counts.copies;
  doc["op_counts"] = counts;
  doc["cost"] = json::parse(rep.cost.to_json());
  doc["buddy_ns"] = rep.buddy_ns;
  doc["baseline_ns"] = rep.baseline_ns;
  doc["bitcount_ns"] = rep.bitcount_ns;
  write_file(dir / (rep.name + "_results.json"), doc.dump(2) + "\n");
  write_file(dir / (rep.name + "_trace.jsonl"), rep.trace.to_jsonl());
  if (rep.name == "sets") {
    for (const char* key : {"union", "intersection", "difference"}) {
      json part;
      part["schema_version"] = 1;
      part["operation"] = key;
      part[key] = res[key];
      write_file(dir / ("sets_" + std::string(key) + ".json"), part.dump(2) + "\n");
    }
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"buddysim - in-DRAM bulk bitwise operation simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::optional<uint64_t> seed_flag;
  std::optional<std::string> mode_flag, rel_flag, out_flag;
  bool allow_faults_flag = false;
  app.add_option("--config", config_path, "run configuration JSON")
      ->envname("BUDDYSIM_CONFIG");
  app.add_option("--seed", seed_flag, "seed overriding the config");
  app.add_option("--mode", mode_flag, "AAP timing: naive|optimized")
      ->check(CLI::IsMember({"naive", "optimized"}));
  app.add_option("--reliability", rel_flag, "reliability model: analytic|calibrated")
      ->check(CLI::IsMember({"analytic", "calibrated"}));
  app.add_option("--out", out_flag, "output directory");
  app.add_flag("--allow-faults", allow_faults_flag,
               "record reliability faults instead of aborting");

  auto* rel_cmd = app.add_subcommand("reliability", "activation reliability sweep");
  std::string patterns_arg = "0s0w0w,1s0w0w,0s1w1w,1s1w1w";
  std::string variations_arg = "0,5,10,15,20,25";
  rel_cmd->add_option("--patterns", patterns_arg, "comma separated patterns");
  rel_cmd->add_option("--variations", variations_arg, "comma separated percents");

  auto* bench_cmd = app.add_subcommand("bench", "per-op throughput/energy table");
  std::string ops_arg = "not,and,or,nand,nor,xor,xnor";
  std::string banks_arg = "1";
  bench_cmd->add_option("--ops", ops_arg, "comma separated ops");
  bench_cmd->add_option("--banks", banks_arg, "comma separated bank counts");

  auto* wl_cmd = app.add_subcommand("workload", "run application workloads");
  std::optional<std::string> wl_name;
  std::optional<uint64_t> wl_m, wl_r, wl_elements;
  std::optional<int> wl_n, wl_b, wl_predicates, wl_k, wl_domain_bits;
  std::optional<double> wl_density;
  wl_cmd->add_option("--name", wl_name, "bitmap|bitweaving|sets (default: config list)");
  wl_cmd->add_option("--m", wl_m, "bitmap: users");
  wl_cmd->add_option("--n", wl_n, "bitmap: weeks");
  wl_cmd->add_option("--density", wl_density, "bitmap: bit density");
  wl_cmd->add_option("--b", wl_b, "bitweaving: bits per value");
  wl_cmd->add_option("--r", wl_r, "bitweaving: rows");
  wl_cmd->add_option("--predicates", wl_predicates, "bitweaving: predicate count");
  wl_cmd->add_option("--k", wl_k, "sets: number of sets");
  wl_cmd->add_option("--elements", wl_elements, "sets: elements per set");
  wl_cmd->add_option("--domain-bits", wl_domain_bits, "sets: domain size log2");

  auto* dump_cmd = app.add_subcommand("trace-dump", "print a compiled op trace");
  std::string dump_op = "and", dump_dst = "D2", dump_src1 = "D0", dump_src2 = "D1";
  std::string dump_to = "-";
  dump_cmd->add_option("--op", dump_op, "bitwise op");
  dump_cmd->add_option("--dst", dump_dst, "destination D address");
  dump_cmd->add_option("--src1", dump_src1, "first source D address");
  dump_cmd->add_option("--src2", dump_src2, "second source D address");
  dump_cmd->add_option("--to", dump_to, "output file, - for stdout");

  std::vector<const char*> argv;
  argv.push_back("buddysim");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    if (seed_flag) cfg.seed = *seed_flag;
    if (mode_flag) cfg.mode = *mode_flag == "naive" ? AapMode::NAIVE : AapMode::OPTIMIZED;
    if (rel_flag)
      cfg.reliability = *rel_flag == "analytic" ? ReliabilityMode::ANALYTIC
                                                : ReliabilityMode::CALIBRATED;
    if (out_flag) cfg.out_dir = *out_flag;
    if (allow_faults_flag) cfg.allow_faults = true;
    SimParams sim = cfg.to_sim_params();

    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    bool any_fault = false;
    bool oracle_ok = true;

    if (rel_cmd->parsed()) {
      std::vector<double> variations;
      for (const auto& v : split_csv(variations_arg)) variations.push_back(std::stod(v));
      std::string csv = reliability_csv(sim, cfg.reliability, split_csv(patterns_arg),
                                        variations);
      write_file(dir / "reliability.csv", csv);
      out << "reliability: wrote " << (dir / "reliability.csv").string() << "\n";
    } else if (bench_cmd->parsed()) {
      std::vector<BitwiseOp> ops;
      for (const auto& name : split_csv(ops_arg)) {
        auto op = op_from_name(name);
        if (!op) throw SimError(ErrCode::BAD_CONFIG, "unknown op '" + name + "'");
        ops.push_back(*op);
      }
      std::vector<int> banks;
      for (const auto& b : split_csv(banks_arg)) banks.push_back(std::stoi(b));
      if (banks.empty()) banks.push_back(cfg.banks);
      BenchOutcome b = run_bench(sim, ops, banks, cfg.seed);
      any_fault |= b.any_fault;
      oracle_ok &= b.oracle_ok;
      write_file(dir / "bench.csv", b.csv);
      out << b.csv;
    } else if (wl_cmd->parsed()) {
      std::vector<WorkloadSpec> specs;
      if (wl_name) {
        json p = json::object();
        if (*wl_name == "bitmap") {
          if (wl_m) p["m"] = *wl_m;
          if (wl_n) p["n"] = *wl_n;
          if (wl_density) p["density"] = *wl_density;
        } else if (*wl_name == "bitweaving") {
          if (wl_b) p["b"] = *wl_b;
          if (wl_r) p["r"] = *wl_r;
          if (wl_predicates) p["predicates"] = *wl_predicates;
        } else if (*wl_name == "sets") {
          if (wl_k) p["k"] = *wl_k;
          if (wl_elements) p["elements_per_set"] = *wl_elements;
          if (wl_domain_bits) p["domain_bits"] = *wl_domain_bits;
        }
        specs.push_back({*wl_name, p.dump()});
      } else {
        specs = cfg.workloads;
      }
      if (specs.empty())
        throw SimError(ErrCode::BAD_CONFIG,
                       "no workload named and none configured");
      for (size_t i = 0; i < specs.size(); ++i) {
        WorkloadReport rep = run_named_workload(specs[i].name, specs[i].params_json,
                                                derive_seed(cfg.seed, i), sim);
        any_fault |= rep.any_fault;
        oracle_ok &= rep.oracle_pass;
        write_workload_outputs(dir, rep);
        out << "workload " << rep.name << ": oracle "
            << (rep.oracle_pass ? "PASS" : "FAIL") << " speedup "
            << fmt(rep.cost.speedup) << "\n";
      }
    } else if (dump_cmd->parsed()) {
      auto op = op_from_name(dump_op);
      if (!op) throw SimError(ErrCode::BAD_CONFIG, "unknown op '" + dump_op + "'");
      auto dst = RowAddress::parse(dump_dst);
      auto s1 = RowAddress::parse(dump_src1);
      auto s2 = RowAddress::parse(dump_src2);
      if (!dst || !s1 || (is_binary(*op) && !s2))
        throw SimError(ErrCode::BAD_CONFIG, "bad operand address");
      CommandTrace t = compile_bitwise(
          *op, *dst, *s1,
          is_binary(*op) ? std::optional<RowAddress>(*s2) : std::nullopt);
      if (dump_to == "-")
        out << t.to_jsonl();
      else
        write_file(dir / dump_to, t.to_jsonl());
    }

    if (any_fault && !cfg.allow_faults) {
      err << "reliability fault encountered\n";
      return 2;
    }
    if (!oracle_ok) {
      err << "oracle mismatch\n";
      return 2;
    }
    if (any_fault) out << "reliability faults recorded (allowed)\n";
    return 0;
  } catch (const SimError& e) {
    if (e.code() == ErrCode::RELIABILITY_FAULT) {
      err << e.what() << "\n";
      return 2;
    }
    err << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 1;
  }
}

}  // namespace buddysim
