// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured numbers. Run through ctest (acceptance_c1..c9) or
// directly: ./acceptance_tests
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "buddysim/config.h"
#include "buddysim/errors.h"

using namespace buddysim;
namespace fs = std::filesystem;

namespace {

void report(int crit, const char* name, bool pass, const std::string& detail) {
  std::string line = "ACCEPTANCE C" + std::to_string(crit) + " " + name + ": " +
                     (pass ? "PASS" : "FAIL");
  if (!detail.empty()) line += " (" + detail + ")";
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("buddysim_acceptance_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

TEST_CASE("c1_functional_completeness") {
  double t0 = now_seconds();
  SubarrayConfig cfg;
  cfg.row_bits = 8192;  // 1 KB rows
  cfg.data_rows = 8;
  std::mt19937_64 rng(0xC1);
  bool pass = true;
  for (BitwiseOp op : kAllOps) {
    CommandTrace trace = compile_bitwise(
        op, RowAddress::d(2), RowAddress::d(0),
        is_binary(op) ? std::optional<RowAddress>(RowAddress::d(1)) : std::nullopt);
    for (int trial = 0; trial < 1000; ++trial) {
      Subarray sub(cfg);
      BitRow a(cfg.row_bits), b(cfg.row_bits);
      a.randomize(rng);
      b.randomize(rng);
      sub.set_row(Wordline::data(0), a);
      sub.set_row(Wordline::data(1), b);
      execute(trace, sub);
      pass &= sub.row(Wordline::data(2)) ==
              host_bitwise(op, a, is_binary(op) ? &b : nullptr);
      pass &= sub.row(Wordline::data(0)) == a;
      if (is_binary(op)) pass &= sub.row(Wordline::data(1)) == b;
      if (!pass) break;
    }
  }
  double elapsed = now_seconds() - t0;
  pass &= elapsed < 10.0;
  report(1, "functional completeness, 7 ops x 1000 random 1 KB row pairs", pass,
         fmt(elapsed) + " s");
  CHECK(pass);
}

TEST_CASE("c2_majority_and_sign_law") {
  bool majority_ok = true;
  ChargeShareConfig nominal;
  for (int bits = 0; bits < 8; ++bits) {
    int a = bits & 1, b = (bits >> 1) & 1, c = (bits >> 2) & 1;
    std::array<CellElectrical, 3> cells = {
        CellElectrical{static_cast<double>(a), 1.0},
        CellElectrical{static_cast<double>(b), 1.0},
        CellElectrical{static_cast<double>(c), 1.0}};
    TraOutcome o = tra_outcome(cells, nominal);
    majority_ok &= o == (a + b + c >= 2 ? TraOutcome::ONE : TraOutcome::ZERO);
  }

  bool sign_ok = true;
  std::mt19937_64 rng(0xC2);
  std::uniform_real_distribution<double> cb(0.05, 50.0);
  for (int trial = 0; trial < 1000; ++trial) {
    ChargeShareConfig c;
    c.bitline_cap_fF = c.cell_cap_fF * cb(rng);
    int bits = static_cast<int>(rng() % 8);
    int k = (bits & 1) + ((bits >> 1) & 1) + ((bits >> 2) & 1);
    std::array<CellElectrical, 3> cells = {
        CellElectrical{static_cast<double>(bits & 1), 1.0},
        CellElectrical{static_cast<double>((bits >> 1) & 1), 1.0},
        CellElectrical{static_cast<double>((bits >> 2) & 1), 1.0}};
    double delta = charge_share_delta(cells, c);
    sign_ok &= (delta > 0) == (k >= 2);
  }
  bool pass = majority_ok && sign_ok;
  report(2, "majority law (8 patterns) and sign law (1000 random C_b)", pass,
         std::string("majority ") + (majority_ok ? "ok" : "bad") + ", sign " +
             (sign_ok ? "ok" : "bad"));
  CHECK(pass);
}

TEST_CASE("c3_variation_table_and_analytic_threshold") {
  fs::path dir = temp_dir("c3");
  std::ostringstream out, err;
  int rc = cli_main({"--out", dir.string(), "reliability"}, out, err);
  bool pass = rc == 0;

  const std::string expected =
      "#schema_version=1\n"
      "pattern,variation_pct,latency_ns,outcome\n"
      "0s0w0w,0,16.4,0\n"
      "0s0w0w,5,16.3,0\n"
      "0s0w0w,10,16.3,0\n"
      "0s0w0w,15,16.4,0\n"
      "0s0w0w,20,16.3,0\n"
      "0s0w0w,25,16.2,0\n"
      "1s0w0w,0,18.3,0\n"
      "1s0w0w,5,18.6,0\n"
      "1s0w0w,10,18.8,0\n"
      "1s0w0w,15,19.1,0\n"
      "1s0w0w,20,19.7,0\n"
      "1s0w0w,25,,FAIL\n"
      "0s1w1w,0,24.9,1\n"
      "0s1w1w,5,25,1\n"
      "0s1w1w,10,25.2,1\n"
      "0s1w1w,15,25.3,1\n"
      "0s1w1w,20,25.4,1\n"
      "0s1w1w,25,25.7,1\n"
      "1s1w1w,0,22.5,1\n"
      "1s1w1w,5,22.3,1\n"
      "1s1w1w,10,22.2,1\n"
      "1s1w1w,15,22.2,1\n"
      "1s1w1w,20,22.2,1\n"
      "1s1w1w,25,22.1,1\n";
  std::string csv = slurp(dir / "reliability.csv");
  bool grid_ok = csv == expected;
  pass &= grid_ok;

  // bisection over the charge-sharing deviation for the 1s0w0w pattern
  ChargeShareConfig cs;
  auto delta_at = [&](double v_pct) {
    return charge_share_delta(pattern_cells(TraPattern::P1s0w0w, v_pct), cs);
  };
  double lo = 0.0, hi = 90.0;
  for (int i = 0; i < 80; ++i) {
    double mid = (lo + hi) / 2;
    if (delta_at(mid) >= 0)
      hi = mid;
    else
      lo = mid;
  }
  double bisected = hi / 100.0;
  double analytic = analytic_failure_threshold(cs);
  bool threshold_ok = std::abs(bisected - 1.0 / 3.0) <= 0.005 * (1.0 / 3.0) &&
                      std::abs(analytic - 1.0 / 3.0) <= 0.005 * (1.0 / 3.0);
  pass &= threshold_ok;
  report(3, "variation table reproduced exactly; analytic threshold 1/3", pass,
         std::string("grid ") + (grid_ok ? "exact" : "MISMATCH") +
             ", bisected threshold " + fmt(bisected * 100) + "%");
  CHECK(pass);
}

TEST_CASE("c4_aap_latencies") {
  TimingParams t;
  auto trace = [](BitwiseOp op) {
    return compile_bitwise(op, RowAddress::d(2), RowAddress::d(0),
                           is_binary(op) ? std::optional<RowAddress>(RowAddress::d(1))
                                         : std::nullopt);
  };
  double opt = t.aap_optimized_ns();
  double naive = t.aap_naive_ns();
  double and_ns = trace_latency(trace(BitwiseOp::AND), t, AapMode::OPTIMIZED);
  double not_ns = trace_latency(trace(BitwiseOp::NOT), t, AapMode::OPTIMIZED);
  bool pass = opt == 49.0 && naive == 80.0 && and_ns == 196.0 && not_ns == 98.0;
  report(4, "AAP latency 49/80 ns; AND 196 ns; NOT 98 ns", pass,
         "aap opt " + fmt(opt) + ", naive " + fmt(naive) + ", and " + fmt(and_ns) +
             ", not " + fmt(not_ns));
  CHECK(pass);
}

TEST_CASE("c5_energy_calibration") {
  EnergyFit fit = calibrate_energy(default_energy_targets());
  bool fit_ok = fit.max_rel_error <= 0.25;

  double not_base = baseline_energy_nJ_per_KB(BitwiseOp::NOT, fit.params);
  double and_base = baseline_energy_nJ_per_KB(BitwiseOp::AND, fit.params);
  bool base_ok = std::abs(not_base - 93.7) / 93.7 <= 0.03 &&
                 std::abs(and_base - 137.9) / 137.9 <= 0.03;
  bool pass = fit_ok && base_ok;
  report(5, "energy fit <= 25% relative error; channel model within 3%", pass,
         "achieved fit error " + fmt(fit.max_rel_error * 100) + "%, baseline not " +
             fmt(not_base) + " nJ/KB, and " + fmt(and_base) + " nJ/KB");
  CHECK(pass);
}

TEST_CASE("c6_throughput_band_and_scaling") {
  TimingParams t;
  const double row_bytes = 8192;
  const double channel = 28.8;
  std::string ratios;
  bool band_ok = true;
  bool scaling_ok = true;
  for (BitwiseOp op : kAllOps) {
    CommandTrace trace = compile_bitwise(
        op, RowAddress::d(2), RowAddress::d(0),
        is_binary(op) ? std::optional<RowAddress>(RowAddress::d(1)) : std::nullopt);
    double lat = trace_latency(trace, t, AapMode::OPTIMIZED);
    int acts = static_cast<int>(trace.activate_count());
    ThroughputResult one = throughput(lat, acts, row_bytes, 1, t);
    double ratio = one.gbps / baseline_throughput_gbps(op, channel);
    if (!(ratio >= 2.7 && ratio <= 6.4)) band_ok = false;
    if (!ratios.empty()) ratios += " ";
    ratios += std::string(op_name(op)) + "=" + fmt(ratio);

    // exactly linear below the activation-window clamp
    ThroughputResult two = throughput(lat, acts, row_bytes, 2, t);
    if (!two.clamped && std::abs(two.gbps - 2 * one.gbps) > 1e-9) scaling_ok = false;
    ThroughputResult many = throughput(lat, acts, row_bytes, 64, t);
    if (!(many.clamped && many.gbps < 64 * one.gbps)) scaling_ok = false;
  }
  bool pass = band_ok && scaling_ok;
  report(6, "per-op throughput ratio in [2.7, 6.4]; linear below tFAW clamp", pass,
         "ratios " + ratios + "; scaling " + (scaling_ok ? "ok" : "bad"));
  CHECK(pass);
}

TEST_CASE("c7_workload_op_counts_and_oracles") {
  double t0 = now_seconds();
  SimParams sim;  // default 8 KB rows
  bool pass = true;
  std::string detail;

  for (int n : {1, 2, 4, 8, 16}) {
    BitmapQueryParams p;
    p.m = 1u << 20;
    p.n = n;
    p.seed = 0xC7 + n;
    WorkloadReport rep = run_bitmap_query(p, sim);
    bool ok = rep.oracle_pass &&
              rep.counts.of("or") == static_cast<uint64_t>(6 * n) &&
              rep.counts.of("and") == static_cast<uint64_t>(2 * n - 1) &&
              rep.counts.bitcount == static_cast<uint64_t>(n + 1);
    if (!ok) detail += " bitmap(n=" + std::to_string(n) + ")";
    pass &= ok;
  }

  std::mt19937_64 rng(0xC7);
  for (int b : {1, 2, 4, 8, 16}) {
    BitweavingParams p;
    p.b = b;
    p.r = 1u << 16;
    p.predicates = 10;
    p.seed = rng();
    WorkloadReport rep = run_bitweaving_scan(p, sim);
    if (!rep.oracle_pass) {
      detail += " bitweaving(b=" + std::to_string(b) + ")";
      pass = false;
    }
  }

  for (int k : {2, 15}) {
    SetOpsParams p;
    p.k = k;
    p.domain_bits = 19;
    p.elements_per_set = 4096;
    p.seed = rng();
    WorkloadReport rep = run_set_ops(p, sim);
    if (!rep.oracle_pass) {
      detail += " sets(k=" + std::to_string(k) + ")";
      pass = false;
    }
  }

  double elapsed = now_seconds() - t0;
  pass &= elapsed < 30.0;
  report(7, "bitmap 6n/2n-1/n+1 counts; bitweaving and set oracles", pass,
         fmt(elapsed) + " s" + detail);
  CHECK(pass);
}

TEST_CASE("c8_modeled_speedups") {
  SimParams sim;
  BitmapQueryParams bm;
  bm.m = 1u << 20;
  bm.n = 4;
  bm.seed = 0xC8;
  double s_bitmap = run_bitmap_query(bm, sim).cost.speedup;

  SetOpsParams so;
  so.k = 15;
  so.domain_bits = 19;
  so.seed = 0xC8;
  double s_sets = run_set_ops(so, sim).cost.speedup;

  std::string curve;
  double prev = 0.0;
  bool monotone = true;
  double s_bitweaving = 0.0;
  for (int b : {1, 2, 4, 8, 16}) {
    BitweavingParams p;
    p.b = b;
    p.r = 1u << 16;
    p.predicates = 2;
    p.seed = 0xC8;
    double s = run_bitweaving_scan(p, sim).cost.speedup;
    if (s < prev - 1e-9) monotone = false;
    prev = s;
    if (b == 8) s_bitweaving = s;
    if (!curve.empty()) curve += ",";
    curve += "b" + std::to_string(b) + "=" + fmt(s);
  }

  bool pass = s_bitmap > 1.0 && s_sets > 1.0 && s_bitweaving > 1.0 && monotone;
  report(8, "modeled speedup > 1 for all workloads; bitweaving monotone in b", pass,
         "bitmap " + fmt(s_bitmap) + ", bitweaving " + fmt(s_bitweaving) +
             ", sets " + fmt(s_sets) + ", curve " + curve);
  CHECK(pass);
}

TEST_CASE("c9_determinism") {
  fs::path cfg_dir = temp_dir("c9cfg");
  fs::path cfg = cfg_dir / "config.json";
  std::ofstream(cfg) << R"({
    "seed": 42,
    "row_bits": 8192,
    "workloads": [
      {"name": "bitmap", "m": 20000, "n": 2},
      {"name": "bitweaving", "b": 4, "r": 5000, "predicates": 3},
      {"name": "sets", "k": 3, "domain_bits": 13, "elements_per_set": 500}
    ]
  })";

  auto run_all = [&](const fs::path& dir) {
    std::ostringstream out, err;
    int rc = 0;
    rc |= cli_main({"--config", cfg.string(), "--out", dir.string(), "reliability"},
                   out, err);
    rc |= cli_main({"--config", cfg.string(), "--out", dir.string(), "bench"}, out, err);
    rc |= cli_main({"--config", cfg.string(), "--out", dir.string(), "workload"},
                   out, err);
    return rc;
  };

  fs::path d1 = temp_dir("c9a"), d2 = temp_dir("c9b");
  bool pass = run_all(d1) == 0 && run_all(d2) == 0;

  size_t files = 0;
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(d1)) names.push_back(e.path().filename());
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    ++files;
    if (!fs::exists(d2 / name) || slurp(d1 / name) != slurp(d2 / name)) {
      pass = false;
      break;
    }
  }
  pass &= files >= 7;  // reliability, bench, 3x results, traces...
  report(9, "identical config+seed produce byte-identical outputs", pass,
         std::to_string(files) + " files compared");
  CHECK(pass);
}
