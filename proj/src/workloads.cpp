#include "buddysim/workloads.h"

#include <algorithm>
#include <memory>
#include <set>

#include <json.hpp>

#include "buddysim/errors.h"

namespace buddysim {

using nlohmann::json;

uint64_t OpCounts::bitwise_total() const {
  uint64_t n = 0;
  for (const auto& [k, v] : bitwise) n += v;
  return n;
}

uint64_t OpCounts::of(const std::string& name) const {
  auto it = bitwise.find(name);
  return it == bitwise.end() ? 0 : it->second;
}

namespace {

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

// Runs a stream of whole-bitvector ops against a MemorySystem. Bit vectors
// are numbered; vector v's slice s lives at OS row v*slices + s, and slice
// columns are striped across subarrays so every op slice is co-located.
class StreamDriver {
 public:
  StreamDriver(int num_vectors, uint64_t vector_bits, const SimParams& sim)
      : sim_(sim),
        row_bits_(sim.subarray.row_bits),
        slices_(static_cast<int>(ceil_div(vector_bits, row_bits_))),
        vector_bits_(vector_bits) {
    int capacity = sim.subarray.data_rows;
    int subarrays = 0;
    for (int s = 1; s <= slices_; ++s) {
      if (static_cast<uint64_t>(num_vectors) * ceil_div(slices_, s) <=
          static_cast<uint64_t>(capacity)) {
        subarrays = s;
        break;
      }
    }
    if (subarrays == 0)
      throw SimError(ErrCode::BAD_CONFIG,
                     "workload does not fit the subarray geometry");
    Placement pl;
    std::vector<int> next(subarrays, 0);
    pl.rows.reserve(static_cast<size_t>(num_vectors) * slices_);
    for (int v = 0; v < num_vectors; ++v)
      for (int s = 0; s < slices_; ++s) {
        int sub = s % subarrays;
        pl.rows.push_back({0, sub, next[sub]++});
      }
    msys_ = std::make_unique<MemorySystem>(sim.subarray, 1, subarrays,
                                           std::move(pl));
  }

  int slices() const { return slices_; }
  uint64_t row_bytes() const { return msys_->row_bytes(); }
  uint64_t vector_bytes() const { return slices_ * row_bytes(); }

  void load(int id, const std::vector<BitRow>& rows) {
    for (int s = 0; s < slices_; ++s)
      msys_->write_os_row(os_row(id, s), rows[s]);
  }

  std::vector<BitRow> fetch(int id) const {
    std::vector<BitRow> rows;
    rows.reserve(slices_);
    for (int s = 0; s < slices_; ++s) rows.push_back(msys_->read_os_row(os_row(id, s)));
    return rows;
  }

  void clear(int id, bool value) {
    BitRow r(row_bits_, value);
    for (int s = 0; s < slices_; ++s) msys_->write_os_row(os_row(id, s), r);
  }

  void bop(BitwiseOp op, int dst, int s1, int s2 = -1) {
    BopRequest req;
    req.op = op;
    req.dst = os_row(dst, 0) * row_bytes();
    req.src1 = os_row(s1, 0) * row_bytes();
    if (s2 >= 0) req.src2 = os_row(s2, 0) * row_bytes();
    req.size_bytes = vector_bytes();
    ExecutionPlan plan = msys_->plan(req);
    DispatchResult r = msys_->dispatch(plan, sim_.exec);
    trace_.append(r.trace);
    coherence_.flush_rows += r.coherence.flush_rows;
    coherence_.invalidate_rows += r.coherence.invalidate_rows;
    any_fault_ |= r.any_fault;
    counts_.bitwise[op_name(op)] += 1;
    result_bytes_[op] += vector_bytes();
    fallback_bytes_[op] += r.fallback_result_bytes;
  }

  void copy(int src, int dst) {
    for (int s = 0; s < slices_; ++s)
      msys_->copy_os_row(os_row(src, s), os_row(dst, s), &trace_, sim_.exec);
    counts_.copies += 1;
  }

  uint64_t bitcount(int id) {
    counts_.bitcount += 1;
    bitcount_bytes_ += static_cast<double>(vector_bytes());
    uint64_t n = 0;
    uint64_t remaining = vector_bits_;
    for (int s = 0; s < slices_; ++s) {
      BitRow r = msys_->read_os_row(os_row(id, s));
      int take = static_cast<int>(std::min<uint64_t>(remaining, row_bits_));
      n += r.popcount_prefix(take);
      remaining -= take;
    }
    return n;
  }

  // Assembles timing/energy/speedup once the op stream is done.
  WorkloadReport finish(const std::string& name, bool oracle_pass,
                        std::string results_json) {
    WorkloadReport rep;
    rep.name = name;
    rep.oracle_pass = oracle_pass;
    rep.counts = counts_;
    rep.any_fault = any_fault_;

    double lat = trace_latency(trace_, sim_.timing, sim_.mode);
    double flush_ns = coherence_.flush_rows * sim_.timing.flush_ns_per_row;
    double fallback_ns = 0.0;
    double baseline_ns = 0.0;
    double result_bytes = 0.0;
    double baseline_nJ = 0.0;
    for (const auto& [op, bytes] : result_bytes_) {
      baseline_ns += bytes / baseline_throughput_gbps(op, sim_.host.channel_gbps);
      baseline_nJ += (bytes / 1024.0) * baseline_energy_nJ_per_KB(op, sim_.energy);
      result_bytes += bytes;
    }
    for (const auto& [op, bytes] : fallback_bytes_)
      fallback_ns += bytes / baseline_throughput_gbps(op, sim_.host.channel_gbps);

    rep.buddy_ns = lat + flush_ns + fallback_ns;
    rep.baseline_ns = baseline_ns;
    rep.bitcount_ns = bitcount_bytes_ / sim_.host.bitcount_gbps;

    rep.cost.latency_ns = rep.buddy_ns + rep.bitcount_ns;
    double buddy_nJ = trace_energy_nJ(trace_, sim_.energy);
    if (result_bytes > 0) {
      rep.cost.energy_nJ_per_KB = buddy_nJ / (result_bytes / 1024.0);
      rep.cost.throughput_gbps = result_bytes / rep.cost.latency_ns;
      rep.cost.baseline_throughput_gbps =
          result_bytes / (rep.baseline_ns + rep.bitcount_ns);
      rep.cost.energy_reduction_factor = buddy_nJ > 0 ? baseline_nJ / buddy_nJ : 0;
    }
    double buddy_total = rep.buddy_ns + rep.bitcount_ns;
    rep.cost.speedup =
        buddy_total > 0 ? (rep.baseline_ns + rep.bitcount_ns) / buddy_total : 0.0;
    rep.trace = std::move(trace_);
    rep.results_json = std::move(results_json);
    return rep;
  }

 private:
  uint64_t os_row(int id, int slice) const {
    return static_cast<uint64_t>(id) * slices_ + slice;
  }

  const SimParams& sim_;
  uint64_t row_bits_;
  int slices_;
  uint64_t vector_bits_;
  std::unique_ptr<MemorySystem> msys_;
  CommandTrace trace_;
  CoherenceCounts coherence_;
  OpCounts counts_;
  std::map<BitwiseOp, double> result_bytes_;
  std::map<BitwiseOp, double> fallback_bytes_;
  double bitcount_bytes_ = 0.0;
  bool any_fault_ = false;
};

std::vector<BitRow> random_vector(std::mt19937_64& rng, int slices, int row_bits,
                                  uint64_t valid_bits, double density) {
  std::vector<BitRow> rows;
  rows.reserve(slices);
  uint64_t remaining = valid_bits;
  for (int s = 0; s < slices; ++s) {
    BitRow r(row_bits);
    r.randomize(rng, density);
    uint64_t take = std::min<uint64_t>(remaining, row_bits);
    for (int i = static_cast<int>(take); i < row_bits; ++i) r.set(i, false);
    remaining -= take;
    rows.push_back(std::move(r));
  }
  return rows;
}

uint64_t host_popcount(const std::vector<BitRow>& rows, uint64_t valid_bits) {
  uint64_t n = 0;
  uint64_t remaining = valid_bits;
  for (const auto& r : rows) {
    int take = static_cast<int>(std::min<uint64_t>(remaining, r.bits()));
    n += r.popcount_prefix(take);
    remaining -= take;
  }
  return n;
}

std::vector<BitRow> host_zip(BitwiseOp op, const std::vector<BitRow>& a,
                             const std::vector<BitRow>* b) {
  std::vector<BitRow> out;
  out.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i)
    out.push_back(host_bitwise(op, a[i], b ? &(*b)[i] : nullptr));
  return out;
}

}  // namespace

WorkloadReport run_bitmap_query(const BitmapQueryParams& p, const SimParams& sim) {
  if (p.n < 1)
    throw SimError(ErrCode::INSUFFICIENT_BITMAPS,
                   "query needs at least one week of bitmaps");
  if (p.m < 1) throw SimError(ErrCode::BAD_CONFIG, "m must be >= 1");

  const int n = p.n;
  auto daily = [&](int w, int d) { return w * 7 + d; };
  const int male = 7 * n;
  auto weekly = [&](int w) { return 7 * n + 1 + w; };
  const int every = 7 * n + 1 + n;
  const int mw = every + 1;
  const int num_vectors = mw + 1;

  StreamDriver drv(num_vectors, p.m, sim);
  std::mt19937_64 rng(p.seed);

  std::vector<std::vector<BitRow>> host_daily(static_cast<size_t>(7) * n);
  for (int w = 0; w < n; ++w)
    for (int d = 0; d < 7; ++d) {
      host_daily[daily(w, d)] =
          random_vector(rng, drv.slices(), sim.subarray.row_bits, p.m, p.density);
      drv.load(daily(w, d), host_daily[daily(w, d)]);
    }
  std::vector<BitRow> host_male =
      random_vector(rng, drv.slices(), sim.subarray.row_bits, p.m, p.density);
  drv.load(male, host_male);

  // Week = seven daily bitmaps ORed pairwise: six ORs per week.
  for (int w = 0; w < n; ++w) {
    drv.bop(BitwiseOp::OR, weekly(w), daily(w, 0), daily(w, 1));
    for (int d = 2; d < 7; ++d) drv.bop(BitwiseOp::OR, weekly(w), weekly(w), daily(w, d));
  }
  int every_id = n == 1 ? weekly(0) : every;
  if (n > 1) {
    drv.bop(BitwiseOp::AND, every, weekly(0), weekly(1));
    for (int w = 2; w < n; ++w) drv.bop(BitwiseOp::AND, every, every, weekly(w));
  }
  uint64_t unique_weekly = drv.bitcount(every_id);
  std::vector<uint64_t> male_weekly;
  for (int w = 0; w < n; ++w) {
    drv.bop(BitwiseOp::AND, mw, male, weekly(w));
    male_weekly.push_back(drv.bitcount(mw));
  }

  // Direct evaluation of the same query.
  bool ok = true;
  std::vector<std::vector<BitRow>> host_weekly(n);
  for (int w = 0; w < n; ++w) {
    host_weekly[w] = host_daily[daily(w, 0)];
    for (int d = 1; d < 7; ++d)
      host_weekly[w] = host_zip(BitwiseOp::OR, host_weekly[w], &host_daily[daily(w, d)]);
  }
  std::vector<BitRow> host_every = host_weekly[0];
  for (int w = 1; w < n; ++w)
    host_every = host_zip(BitwiseOp::AND, host_every, &host_weekly[w]);
  ok &= host_popcount(host_every, p.m) == unique_weekly;
  for (int w = 0; w < n; ++w) {
    auto mh = host_zip(BitwiseOp::AND, host_male, &host_weekly[w]);
    ok &= host_popcount(mh, p.m) == male_weekly[w];
  }

  json res;
  res["schema_version"] = 1;
  res["m"] = p.m;
  res["n"] = p.n;
  res["unique_weekly_active"] = unique_weekly;
  res["male_weekly_active"] = male_weekly;
  return drv.finish("bitmap", ok, res.dump(2));
}

WorkloadReport run_bitweaving_scan(const BitweavingParams& p, const SimParams& sim) {
  if (p.b < 1 || p.b > 32)
    throw SimError(ErrCode::BAD_CONFIG, "bits per value must be in 1..32");
  if (p.r < 1) throw SimError(ErrCode::BAD_CONFIG, "column needs at least one row");
  const uint64_t limit = p.b == 32 ? 0xffffffffull : ((1ull << p.b) - 1);

  std::vector<std::pair<uint32_t, uint32_t>> preds = p.explicit_predicates;
  for (const auto& [c1, c2] : preds) {
    if (c1 > c2 || c2 > limit)
      throw SimError(ErrCode::CONSTANT_OUT_OF_RANGE,
                     "predicate constants must satisfy c1 <= c2 < 2^b");
  }

  auto slice_id = [](int i) { return i; };
  const int zeros = p.b, ones = p.b + 1;
  const int eq1 = p.b + 2, lt1 = p.b + 3, eq2 = p.b + 4, lt2 = p.b + 5;
  const int x = p.b + 6, nx = p.b + 7, tlt = p.b + 8, ns = p.b + 9,
            tlt2 = p.b + 10, ge = p.b + 11, le = p.b + 12, res = p.b + 13;
  const int num_vectors = p.b + 14;

  StreamDriver drv(num_vectors, p.r, sim);
  std::mt19937_64 rng(p.seed);

  std::vector<uint32_t> values(p.r);
  for (auto& v : values)
    v = static_cast<uint32_t>(rng() & limit);

  // Vertical layout: slice i holds bit (b-1-i) of every value, MSB first.
  for (int i = 0; i < p.b; ++i) {
    std::vector<BitRow> rows(drv.slices(), BitRow(sim.subarray.row_bits));
    for (uint64_t j = 0; j < p.r; ++j) {
      if ((values[j] >> (p.b - 1 - i)) & 1u)
        rows[j / sim.subarray.row_bits].set(
            static_cast<int>(j % sim.subarray.row_bits), true);
    }
    drv.load(slice_id(i), rows);
  }
  drv.clear(zeros, false);
  drv.clear(ones, true);

  while (static_cast<int>(preds.size()) < p.predicates) {
    uint32_t a = static_cast<uint32_t>(rng() & limit);
    uint32_t b2 = static_cast<uint32_t>(rng() & limit);
    preds.emplace_back(std::min(a, b2), std::max(a, b2));
  }

  // MSB-to-LSB equal/less masks:
  //   eq' = eq AND NOT(slice XOR c_i)
  //   lt' = lt OR (eq AND c_i AND NOT slice)
  auto scan_constant = [&](uint32_t c, int eq, int lt) {
    drv.clear(eq, true);
    drv.clear(lt, false);
    for (int i = 0; i < p.b; ++i) {
      int cb = ((c >> (p.b - 1 - i)) & 1u) ? ones : zeros;
      drv.bop(BitwiseOp::XOR, x, slice_id(i), cb);
      drv.bop(BitwiseOp::NOT, nx, x);
      drv.bop(BitwiseOp::AND, tlt, eq, cb);
      drv.bop(BitwiseOp::NOT, ns, slice_id(i));
      drv.bop(BitwiseOp::AND, tlt2, tlt, ns);
      drv.bop(BitwiseOp::OR, lt, lt, tlt2);
      drv.bop(BitwiseOp::AND, eq, eq, nx);
    }
  };

  bool ok = true;
  std::vector<ScanResult> scans;
  json res_preds = json::array();
  for (const auto& [c1, c2] : preds) {
    scan_constant(c1, eq1, lt1);
    scan_constant(c2, eq2, lt2);
    drv.bop(BitwiseOp::NOT, ge, lt1);           // val >= c1
    drv.bop(BitwiseOp::OR, le, lt2, eq2);       // val <= c2
    drv.bop(BitwiseOp::AND, res, ge, le);
    uint64_t count = drv.bitcount(res);

    ScanResult sr;
    sr.c1 = c1;
    sr.c2 = c2;
    sr.matches.resize(p.r);
    std::vector<BitRow> bits = drv.fetch(res);
    uint64_t expect = 0;
    for (uint64_t j = 0; j < p.r; ++j) {
      bool got = bits[j / sim.subarray.row_bits].get(
          static_cast<int>(j % sim.subarray.row_bits));
      bool want = values[j] >= c1 && values[j] <= c2;  // row-at-a-time check
      sr.matches[j] = got;
      ok &= got == want;
      expect += want;
    }
    ok &= count == expect;
    sr.match_count = count;
    scans.push_back(std::move(sr));

    json pj;
    pj["c1"] = c1;
    pj["c2"] = c2;
    pj["count"] = count;
    res_preds.push_back(std::move(pj));
  }

  json doc;
  doc["schema_version"] = 1;
  doc["b"] = p.b;
  doc["r"] = p.r;
  doc["predicates"] = res_preds;
  WorkloadReport rep = drv.finish("bitweaving", ok, doc.dump(2));
  rep.scans = std::move(scans);
  return rep;
}

WorkloadReport run_set_ops(const SetOpsParams& p, const SimParams& sim) {
  if (p.k < 2) throw SimError(ErrCode::BAD_CONFIG, "set ops need k >= 2");
  if (p.domain_bits < 6 || p.domain_bits > 30)
    throw SimError(ErrCode::BAD_CONFIG, "domain_bits must be in 6..30");
  const uint64_t domain = 1ull << p.domain_bits;

  auto set_id = [](int i) { return i; };
  const int uni = p.k, inter = p.k + 1, diff = p.k + 2, tmp = p.k + 3;
  const int num_vectors = p.k + 4;

  StreamDriver drv(num_vectors, domain, sim);
  std::mt19937_64 rng(p.seed);

  std::vector<std::set<uint32_t>> members(p.k);
  if (p.sets) {
    if (static_cast<int>(p.sets->size()) != p.k)
      throw SimError(ErrCode::BAD_CONFIG, "explicit sets must match k");
    for (int i = 0; i < p.k; ++i)
      for (uint32_t e : (*p.sets)[i]) {
        if (e >= domain)
          throw SimError(ErrCode::BAD_CONFIG, "set element outside the domain");
        members[i].insert(e);
      }
  } else {
    for (int i = 0; i < p.k; ++i)
      for (uint64_t j = 0; j < p.elements_per_set; ++j)
        members[i].insert(static_cast<uint32_t>(rng() % domain));
  }

  for (int i = 0; i < p.k; ++i) {
    std::vector<BitRow> rows(drv.slices(), BitRow(sim.subarray.row_bits));
    for (uint32_t e : members[i])
      rows[e / sim.subarray.row_bits].set(
          static_cast<int>(e % sim.subarray.row_bits), true);
    drv.load(set_id(i), rows);
  }

  drv.bop(BitwiseOp::OR, uni, set_id(0), set_id(1));
  for (int i = 2; i < p.k; ++i) drv.bop(BitwiseOp::OR, uni, uni, set_id(i));
  drv.bop(BitwiseOp::AND, inter, set_id(0), set_id(1));
  for (int i = 2; i < p.k; ++i) drv.bop(BitwiseOp::AND, inter, inter, set_id(i));
  drv.copy(set_id(0), diff);
  for (int i = 1; i < p.k; ++i) {
    drv.bop(BitwiseOp::NOT, tmp, set_id(i));
    drv.bop(BitwiseOp::AND, diff, diff, tmp);
  }

  std::set<uint32_t> o_uni, o_inter(members[0]), o_diff(members[0]);
  for (int i = 0; i < p.k; ++i) o_uni.insert(members[i].begin(), members[i].end());
  for (int i = 1; i < p.k; ++i) {
    std::set<uint32_t> keep;
    for (uint32_t e : o_inter)
      if (members[i].count(e)) keep.insert(e);
    o_inter = std::move(keep);
    for (uint32_t e : members[i]) o_diff.erase(e);
  }

  auto check = [&](int id, const std::set<uint32_t>& want) {
    std::vector<BitRow> rows = drv.fetch(id);
    uint64_t found = 0;
    for (uint64_t e = 0; e < domain; ++e) {
      bool got = rows[e / sim.subarray.row_bits].get(
          static_cast<int>(e % sim.subarray.row_bits));
      if (got) ++found;
      if (got != (want.count(static_cast<uint32_t>(e)) > 0)) return false;
    }
    return found == want.size();
  };
  bool ok = check(uni, o_uni) && check(inter, o_inter) && check(diff, o_diff);

  auto sample = [&](const std::set<uint32_t>& s) {
    json arr = json::array();
    int i = 0;
    for (uint32_t e : s) {
      if (i++ >= 32) break;
      arr.push_back(e);
    }
    return arr;
  };
  json res;
  res["schema_version"] = 1;
  res["k"] = p.k;
  res["domain_bits"] = p.domain_bits;
  res["union"] = {{"size", o_uni.size()}, {"sample", sample(o_uni)}};
  res["intersection"] = {{"size", o_inter.size()}, {"sample", sample(o_inter)}};
  res["difference"] = {{"size", o_diff.size()}, {"sample", sample(o_diff)}};
  return drv.finish("sets", ok, res.dump(2));
}

}  // namespace buddysim
