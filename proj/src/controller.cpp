#include "buddysim/controller.h"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "buddysim/errors.h"

namespace buddysim {

using nlohmann::json;

Placement Placement::interleaved(int total_os_rows, int data_rows_per_subarray,
                                 int subarrays_per_bank) {
  if (total_os_rows < 0 || data_rows_per_subarray <= 0 || subarrays_per_bank <= 0)
    throw SimError(ErrCode::BAD_CONFIG, "bad placement geometry");
  Placement p;
  p.rows.reserve(total_os_rows);
  for (int r = 0; r < total_os_rows; ++r) {
    int global_sub = r / data_rows_per_subarray;
    p.rows.push_back({global_sub / subarrays_per_bank,
                      global_sub % subarrays_per_bank,
                      r % data_rows_per_subarray});
  }
  return p;
}

Placement Placement::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SimError(ErrCode::BAD_CONFIG, std::string("placement json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array())
    throw SimError(ErrCode::BAD_CONFIG, "placement json needs a 'rows' array");
  Placement p;
  // Local row indexes may be omitted; then rows land sequentially per subarray.
  std::map<std::pair<int, int>, int> next_local;
  for (const auto& e : j["rows"]) {
    RowLoc loc;
    loc.bank = e.at("bank").get<int>();
    loc.subarray = e.at("subarray").get<int>();
    if (loc.bank < 0 || loc.subarray < 0)
      throw SimError(ErrCode::BAD_CONFIG, "negative placement coordinates");
    if (e.contains("row"))
      loc.row = e.at("row").get<int>();
    else
      loc.row = next_local[{loc.bank, loc.subarray}];
    next_local[{loc.bank, loc.subarray}] =
        std::max(next_local[{loc.bank, loc.subarray}], loc.row + 1);
    p.rows.push_back(loc);
  }
  return p;
}

std::string Placement::to_json() const {
  json arr = json::array();
  for (const auto& r : rows) {
    json e;
    e["bank"] = r.bank;
    e["subarray"] = r.subarray;
    e["row"] = r.row;
    arr.push_back(std::move(e));
  }
  json j;
  j["schema_version"] = 1;
  j["rows"] = arr;
  return j.dump(2);
}

const RowLoc& Placement::loc(uint64_t os_row) const {
  if (os_row >= rows.size())
    throw SimError(ErrCode::BAD_CONFIG,
                   "OS row " + std::to_string(os_row) + " outside placement");
  return rows[os_row];
}

MemorySystem::MemorySystem(const SubarrayConfig& sub_cfg, int banks,
                           int subarrays_per_bank, Placement placement)
    : cfg_(sub_cfg),
      banks_(banks),
      subs_per_bank_(subarrays_per_bank),
      placement_(std::move(placement)) {
  if (banks < 1 || subarrays_per_bank < 1)
    throw SimError(ErrCode::BAD_CONFIG, "need at least one bank and subarray");
  subs_.reserve(static_cast<size_t>(banks) * subarrays_per_bank);
  for (int i = 0; i < banks * subarrays_per_bank; ++i) subs_.emplace_back(cfg_);
  for (const auto& loc : placement_.rows) {
    if (loc.bank >= banks_ || loc.subarray >= subs_per_bank_ ||
        loc.row >= cfg_.data_rows)
      throw SimError(ErrCode::BAD_CONFIG, "placement exceeds geometry");
  }
}

Subarray& MemorySystem::subarray(int bank, int sub) {
  if (bank < 0 || bank >= banks_ || sub < 0 || sub >= subs_per_bank_)
    throw SimError(ErrCode::BAD_CONFIG, "subarray coordinates out of range");
  return subs_[static_cast<size_t>(bank) * subs_per_bank_ + sub];
}

const Subarray& MemorySystem::subarray(int bank, int sub) const {
  return const_cast<MemorySystem*>(this)->subarray(bank, sub);
}

void MemorySystem::write_os_row(uint64_t os_row, const BitRow& bits) {
  const RowLoc& l = placement_.loc(os_row);
  subarray_at(l).set_row(Wordline::data(l.row), bits);
}

BitRow MemorySystem::read_os_row(uint64_t os_row) const {
  const RowLoc& l = placement_.loc(os_row);
  return subarray(l.bank, l.subarray).row(Wordline::data(l.row));
}

ExecutionPlan MemorySystem::plan(const BopRequest& req) const {
  const uint64_t rb = row_bytes();
  if (req.dst % rb || req.src1 % rb || (req.src2 && *req.src2 % rb))
    throw SimError(ErrCode::MISALIGNED, "operands must be row-aligned");
  if (req.size_bytes < rb)
    throw SimError(ErrCode::SIZE_TOO_SMALL,
                   "operation must cover at least one row (" +
                       std::to_string(rb) + " bytes)");
  if (req.size_bytes % rb)
    throw SimError(ErrCode::MISALIGNED, "size must be a multiple of the row size");
  if (is_binary(req.op) != req.src2.has_value())
    throw SimError(ErrCode::BAD_CONFIG, "operand count does not match the op");

  ExecutionPlan plan;
  plan.op = req.op;
  plan.row_bytes = rb;
  const uint64_t slices = req.size_bytes / rb;
  for (uint64_t i = 0; i < slices; ++i) {
    SlicePlan s;
    s.dst_row = req.dst / rb + i;
    s.src1_row = req.src1 / rb + i;
    if (req.src2) s.src2_row = *req.src2 / rb + i;

    const RowLoc& dl = placement_.loc(s.dst_row);
    const RowLoc& s1 = placement_.loc(s.src1_row);
    auto same_sub = [](const RowLoc& a, const RowLoc& b) {
      return a.bank == b.bank && a.subarray == b.subarray;
    };
    if (s.src2_row) {
      const RowLoc& s2 = placement_.loc(*s.src2_row);
      bool all_distinct = !same_sub(s1, dl) && !same_sub(s2, dl) && !same_sub(s1, s2);
      if (all_distinct) {
        // Three scattered rows need all three copies over the internal bus.
        s.psm_count = 3;
      } else {
        s.psm_count = (same_sub(s1, dl) ? 0 : 1) + (same_sub(s2, dl) ? 0 : 1);
      }
    } else {
      s.psm_count = same_sub(s1, dl) ? 0 : 1;
    }

    if (s.psm_count >= 3) {
      s.kind = SliceKind::CPU_FALLBACK;
      s.fallback_reason = "3 RowClone-PSM transfers";
    } else {
      s.kind = SliceKind::IN_DRAM;
    }
    plan.slices.push_back(std::move(s));
    plan.coherence.flush_rows += req.src2 ? 2 : 1;
    plan.coherence.invalidate_rows += 1;
  }
  return plan;
}

DispatchResult MemorySystem::dispatch(const ExecutionPlan& plan,
                                      const ExecOptions& opts) {
  DispatchResult out;
  out.coherence = plan.coherence;
  const std::string tag = op_name(plan.op);

  for (const auto& s : plan.slices) {
    if (s.kind == SliceKind::CPU_FALLBACK) {
      BitRow a = read_os_row(s.src1_row);
      BitRow r;
      if (s.src2_row) {
        BitRow b = read_os_row(*s.src2_row);
        r = host_bitwise(plan.op, a, &b);
      } else {
        r = host_bitwise(plan.op, a, nullptr);
      }
      write_os_row(s.dst_row, r);
      ++out.fallback_slices;
      out.fallback_result_bytes += plan.row_bytes;
      continue;
    }

    const RowLoc& dl = placement_.loc(s.dst_row);
    Subarray& anchor = subarray_at(dl);
    CompileOptions copts;

    const RowLoc& l1 = placement_.loc(s.src1_row);
    if (l1.bank != dl.bank || l1.subarray != dl.subarray) {
      // Pull the remote source into its designated row over the internal bus.
      anchor.set_row(Wordline::t(0), read_os_row(s.src1_row));
      PsmTransfer x = rowclone_psm(l1.bank, dl.bank, plan.row_bytes);
      x.seq = out.trace.commands.size();
      x.tag = tag;
      out.trace.transfers.push_back(std::move(x));
      copts.src1_preloaded = true;
    }
    if (s.src2_row) {
      const RowLoc& l2 = placement_.loc(*s.src2_row);
      if (l2.bank != dl.bank || l2.subarray != dl.subarray) {
        anchor.set_row(Wordline::t(1), read_os_row(*s.src2_row));
        PsmTransfer x = rowclone_psm(l2.bank, dl.bank, plan.row_bytes);
        x.seq = out.trace.commands.size();
        x.tag = tag;
        out.trace.transfers.push_back(std::move(x));
        copts.src2_preloaded = true;
      }
    }

    CommandTrace t = compile_bitwise(
        plan.op, RowAddress::d(dl.row), RowAddress::d(placement_.loc(s.src1_row).row),
        s.src2_row ? std::optional<RowAddress>(
                         RowAddress::d(placement_.loc(*s.src2_row).row))
                   : std::nullopt,
        copts);
    ExecutedTrace et = execute(t, anchor, opts);
    out.any_fault |= et.any_fault;
    out.any_stale |= et.any_stale;
    size_t base = out.trace.commands.size();
    for (auto& cmd : t.commands) out.trace.commands.push_back(std::move(cmd));
    (void)base;
    ++out.in_dram_slices;
  }
  return out;
}

void MemorySystem::copy_os_row(uint64_t src_row, uint64_t dst_row,
                               CommandTrace* trace_out, const ExecOptions& opts) {
  const RowLoc& sl = placement_.loc(src_row);
  const RowLoc& dl = placement_.loc(dst_row);
  if (sl.bank == dl.bank && sl.subarray == dl.subarray) {
    CommandTrace t = rowclone_fpm(RowAddress::d(sl.row), RowAddress::d(dl.row));
    execute(t, subarray_at(dl), opts);
    if (trace_out) trace_out->append(t);
    return;
  }
  write_os_row(dst_row, read_os_row(src_row));
  if (trace_out) {
    PsmTransfer x = rowclone_psm(sl.bank, dl.bank, row_bytes());
    x.seq = trace_out->commands.size();
    trace_out->transfers.push_back(std::move(x));
  }
}

CapacityReport capacity_report(int total_rows, int data_rows) {
  if (total_rows <= 0 || data_rows <= 0 || data_rows > total_rows)
    throw SimError(ErrCode::BAD_CONFIG, "bad capacity geometry");
  CapacityReport r;
  r.total_rows = total_rows;
  r.data_rows = data_rows;
  r.reserved_row_equivalents = 10;
  r.os_visible_fraction = static_cast<double>(data_rows) / total_rows;
  r.reserved_area_fraction = 10.0 / total_rows;
  r.hidden_address_fraction = static_cast<double>(total_rows - data_rows) / total_rows;
  return r;
}

}  // namespace buddysim
