#include "buddysim/command.h"

#include <algorithm>

#include "buddysim/errors.h"

namespace buddysim {

RowAddress RowAddress::b(int i) {
  if (i < 0 || i > 15)
    throw SimError(ErrCode::BAD_CONFIG, "B-group index outside 0..15");
  return {AddrGroup::B, i};
}

RowAddress RowAddress::c(int i) {
  if (i < 0 || i > 1)
    throw SimError(ErrCode::BAD_CONFIG, "C-group index outside 0..1");
  return {AddrGroup::C, i};
}

RowAddress RowAddress::d(int i) {
  if (i < 0) throw SimError(ErrCode::BAD_CONFIG, "negative D-group index");
  return {AddrGroup::D, i};
}

std::string RowAddress::str() const {
  switch (group) {
    case AddrGroup::B: return "B" + std::to_string(index);
    case AddrGroup::C: return "C" + std::to_string(index);
    case AddrGroup::D: return "D" + std::to_string(index);
  }
  return "?";
}

std::optional<RowAddress> RowAddress::parse(const std::string& s) {
  if (s.size() < 2) return std::nullopt;
  int idx = 0;
  for (size_t i = 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    idx = idx * 10 + (s[i] - '0');
  }
  try {
    switch (s[0]) {
      case 'B': return RowAddress::b(idx);
      case 'C': return RowAddress::c(idx);
      case 'D': return RowAddress::d(idx);
      default: return std::nullopt;
    }
  } catch (const SimError&) {
    return std::nullopt;
  }
}

WordlineSet resolve_address(const RowAddress& addr) {
  using W = Wordline;
  switch (addr.group) {
    case AddrGroup::C:
      return {addr.index == 0 ? W::c0() : W::c1()};
    case AddrGroup::D:
      return {W::data(addr.index)};
    case AddrGroup::B:
      break;
  }
  switch (addr.index) {
    case 0: return {W::t(0)};
    case 1: return {W::t(1)};
    case 2: return {W::t(2)};
    case 3: return {W::t(3)};
    case 4: return {W::dcc_d(0)};
    case 5: return {W::dcc_n(0)};
    case 6: return {W::dcc_d(1)};
    case 7: return {W::dcc_n(1)};
    case 8: return {W::dcc_n(0), W::t(0)};
    case 9: return {W::dcc_n(1), W::t(1)};
    case 10: return {W::t(2), W::t(3)};
    case 11: return {W::t(0), W::t(3)};
    case 12: return {W::t(0), W::t(1), W::t(2)};
    case 13: return {W::t(1), W::t(2), W::t(3)};
    case 14: return {W::dcc_d(0), W::t(1), W::t(2)};
    case 15: return {W::dcc_d(1), W::t(0), W::t(3)};
  }
  throw SimError(ErrCode::BAD_CONFIG, "B-group index outside 0..15");
}

const char* cmd_kind_name(CmdKind k) {
  switch (k) {
    case CmdKind::ACTIVATE: return "ACTIVATE";
    case CmdKind::PRECHARGE: return "PRECHARGE";
    case CmdKind::READ: return "READ";
    case CmdKind::WRITE: return "WRITE";
  }
  return "?";
}

const char* cmd_role_name(CmdRole r) {
  switch (r) {
    case CmdRole::FIRST_OF_AAP: return "first_of_aap";
    case CmdRole::SECOND_OF_AAP: return "second_of_aap";
    case CmdRole::STANDALONE: return "standalone";
  }
  return "?";
}

void CommandTrace::append(const CommandTrace& other) {
  size_t base = commands.size();
  commands.insert(commands.end(), other.commands.begin(), other.commands.end());
  for (PsmTransfer t : other.transfers) {
    t.seq += base;
    transfers.push_back(std::move(t));
  }
}

void CommandTrace::validate() const {
  size_t i = 0;
  while (i < commands.size()) {
    const DramCommand& c = commands[i];
    if (c.kind == CmdKind::ACTIVATE) {
      if (c.role == CmdRole::FIRST_OF_AAP) {
        if (i + 2 >= commands.size() ||
            commands[i + 1].kind != CmdKind::ACTIVATE ||
            commands[i + 1].role != CmdRole::SECOND_OF_AAP ||
            commands[i + 2].kind != CmdKind::PRECHARGE)
          throw SimError(ErrCode::BAD_TRACE,
                         "AAP must be ACTIVATE,ACTIVATE,PRECHARGE at " +
                             std::to_string(i));
        i += 3;
        continue;
      }
      if (c.role == CmdRole::SECOND_OF_AAP)
        throw SimError(ErrCode::BAD_TRACE,
                       "second_of_aap without a first at " + std::to_string(i));
      // standalone ACTIVATE: read/write burst then a precharge
      size_t j = i + 1;
      while (j < commands.size() && (commands[j].kind == CmdKind::READ ||
                                     commands[j].kind == CmdKind::WRITE))
        ++j;
      if (j >= commands.size() || commands[j].kind != CmdKind::PRECHARGE)
        throw SimError(ErrCode::BAD_TRACE,
                       "activation at " + std::to_string(i) +
                           " is never precharged");
      i = j + 1;
      continue;
    }
    if (c.kind == CmdKind::PRECHARGE) {
      ++i;  // extra precharges are idempotent
      continue;
    }
    throw SimError(ErrCode::BAD_TRACE, "READ/WRITE outside an activation");
  }
}

size_t CommandTrace::aap_count() const {
  size_t n = 0;
  for (const auto& c : commands)
    if (c.kind == CmdKind::ACTIVATE && c.role == CmdRole::FIRST_OF_AAP) ++n;
  return n;
}

size_t CommandTrace::ap_count() const {
  size_t n = 0;
  for (const auto& c : commands)
    if (c.kind == CmdKind::ACTIVATE && c.role == CmdRole::STANDALONE) ++n;
  return n;
}

size_t CommandTrace::activate_count() const {
  size_t n = 0;
  for (const auto& c : commands)
    if (c.kind == CmdKind::ACTIVATE) ++n;
  return n;
}

std::string CommandTrace::to_jsonl() const {
  std::string out;
  size_t t = 0;
  auto emit_transfers_before = [&](size_t seq) {
    while (t < transfers.size() && transfers[t].seq <= seq) {
      const PsmTransfer& x = transfers[t];
      out += "{\"schema_version\":1,\"kind\":\"PSM_COPY\",\"bytes\":" +
             std::to_string(x.bytes) +
             ",\"src_bank\":" + std::to_string(x.src_bank) +
             ",\"dst_bank\":" + std::to_string(x.dst_bank) + ",\"tag\":\"" +
             x.tag + "\"}\n";
      ++t;
    }
  };
  for (size_t i = 0; i < commands.size(); ++i) {
    emit_transfers_before(i);
    const DramCommand& c = commands[i];
    out += "{\"schema_version\":1,\"kind\":\"";
    out += cmd_kind_name(c.kind);
    out += "\"";
    if (c.addr) {
      out += ",\"addr\":\"" + c.addr->str() + "\"";
      out += ",\"wordlines\":" + std::to_string(c.wordlines);
    }
    out += ",\"role\":\"";
    out += cmd_role_name(c.role);
    out += "\",\"tag\":\"" + c.tag + "\"}\n";
  }
  emit_transfers_before(commands.size());
  return out;
}

bool is_binary(BitwiseOp op) { return op != BitwiseOp::NOT; }

const char* op_name(BitwiseOp op) {
  switch (op) {
    case BitwiseOp::NOT: return "not";
    case BitwiseOp::AND: return "and";
    case BitwiseOp::OR: return "or";
    case BitwiseOp::NAND: return "nand";
    case BitwiseOp::NOR: return "nor";
    case BitwiseOp::XOR: return "xor";
    case BitwiseOp::XNOR: return "xnor";
  }
  return "?";
}

std::optional<BitwiseOp> op_from_name(const std::string& name) {
  for (auto op : kAllOps)
    if (name == op_name(op)) return op;
  return std::nullopt;
}

namespace {
DramCommand make_act(const RowAddress& a, CmdRole role, const std::string& tag) {
  DramCommand c;
  c.kind = CmdKind::ACTIVATE;
  c.role = role;
  c.addr = a;
  c.wordlines = static_cast<int>(resolve_address(a).size());
  c.tag = tag;
  return c;
}

DramCommand make_pre(const std::string& tag) {
  DramCommand c;
  c.kind = CmdKind::PRECHARGE;
  c.role = CmdRole::STANDALONE;
  c.tag = tag;
  return c;
}
}  // namespace

CommandTrace aap(const RowAddress& a1, const RowAddress& a2,
                 const std::string& tag) {
  CommandTrace t;
  t.commands.push_back(make_act(a1, CmdRole::FIRST_OF_AAP, tag));
  t.commands.push_back(make_act(a2, CmdRole::SECOND_OF_AAP, tag));
  t.commands.push_back(make_pre(tag));
  return t;
}

CommandTrace ap(const RowAddress& a, const std::string& tag) {
  CommandTrace t;
  t.commands.push_back(make_act(a, CmdRole::STANDALONE, tag));
  t.commands.push_back(make_pre(tag));
  return t;
}

CommandTrace compile_bitwise(BitwiseOp op, const RowAddress& dst,
                             const RowAddress& src1,
                             std::optional<RowAddress> src2,
                             const CompileOptions& opts) {
  if (is_binary(op) != src2.has_value())
    throw SimError(ErrCode::BAD_CONFIG,
                   std::string(op_name(op)) +
                       (is_binary(op) ? " needs two sources" : " takes one source"));
  if (dst.group != AddrGroup::D || src1.group != AddrGroup::D ||
      (src2 && src2->group != AddrGroup::D))
    throw SimError(ErrCode::BAD_CONFIG, "operands must be D-group addresses");

  const std::string tag = op_name(op);
  CommandTrace t;
  // Copy a source toward a B-group target; a preloaded source already sits in
  // its designated row, so activate that row instead (or skip a straight copy).
  auto stage_src = [&](const RowAddress& src, bool preloaded, int t_index,
                       const RowAddress& target) {
    RowAddress from = preloaded ? RowAddress::b(t_index) : src;
    if (from == target) return;  // already in place
    t.append(aap(from, target, tag));
  };

  switch (op) {
    case BitwiseOp::NOT:
      stage_src(src1, opts.src1_preloaded, 0, RowAddress::b(5));
      t.append(aap(RowAddress::b(4), dst, tag));
      break;
    case BitwiseOp::AND:
    case BitwiseOp::OR:
      stage_src(src1, opts.src1_preloaded, 0, RowAddress::b(0));
      stage_src(*src2, opts.src2_preloaded, 1, RowAddress::b(1));
      t.append(aap(RowAddress::c(op == BitwiseOp::AND ? 0 : 1), RowAddress::b(2), tag));
      t.append(aap(RowAddress::b(12), dst, tag));
      break;
    case BitwiseOp::NAND:
    case BitwiseOp::NOR:
      stage_src(src1, opts.src1_preloaded, 0, RowAddress::b(0));
      stage_src(*src2, opts.src2_preloaded, 1, RowAddress::b(1));
      t.append(aap(RowAddress::c(op == BitwiseOp::NAND ? 0 : 1), RowAddress::b(2), tag));
      t.append(aap(RowAddress::b(12), RowAddress::b(5), tag));
      t.append(aap(RowAddress::b(4), dst, tag));
      break;
    case BitwiseOp::XOR:
    case BitwiseOp::XNOR: {
      // Half-terms via the DCC complements, then a TRA combine. XNOR swaps
      // the control rows, turning the AND-of-zeros steps into OR-of-ones.
      int first_c = op == BitwiseOp::XOR ? 0 : 1;
      stage_src(src1, opts.src1_preloaded, 0, RowAddress::b(8));
      stage_src(*src2, opts.src2_preloaded, 1, RowAddress::b(9));
      t.append(aap(RowAddress::c(first_c), RowAddress::b(10), tag));
      t.append(ap(RowAddress::b(14), tag));
      t.append(ap(RowAddress::b(15), tag));
      t.append(aap(RowAddress::c(1 - first_c), RowAddress::b(2), tag));
      t.append(aap(RowAddress::b(13), dst, tag));
      break;
    }
  }
  return t;
}

CommandTrace rowclone_fpm(const RowAddress& src, const RowAddress& dst) {
  return aap(src, dst, "rowclone_fpm");
}

CommandTrace rowclone_fpm(int src_subarray, const RowAddress& src,
                          int dst_subarray, const RowAddress& dst) {
  if (src_subarray != dst_subarray)
    throw SimError(ErrCode::CROSS_SUBARRAY,
                   "FPM copy needs both rows in one subarray (" +
                       std::to_string(src_subarray) + " vs " +
                       std::to_string(dst_subarray) + ")");
  return rowclone_fpm(src, dst);
}

PsmTransfer rowclone_psm(int src_bank, int dst_bank, uint64_t row_bytes) {
  PsmTransfer t;
  t.bytes = row_bytes;
  t.src_bank = src_bank;
  t.dst_bank = dst_bank;
  t.tag = "rowclone_psm";
  return t;
}

ExecutedTrace execute(const CommandTrace& trace, Subarray& sub,
                      const ExecOptions& opts) {
  trace.validate();
  ExecutedTrace out;
  out.commands.reserve(trace.commands.size());
  for (const auto& c : trace.commands) {
    ExecutedCommand ec;
    ec.cmd = c;
    switch (c.kind) {
      case CmdKind::ACTIVATE: {
        ec.info = sub.activate(resolve_address(*c.addr));
        if (ec.info.fault) {
          out.any_fault = true;
          if (!opts.allow_faults)
            throw SimError(ErrCode::RELIABILITY_FAULT,
                           "activation of " + c.addr->str() + " left " +
                               std::to_string(ec.info.fault_bits) +
                               " unreliable bit(s)");
        }
        if (ec.info.stale_source) out.any_stale = true;
        break;
      }
      case CmdKind::PRECHARGE:
        sub.precharge();
        break;
      case CmdKind::READ:
        (void)sub.read_row();
        break;
      case CmdKind::WRITE:
        sub.write_row(sub.read_row());
        break;
    }
    out.commands.push_back(std::move(ec));
  }
  return out;
}

BitRow host_bitwise(BitwiseOp op, const BitRow& a, const BitRow* b) {
  if (is_binary(op) && b == nullptr)
    throw SimError(ErrCode::BAD_CONFIG, "binary op needs two operands");
  switch (op) {
    case BitwiseOp::NOT: return bit_not(a);
    case BitwiseOp::AND: return bit_and(a, *b);
    case BitwiseOp::OR: return bit_or(a, *b);
    case BitwiseOp::NAND: return bit_not(bit_and(a, *b));
    case BitwiseOp::NOR: return bit_not(bit_or(a, *b));
    case BitwiseOp::XOR: return bit_xor(a, *b);
    case BitwiseOp::XNOR: return bit_not(bit_xor(a, *b));
  }
  throw SimError(ErrCode::BAD_CONFIG, "bad op");
}

}  // namespace buddysim
