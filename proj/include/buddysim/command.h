#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "buddysim/subarray.h"

namespace buddysim {

enum class AddrGroup : uint8_t { B, C, D };

// Row address as seen on the command bus: 16 reserved bitwise addresses (B),
// the two constant rows (C), and ordinary data rows (D).
struct RowAddress {
  AddrGroup group = AddrGroup::D;
  int index = 0;

  static RowAddress b(int i);
  static RowAddress c(int i);
  static RowAddress d(int i);

  std::string str() const;
  static std::optional<RowAddress> parse(const std::string& s);
  bool operator==(const RowAddress&) const = default;
};

// B/C/D address decoding. B8-B11 raise two wordlines, B12-B15 raise three.
WordlineSet resolve_address(const RowAddress& addr);

enum class CmdKind : uint8_t { ACTIVATE, PRECHARGE, READ, WRITE };
enum class CmdRole : uint8_t { FIRST_OF_AAP, SECOND_OF_AAP, STANDALONE };

const char* cmd_kind_name(CmdKind k);
const char* cmd_role_name(CmdRole r);

struct DramCommand {
  CmdKind kind = CmdKind::PRECHARGE;
  CmdRole role = CmdRole::STANDALONE;
  std::optional<RowAddress> addr;  // ACTIVATE only
  int wordlines = 0;               // resolved count, ACTIVATE only
  std::string tag;                 // op that emitted the command
};

// Cost-only record of a row moved over the shared internal bus.
struct PsmTransfer {
  uint64_t bytes = 0;
  int src_bank = 0;
  int dst_bank = 0;
  size_t seq = 0;  // index of the command this transfer precedes
  std::string tag;
};

struct CommandTrace {
  std::vector<DramCommand> commands;
  std::vector<PsmTransfer> transfers;

  void append(const CommandTrace& other);
  // AAP shape (ACT,ACT,PRECHARGE), AP shape (ACT,PRECHARGE), ends precharged.
  void validate() const;

  size_t aap_count() const;
  size_t ap_count() const;
  size_t activate_count() const;

  std::string to_jsonl() const;
};

enum class BitwiseOp : uint8_t { NOT, AND, OR, NAND, NOR, XOR, XNOR };

inline constexpr std::array<BitwiseOp, 7> kAllOps = {
    BitwiseOp::NOT, BitwiseOp::AND, BitwiseOp::OR,  BitwiseOp::NAND,
    BitwiseOp::NOR, BitwiseOp::XOR, BitwiseOp::XNOR};

bool is_binary(BitwiseOp op);
const char* op_name(BitwiseOp op);
std::optional<BitwiseOp> op_from_name(const std::string& name);

// ACTIVATE addr1; ACTIVATE addr2; PRECHARGE. Copies the result of activating
// addr1 into the rows mapped to addr2.
CommandTrace aap(const RowAddress& a1, const RowAddress& a2,
                 const std::string& tag = {});
// ACTIVATE addr; PRECHARGE.
CommandTrace ap(const RowAddress& a, const std::string& tag = {});

struct CompileOptions {
  // Source already sits in its designated row (T0 for src1, T1 for src2),
  // e.g. after an inter-bank transfer; the source copy AAP is redirected
  // to the designated row or dropped.
  bool src1_preloaded = false;
  bool src2_preloaded = false;
};

CommandTrace compile_bitwise(BitwiseOp op, const RowAddress& dst,
                             const RowAddress& src1,
                             std::optional<RowAddress> src2 = std::nullopt,
                             const CompileOptions& opts = {});

// In-subarray copy: one back-to-back activation pair.
CommandTrace rowclone_fpm(const RowAddress& src, const RowAddress& dst);
// Placement-checked variant; throws CROSS_SUBARRAY when the rows disagree.
CommandTrace rowclone_fpm(int src_subarray, const RowAddress& src,
                          int dst_subarray, const RowAddress& dst);
// Inter-bank copy descriptor; no subarray mutation here.
PsmTransfer rowclone_psm(int src_bank, int dst_bank, uint64_t row_bytes);

struct ExecOptions {
  bool allow_faults = false;  // record reliability faults instead of throwing
};

struct ExecutedCommand {
  DramCommand cmd;
  ActivationInfo info;  // populated for ACTIVATE
};

struct ExecutedTrace {
  std::vector<ExecutedCommand> commands;
  bool any_fault = false;
  bool any_stale = false;
};

ExecutedTrace execute(const CommandTrace& trace, Subarray& sub,
                      const ExecOptions& opts = {});

// Host reference evaluation; the oracle side of the dual-route checks and the
// CPU fallback path. b is ignored for NOT.
BitRow host_bitwise(BitwiseOp op, const BitRow& a, const BitRow* b);

}  // namespace buddysim
