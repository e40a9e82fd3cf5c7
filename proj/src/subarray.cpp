#include "buddysim/subarray.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "buddysim/errors.h"

namespace buddysim {

using nlohmann::json;

Wordline Wordline::t(int i) {
  if (i < 0 || i > 3) throw SimError(ErrCode::BAD_CONFIG, "designated row index");
  return {static_cast<Line>(static_cast<int>(Line::T0) + i), 0};
}

Wordline Wordline::dcc_d(int i) {
  if (i < 0 || i > 1) throw SimError(ErrCode::BAD_CONFIG, "DCC row index");
  return {i == 0 ? Line::DCC0_D : Line::DCC1_D, 0};
}

Wordline Wordline::dcc_n(int i) {
  if (i < 0 || i > 1) throw SimError(ErrCode::BAD_CONFIG, "DCC row index");
  return {i == 0 ? Line::DCC0_N : Line::DCC1_N, 0};
}

std::string Wordline::str() const {
  switch (line) {
    case Line::T0: return "T0";
    case Line::T1: return "T1";
    case Line::T2: return "T2";
    case Line::T3: return "T3";
    case Line::DCC0_D: return "DCC0_D";
    case Line::DCC0_N: return "DCC0_N";
    case Line::DCC1_D: return "DCC1_D";
    case Line::DCC1_N: return "DCC1_N";
    case Line::C0: return "C0";
    case Line::C1: return "C1";
    case Line::DATA: return "D" + std::to_string(data_index);
  }
  return "?";
}

void SubarrayConfig::validate() const {
  if (row_bits <= 0 || row_bits % 64 != 0)
    throw SimError(ErrCode::BAD_CONFIG, "row_bits must be a positive multiple of 64");
  if (data_rows < 1)
    throw SimError(ErrCode::BAD_CONFIG, "data_rows must be >= 1");
  if (!(variation_pct >= 0.0 && variation_pct < 100.0))
    throw SimError(ErrCode::BAD_CONFIG, "variation_pct outside [0,100)");
  if (!(cb_over_cc > 0.0))
    throw SimError(ErrCode::BAD_CONFIG, "cb_over_cc must be positive");
  if (!(tie_epsilon >= 0.0))
    throw SimError(ErrCode::BAD_CONFIG, "tie_epsilon must be >= 0");
}

namespace {
constexpr int kRowT0 = 0;
constexpr int kRowDcc0 = 4;
constexpr int kRowDcc1 = 5;
constexpr int kRowC0 = 6;
constexpr int kRowC1 = 7;
constexpr int kRowDataBase = 8;
}  // namespace

Subarray::Subarray(SubarrayConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  rows_.reserve(kRowDataBase + cfg_.data_rows);
  for (int i = 0; i < kRowDataBase + cfg_.data_rows; ++i)
    rows_.emplace_back(cfg_.row_bits);
  rows_[kRowC1].fill(true);
  last_touch_.assign(rows_.size(), 0);
}

Subarray::Resolved Subarray::resolve(const Wordline& wl) const {
  switch (wl.line) {
    case Line::T0: return {kRowT0 + 0, false};
    case Line::T1: return {kRowT0 + 1, false};
    case Line::T2: return {kRowT0 + 2, false};
    case Line::T3: return {kRowT0 + 3, false};
    case Line::DCC0_D: return {kRowDcc0, false};
    case Line::DCC0_N: return {kRowDcc0, true};
    case Line::DCC1_D: return {kRowDcc1, false};
    case Line::DCC1_N: return {kRowDcc1, true};
    case Line::C0: return {kRowC0, false};
    case Line::C1: return {kRowC1, false};
    case Line::DATA:
      if (wl.data_index < 0 || wl.data_index >= cfg_.data_rows)
        throw SimError(ErrCode::PROTOCOL,
                       "data row " + std::to_string(wl.data_index) +
                           " outside 0.." + std::to_string(cfg_.data_rows - 1));
      return {kRowDataBase + wl.data_index, false};
  }
  throw SimError(ErrCode::PROTOCOL, "bad wordline");
}

void Subarray::store_through(const Resolved& r, const BitRow& value) {
  rows_[r.row] = r.bar ? bit_not(value) : value;
  last_touch_[r.row] = op_counter_;
}

void Subarray::reassert_control_rows(const std::vector<Resolved>& touched) {
  for (const auto& r : touched) {
    if (r.row == kRowC0) rows_[kRowC0].fill(false);
    if (r.row == kRowC1) rows_[kRowC1].fill(true);
  }
}

ActivationInfo Subarray::first_activation(const std::vector<Resolved>& lines) {
  ActivationInfo info;
  info.wordline_count = static_cast<int>(lines.size());

  // Stale sources matter only when cells share charge; a lone activation is
  // an ordinary refresh-maintained read.
  if (lines.size() >= 2) {
    for (const auto& r : lines)
      if (op_counter_ - last_touch_[r.row] > cfg_.stale_window_ops)
        info.stale_source = true;
  }

  // Contribution of each connected cell to the bitline: n-wordline cells pull
  // through bitline-bar, i.e. contribute their complement.
  std::vector<BitRow> contrib;
  contrib.reserve(lines.size());
  for (const auto& r : lines)
    contrib.push_back(r.bar ? bit_not(rows_[r.row]) : rows_[r.row]);

  const bool calibrated = cfg_.reliability == ReliabilityMode::CALIBRATED;

  switch (lines.size()) {
    case 1: {
      latch_ = contrib[0];
      if (calibrated) {
        bool has1 = latch_.any();
        bool has0 = latch_.popcount() < static_cast<uint64_t>(cfg_.row_bits);
        double lat = 0.0;
        if (has1)
          lat = std::max(lat, *activation_latency(ActivationQuery::single_charged(),
                                                  cfg_.calibration));
        if (has0)
          lat = std::max(lat, *activation_latency(ActivationQuery::single_empty(),
                                                  cfg_.calibration));
        info.latency_ns = lat;
      }
      break;
    }
    case 2: {
      // Conflicting cells split the charge evenly: a tie the sense amp cannot
      // resolve. Tied positions read 1 (matching the observed failure mode of
      // a strong charged cell winning).
      BitRow conflict = bit_xor(contrib[0], contrib[1]);
      latch_ = bit_or(contrib[0], contrib[1]);
      if (conflict.any()) {
        info.fault = true;
        info.fault_bits = conflict.popcount();
      }
      break;
    }
    case 3: {
      BitRow maj = majority3(contrib[0], contrib[1], contrib[2]);
      BitRow uni = uniform3(contrib[0], contrib[1], contrib[2]);
      BitRow one = exactly_one3(contrib[0], contrib[1], contrib[2]);
      // exactly-two positions are the complement of uniform and exactly-one
      BitRow two(cfg_.row_bits);
      for (size_t w = 0; w < two.words(); ++w)
        two.data()[w] = ~(uni.data()[w] | one.data()[w]);

      if (!calibrated) {
        ChargeShareConfig cs{22.0, 22.0 * cfg_.cb_over_cc, cfg_.tie_epsilon};
        double th = analytic_failure_threshold(cs) * 100.0;
        double v = cfg_.variation_pct;
        if (std::abs(v - th) <= 1e-9) {
          // one strong cell exactly balances two weak ones
          BitRow nonuni = bit_or(one, two);
          latch_ = bit_or(maj, nonuni);  // ties read 1
          if (nonuni.any()) {
            info.fault = true;
            info.fault_bits = nonuni.popcount();
          }
        } else if (v > th) {
          // the strong minority cell overrides the majority, silently
          latch_ = bit_xor(maj, bit_or(one, two));
        } else {
          latch_ = maj;
        }
      } else {
        latch_ = maj;
        double lat = 0.0;
        bool fail = false;
        uint64_t fail_bits = 0;
        auto consider = [&](TraPattern p, const BitRow& mask, bool strong_value) {
          if (!mask.any()) return;
          auto l = activation_latency(
              ActivationQuery::tra(p, cfg_.variation_pct), cfg_.calibration);
          if (l) {
            lat = std::max(lat, *l);
            return;
          }
          // Failed positions resolve to the strong cell's value.
          fail = true;
          fail_bits += mask.popcount();
          for (size_t w = 0; w < latch_.words(); ++w) {
            if (strong_value)
              latch_.data()[w] |= mask.data()[w];
            else
              latch_.data()[w] &= ~mask.data()[w];
          }
        };
        BitRow zeros = bit_and(uni, bit_not(maj));
        BitRow ones = bit_and(uni, maj);
        consider(TraPattern::P0s0w0w, zeros, false);
        consider(TraPattern::P1s0w0w, one, true);
        consider(TraPattern::P0s1w1w, two, false);
        consider(TraPattern::P1s1w1w, ones, true);
        info.latency_ns = lat;
        info.fault = fail;
        info.fault_bits = fail_bits;
      }
      break;
    }
    default:
      throw SimError(ErrCode::PROTOCOL, "activation raises 1-3 wordlines");
  }
  return info;
}

ActivationInfo Subarray::activate(const WordlineSet& lines) {
  if (lines.empty() || lines.size() > 3)
    throw SimError(ErrCode::PROTOCOL, "activation raises 1-3 wordlines");

  std::vector<Resolved> resolved;
  resolved.reserve(lines.size());
  for (const auto& wl : lines) resolved.push_back(resolve(wl));
  for (size_t i = 0; i < resolved.size(); ++i)
    for (size_t j = i + 1; j < resolved.size(); ++j)
      if (resolved[i].row == resolved[j].row)
        throw SimError(ErrCode::PROTOCOL,
                       "wordline set addresses one cell row twice");

  ++op_counter_;

  if (activated_) {
    if (lines.size() == 3)
      throw SimError(ErrCode::PROTOCOL,
                     "triple-row activation issued while the bank is activated");
    ActivationInfo info;
    info.wordline_count = static_cast<int>(lines.size());
    info.forced_overwrite = true;
    for (size_t i = 0; i < lines.size(); ++i) {
      bool already = false;
      for (const auto& r : raised_)
        if (resolve(r).row == resolved[i].row) already = true;
      store_through(resolved[i], latch_);
      if (!already) raised_.push_back(lines[i]);
    }
    reassert_control_rows(resolved);
    return info;
  }

  ActivationInfo info = first_activation(resolved);
  activated_ = true;
  raised_ = lines;
  for (const auto& r : resolved) store_through(r, latch_);
  reassert_control_rows(resolved);
  return info;
}

void Subarray::precharge() {
  ++op_counter_;
  activated_ = false;
  raised_.clear();
  latch_ = BitRow();
}

const BitRow& Subarray::read_row() const {
  if (!activated_)
    throw SimError(ErrCode::NOT_ACTIVATED, "READ issued to a precharged bank");
  return latch_;
}

void Subarray::write_row(const BitRow& bits) {
  if (!activated_)
    throw SimError(ErrCode::NOT_ACTIVATED, "WRITE issued to a precharged bank");
  if (bits.bits() != cfg_.row_bits)
    throw SimError(ErrCode::BAD_CONFIG, "row width mismatch on WRITE");
  ++op_counter_;
  latch_ = bits;
  std::vector<Resolved> touched;
  for (const auto& wl : raised_) {
    Resolved r = resolve(wl);
    store_through(r, latch_);
    touched.push_back(r);
  }
  reassert_control_rows(touched);
}

const BitRow& Subarray::row(const Wordline& wl) const {
  return rows_[resolve(wl).row];
}

void Subarray::set_row(const Wordline& wl, const BitRow& bits) {
  if (wl.line == Line::C0 || wl.line == Line::C1)
    throw SimError(ErrCode::PROTOCOL, "control rows are fixed constants");
  if (bits.bits() != cfg_.row_bits)
    throw SimError(ErrCode::BAD_CONFIG, "row width mismatch");
  Resolved r = resolve(wl);
  ++op_counter_;
  // set_row stores cell contents directly; the wordline's side does not
  // complement here (both DCC wordlines name the same cell row).
  rows_[r.row] = bits;
  last_touch_[r.row] = op_counter_;
}

std::string Subarray::dump_json() const {
  json j;
  j["schema_version"] = 1;
  j["row_bits"] = cfg_.row_bits;
  j["data_rows"] = cfg_.data_rows;
  j["phase"] = activated_ ? "ACTIVATED" : "PRECHARGED";
  j["op_counter"] = op_counter_;
  json rows;
  const char* names[kRowDataBase] = {"T0", "T1", "T2", "T3",
                                     "DCC0", "DCC1", "C0", "C1"};
  for (int i = 0; i < kRowDataBase; ++i) rows[names[i]] = rows_[i].to_hex();
  json d = json::array();
  for (int i = 0; i < cfg_.data_rows; ++i)
    d.push_back(rows_[kRowDataBase + i].to_hex());
  rows["D"] = d;
  j["rows"] = rows;
  if (activated_) {
    j["latch"] = latch_.to_hex();
    json raised = json::array();
    for (const auto& wl : raised_) raised.push_back(wl.str());
    j["raised"] = raised;
  }
  return j.dump(2);
}

static Wordline wordline_from_str(const std::string& s) {
  if (s == "T0" || s == "T1" || s == "T2" || s == "T3")
    return Wordline::t(s[1] - '0');
  if (s == "DCC0_D") return Wordline::dcc_d(0);
  if (s == "DCC0_N") return Wordline::dcc_n(0);
  if (s == "DCC1_D") return Wordline::dcc_d(1);
  if (s == "DCC1_N") return Wordline::dcc_n(1);
  if (s == "C0") return Wordline::c0();
  if (s == "C1") return Wordline::c1();
  if (!s.empty() && s[0] == 'D') return Wordline::data(std::stoi(s.substr(1)));
  throw SimError(ErrCode::BAD_CONFIG, "bad wordline name '" + s + "'");
}

Subarray Subarray::load_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SimError(ErrCode::BAD_CONFIG, std::string("snapshot json: ") + e.what());
  }
  SubarrayConfig cfg;
  cfg.row_bits = j.at("row_bits").get<int>();
  cfg.data_rows = j.at("data_rows").get<int>();
  Subarray sub(cfg);
  const json& rows = j.at("rows");
  const char* names[kRowDataBase] = {"T0", "T1", "T2", "T3",
                                     "DCC0", "DCC1", "C0", "C1"};
  for (int i = 0; i < kRowDataBase; ++i)
    sub.rows_[i] = BitRow::from_hex(rows.at(names[i]).get<std::string>(),
                                    cfg.row_bits);
  if (sub.rows_[kRowC0].any())
    throw SimError(ErrCode::BAD_CONFIG, "snapshot: C0 must be all zeros");
  if (sub.rows_[kRowC1].popcount() != static_cast<uint64_t>(cfg.row_bits))
    throw SimError(ErrCode::BAD_CONFIG, "snapshot: C1 must be all ones");
  const json& d = rows.at("D");
  if (static_cast<int>(d.size()) != cfg.data_rows)
    throw SimError(ErrCode::BAD_CONFIG, "snapshot: D row count mismatch");
  for (int i = 0; i < cfg.data_rows; ++i)
    sub.rows_[kRowDataBase + i] =
        BitRow::from_hex(d[i].get<std::string>(), cfg.row_bits);
  sub.op_counter_ = j.value("op_counter", 0);
  if (j.value("phase", "PRECHARGED") == std::string("ACTIVATED")) {
    sub.activated_ = true;
    sub.latch_ = BitRow::from_hex(j.at("latch").get<std::string>(), cfg.row_bits);
    for (const auto& s : j.at("raised"))
      sub.raised_.push_back(wordline_from_str(s.get<std::string>()));
  }
  return sub;
}

}  // namespace buddysim
