#include "buddysim/analog.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "buddysim/errors.h"

namespace buddysim {

using nlohmann::json;

void CellElectrical::validate() const {
  if (!(charge_fraction >= 0.0 && charge_fraction <= 1.0))
    throw SimError(ErrCode::BAD_CONFIG, "charge_fraction outside [0,1]");
  if (!(cap_multiplier > 0.0 && cap_multiplier < 2.0))
    throw SimError(ErrCode::BAD_CONFIG, "cap_multiplier outside (0,2)");
}

void ChargeShareConfig::validate() const {
  if (!(cell_cap_fF > 0.0)) throw SimError(ErrCode::BAD_CONFIG, "cell_cap_fF <= 0");
  if (!(bitline_cap_fF > 0.0))
    throw SimError(ErrCode::BAD_CONFIG, "bitline_cap_fF <= 0");
  if (!(tie_epsilon >= 0.0)) throw SimError(ErrCode::BAD_CONFIG, "tie_epsilon < 0");
}

double charge_share_delta(std::span<const CellElectrical> cells,
                          const ChargeShareConfig& cfg) {
  cfg.validate();
  if (cells.empty() || cells.size() > 3)
    throw SimError(ErrCode::BAD_CONFIG, "charge sharing needs 1-3 cells");
  double num = 0.5 * cfg.bitline_cap_fF;
  double den = cfg.bitline_cap_fF;
  for (const auto& c : cells) {
    c.validate();
    double cap = c.cap_multiplier * cfg.cell_cap_fF;
    num += c.charge_fraction * cap;
    den += cap;
  }
  return num / den - 0.5;
}

TraOutcome tra_outcome(const std::array<CellElectrical, 3>& cells,
                       const ChargeShareConfig& cfg) {
  double d = charge_share_delta(std::span<const CellElectrical>(cells), cfg);
  if (d > cfg.tie_epsilon) return TraOutcome::ONE;
  if (d < -cfg.tie_epsilon) return TraOutcome::ZERO;
  return TraOutcome::FAIL_TIE;
}

double analytic_failure_threshold(const ChargeShareConfig& cfg) {
  cfg.validate();
  return 1.0 / 3.0;
}

const char* tra_pattern_name(TraPattern p) {
  switch (p) {
    case TraPattern::P0s0w0w: return "0s0w0w";
    case TraPattern::P1s0w0w: return "1s0w0w";
    case TraPattern::P0s1w1w: return "0s1w1w";
    case TraPattern::P1s1w1w: return "1s1w1w";
  }
  return "?";
}

std::optional<TraPattern> tra_pattern_from_name(const std::string& name) {
  for (auto p : kAllTraPatterns)
    if (name == tra_pattern_name(p)) return p;
  return std::nullopt;
}

bool tra_pattern_majority(TraPattern p) {
  // Majority of (strong, weak, weak) stored values.
  return p == TraPattern::P0s1w1w || p == TraPattern::P1s1w1w;
}

std::array<CellElectrical, 3> pattern_cells(TraPattern p, double variation_pct) {
  if (!(variation_pct >= 0.0 && variation_pct < 100.0))
    throw SimError(ErrCode::BAD_CONFIG, "variation_pct outside [0,100)");
  double v = variation_pct / 100.0;
  double strong_q =
      (p == TraPattern::P1s0w0w || p == TraPattern::P1s1w1w) ? 1.0 : 0.0;
  double weak_q =
      (p == TraPattern::P0s1w1w || p == TraPattern::P1s1w1w) ? 1.0 : 0.0;
  return {CellElectrical{strong_q, 1.0 + v}, CellElectrical{weak_q, 1.0 - v},
          CellElectrical{weak_q, 1.0 - v}};
}

LatencyCalibration LatencyCalibration::defaults() {
  LatencyCalibration c;
  auto row = [](std::initializer_list<double> xs) {
    std::array<std::optional<double>, 6> r{};
    size_t i = 0;
    for (double x : xs) r[i++] = x;
    return r;
  };
  c.tra_ns[static_cast<int>(TraPattern::P0s0w0w)] =
      row({16.4, 16.3, 16.3, 16.4, 16.3, 16.2});
  c.tra_ns[static_cast<int>(TraPattern::P1s0w0w)] =
      row({18.3, 18.6, 18.8, 19.1, 19.7});  // fails at 25%
  c.tra_ns[static_cast<int>(TraPattern::P0s1w1w)] =
      row({24.9, 25.0, 25.2, 25.3, 25.4, 25.7});
  c.tra_ns[static_cast<int>(TraPattern::P1s1w1w)] =
      row({22.5, 22.3, 22.2, 22.2, 22.2, 22.1});
  return c;
}

LatencyCalibration LatencyCalibration::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SimError(ErrCode::BAD_CONFIG, std::string("calibration json: ") + e.what());
  }
  LatencyCalibration c;
  if (!j.is_object() || !j.contains("tra"))
    throw SimError(ErrCode::BAD_CONFIG, "calibration json needs a 'tra' object");
  c.single_act_charged_ns = j.value("single_act_charged_ns", 20.9);
  c.single_act_empty_ns = j.value("single_act_empty_ns", 13.5);
  c.standard_act_ns = j.value("standard_act_ns", 35.0);
  for (auto p : kAllTraPatterns) {
    const std::string pname = tra_pattern_name(p);
    if (!j["tra"].contains(pname))
      throw SimError(ErrCode::BAD_CONFIG, "calibration missing pattern " + pname);
    const json& row = j["tra"][pname];
    for (size_t i = 0; i < kVariationGrid.size(); ++i) {
      const std::string key = std::to_string(kVariationGrid[i]);
      if (!row.contains(key))
        throw SimError(ErrCode::BAD_CONFIG,
                       "calibration " + pname + " missing variation " + key);
      const json& v = row[key];
      if (v.is_string() && v.get<std::string>() == "FAIL")
        c.tra_ns[static_cast<int>(p)][i] = std::nullopt;
      else if (v.is_number())
        c.tra_ns[static_cast<int>(p)][i] = v.get<double>();
      else
        throw SimError(ErrCode::BAD_CONFIG,
                       "calibration entry must be a number or \"FAIL\"");
    }
  }
  return c;
}

std::string LatencyCalibration::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["single_act_charged_ns"] = single_act_charged_ns;
  j["single_act_empty_ns"] = single_act_empty_ns;
  j["standard_act_ns"] = standard_act_ns;
  for (auto p : kAllTraPatterns) {
    json row;
    for (size_t i = 0; i < kVariationGrid.size(); ++i) {
      const auto& e = tra_ns[static_cast<int>(p)][i];
      const std::string key = std::to_string(kVariationGrid[i]);
      if (e)
        row[key] = *e;
      else
        row[key] = "FAIL";
    }
    j["tra"][tra_pattern_name(p)] = row;
  }
  return j.dump(2);
}

std::optional<double> activation_latency(const ActivationQuery& q,
                                         const LatencyCalibration& cal) {
  switch (q.kind) {
    case ActivationQuery::SINGLE_CHARGED: return cal.single_act_charged_ns;
    case ActivationQuery::SINGLE_EMPTY: return cal.single_act_empty_ns;
    case ActivationQuery::SINGLE_STANDARD: return cal.standard_act_ns;
    case ActivationQuery::TRA: break;
  }
  if (q.variation_pct < 0.0)
    throw SimError(ErrCode::BAD_CONFIG, "variation_pct < 0");
  const auto& row = cal.tra_ns[static_cast<int>(q.pattern)];
  const auto& grid = LatencyCalibration::kVariationGrid;

  // Number of leading numeric entries; past them the pattern fails.
  size_t numeric = 0;
  while (numeric < row.size() && row[numeric]) ++numeric;
  if (numeric == 0) return std::nullopt;

  double v = q.variation_pct;
  if (numeric < row.size() && v >= grid[numeric]) return std::nullopt;
  double last_pct = grid[numeric - 1];
  if (v >= last_pct) return row[numeric - 1];  // clamp past the last point

  size_t hi = 1;
  while (grid[hi] < v) ++hi;
  double x0 = grid[hi - 1], x1 = grid[hi];
  double y0 = *row[hi - 1], y1 = *row[hi];
  return y0 + (y1 - y0) * (v - x0) / (x1 - x0);
}

std::optional<double> calibrated_failure_threshold(const LatencyCalibration& cal,
                                                   TraPattern p) {
  const auto& row = cal.tra_ns[static_cast<int>(p)];
  for (size_t i = 0; i < row.size(); ++i)
    if (!row[i]) return static_cast<double>(LatencyCalibration::kVariationGrid[i]);
  return std::nullopt;
}

}  // namespace buddysim
