#pragma once

#include <stdexcept>
#include <string>

namespace buddysim {

enum class ErrCode {
  NOT_ACTIVATED,
  PROTOCOL,
  RELIABILITY_FAULT,
  CROSS_SUBARRAY,
  MISALIGNED,
  SIZE_TOO_SMALL,
  CONSTANT_OUT_OF_RANGE,
  INSUFFICIENT_BITMAPS,
  UNCALIBRATED,
  FIT_DIVERGED,
  BAD_CONFIG,
  BAD_TRACE,
};

const char* err_name(ErrCode c);

class SimError : public std::runtime_error {
 public:
  SimError(ErrCode code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg),
        code_(code) {}

  ErrCode code() const { return code_; }

 private:
  ErrCode code_;
};

}  // namespace buddysim
