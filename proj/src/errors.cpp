#include "buddysim/errors.h"

namespace buddysim {

const char* err_name(ErrCode c) {
  switch (c) {
    case ErrCode::NOT_ACTIVATED: return "NOT_ACTIVATED";
    case ErrCode::PROTOCOL: return "PROTOCOL";
    case ErrCode::RELIABILITY_FAULT: return "RELIABILITY_FAULT";
    case ErrCode::CROSS_SUBARRAY: return "CROSS_SUBARRAY";
    case ErrCode::MISALIGNED: return "MISALIGNED";
    case ErrCode::SIZE_TOO_SMALL: return "SIZE_TOO_SMALL";
    case ErrCode::CONSTANT_OUT_OF_RANGE: return "CONSTANT_OUT_OF_RANGE";
    case ErrCode::INSUFFICIENT_BITMAPS: return "INSUFFICIENT_BITMAPS";
    case ErrCode::UNCALIBRATED: return "UNCALIBRATED";
    case ErrCode::FIT_DIVERGED: return "FIT_DIVERGED";
    case ErrCode::BAD_CONFIG: return "BAD_CONFIG";
    case ErrCode::BAD_TRACE: return "BAD_TRACE";
  }
  return "UNKNOWN";
}

}  // namespace buddysim
