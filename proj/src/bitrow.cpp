#include "buddysim/bitrow.h"

#include <bit>

#include "buddysim/errors.h"

namespace buddysim {

BitRow::BitRow(int bits, bool value) : bits_(bits) {
  if (bits <= 0 || bits % 64 != 0)
    throw SimError(ErrCode::BAD_CONFIG,
                   "row width must be a positive multiple of 64 bits, got " +
                       std::to_string(bits));
  w_.assign(static_cast<size_t>(bits) / 64, value ? ~0ull : 0ull);
}

bool BitRow::get(int i) const {
  return (w_[static_cast<size_t>(i) / 64] >> (i % 64)) & 1ull;
}

void BitRow::set(int i, bool v) {
  uint64_t mask = 1ull << (i % 64);
  if (v)
    w_[static_cast<size_t>(i) / 64] |= mask;
  else
    w_[static_cast<size_t>(i) / 64] &= ~mask;
}

void BitRow::fill(bool v) {
  for (auto& w : w_) w = v ? ~0ull : 0ull;
}

uint64_t BitRow::popcount() const {
  uint64_t n = 0;
  for (auto w : w_) n += static_cast<uint64_t>(std::popcount(w));
  return n;
}

uint64_t BitRow::popcount_prefix(int nbits) const {
  if (nbits >= bits_) return popcount();
  uint64_t n = 0;
  int full = nbits / 64;
  for (int i = 0; i < full; ++i) n += static_cast<uint64_t>(std::popcount(w_[i]));
  int rem = nbits % 64;
  if (rem) n += static_cast<uint64_t>(std::popcount(w_[full] & ((1ull << rem) - 1)));
  return n;
}

bool BitRow::any() const {
  for (auto w : w_)
    if (w) return true;
  return false;
}

void BitRow::randomize(std::mt19937_64& rng, double density) {
  if (density == 0.5) {
    for (auto& w : w_) w = rng();
    return;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < bits_; ++i) set(i, u(rng) < density);
}

std::string BitRow::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(static_cast<size_t>(bits_) / 4);
  for (int byte = 0; byte < bits_ / 8; ++byte) {
    uint8_t v = static_cast<uint8_t>(w_[byte / 8] >> (8 * (byte % 8)));
    s.push_back(digits[v >> 4]);
    s.push_back(digits[v & 0xf]);
  }
  return s;
}

static int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw SimError(ErrCode::BAD_CONFIG, std::string("bad hex digit '") + c + "'");
}

BitRow BitRow::from_hex(const std::string& hex, int bits) {
  BitRow r(bits);
  if (hex.size() != static_cast<size_t>(bits) / 4)
    throw SimError(ErrCode::BAD_CONFIG,
                   "hex row length " + std::to_string(hex.size()) +
                       " does not match " + std::to_string(bits) + " bits");
  for (int byte = 0; byte < bits / 8; ++byte) {
    uint64_t v = static_cast<uint64_t>(hex_digit(hex[2 * byte]) << 4 |
                                       hex_digit(hex[2 * byte + 1]));
    r.w_[byte / 8] |= v << (8 * (byte % 8));
  }
  return r;
}

namespace {
void check_same_width(const BitRow& a, const BitRow& b) {
  if (a.bits() != b.bits())
    throw SimError(ErrCode::BAD_CONFIG, "row width mismatch");
}
}  // namespace

BitRow bit_and(const BitRow& a, const BitRow& b) {
  check_same_width(a, b);
  BitRow r(a.bits());
  for (size_t i = 0; i < a.words(); ++i) r.data()[i] = a.data()[i] & b.data()[i];
  return r;
}

BitRow bit_or(const BitRow& a, const BitRow& b) {
  check_same_width(a, b);
  BitRow r(a.bits());
  for (size_t i = 0; i < a.words(); ++i) r.data()[i] = a.data()[i] | b.data()[i];
  return r;
}

BitRow bit_xor(const BitRow& a, const BitRow& b) {
  check_same_width(a, b);
  BitRow r(a.bits());
  for (size_t i = 0; i < a.words(); ++i) r.data()[i] = a.data()[i] ^ b.data()[i];
  return r;
}

BitRow bit_not(const BitRow& a) {
  BitRow r(a.bits());
  for (size_t i = 0; i < a.words(); ++i) r.data()[i] = ~a.data()[i];
  return r;
}

BitRow majority3(const BitRow& a, const BitRow& b, const BitRow& c) {
  check_same_width(a, b);
  check_same_width(a, c);
  BitRow r(a.bits());
  for (size_t i = 0; i < a.words(); ++i) {
    uint64_t x = a.data()[i], y = b.data()[i], z = c.data()[i];
    r.data()[i] = (x & y) | (y & z) | (z & x);
  }
  return r;
}

BitRow uniform3(const BitRow& a, const BitRow& b, const BitRow& c) {
  check_same_width(a, b);
  check_same_width(a, c);
  BitRow r(a.bits());
  for (size_t i = 0; i < a.words(); ++i) {
    uint64_t x = a.data()[i], y = b.data()[i], z = c.data()[i];
    r.data()[i] = (x & y & z) | (~x & ~y & ~z);
  }
  return r;
}

BitRow exactly_one3(const BitRow& a, const BitRow& b, const BitRow& c) {
  check_same_width(a, b);
  check_same_width(a, c);
  BitRow r(a.bits());
  for (size_t i = 0; i < a.words(); ++i) {
    uint64_t x = a.data()[i], y = b.data()[i], z = c.data()[i];
    r.data()[i] = (x & ~y & ~z) | (~x & y & ~z) | (~x & ~y & z);
  }
  return r;
}

}  // namespace buddysim
