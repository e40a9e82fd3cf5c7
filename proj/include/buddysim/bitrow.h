#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace buddysim {

// One row of cells, packed 64 bits per word. Row widths are multiples of 64
// so word-wise operations never need tail masking.
class BitRow {
 public:
  BitRow() = default;
  explicit BitRow(int bits, bool value = false);

  int bits() const { return bits_; }
  size_t words() const { return w_.size(); }
  uint64_t* data() { return w_.data(); }
  const uint64_t* data() const { return w_.data(); }

  bool get(int i) const;
  void set(int i, bool v);
  void fill(bool v);

  uint64_t popcount() const;
  // Set bits among positions [0, nbits).
  uint64_t popcount_prefix(int nbits) const;
  bool any() const;

  // Fills every bit independently; density 0.5 consumes one word of
  // generator output per 64 bits, other densities one draw per bit.
  void randomize(std::mt19937_64& rng, double density = 0.5);

  std::string to_hex() const;  // little-endian byte order, lowercase
  static BitRow from_hex(const std::string& hex, int bits);

  bool operator==(const BitRow&) const = default;

 private:
  int bits_ = 0;
  std::vector<uint64_t> w_;
};

BitRow bit_and(const BitRow& a, const BitRow& b);
BitRow bit_or(const BitRow& a, const BitRow& b);
BitRow bit_xor(const BitRow& a, const BitRow& b);
BitRow bit_not(const BitRow& a);

// Per-bit majority of three rows.
BitRow majority3(const BitRow& a, const BitRow& b, const BitRow& c);
// Positions where the three rows agree (all zero or all one).
BitRow uniform3(const BitRow& a, const BitRow& b, const BitRow& c);
// Positions where exactly one of the three bits is set.
BitRow exactly_one3(const BitRow& a, const BitRow& b, const BitRow& c);

}  // namespace buddysim
