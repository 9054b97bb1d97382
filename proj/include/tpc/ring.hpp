#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tpc/errors.hpp"

namespace tpc {

/// Mask with the low `bits` bits set; `bits` must be in [1, 64].
constexpr std::uint64_t width_mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
}

/// True for the widths the library accepts: 1 (boolean), 8 (test width), 32, 64.
constexpr bool supported_width(unsigned bits) {
  return bits == 1 || bits == 8 || bits == 32 || bits == 64;
}

/// Element of Z_{2^bits}. The width travels with the value so one binary serves
/// every ring; mixing widths in one operation is a contract violation.
class RingElement {
 public:
  constexpr RingElement() = default;
  RingElement(std::uint64_t value, unsigned bits) : value_(value & width_mask(bits)), bits_(bits) {
    if (!supported_width(bits)) throw ContractViolation("unsupported ring width " + std::to_string(bits));
  }

  static RingElement zero(unsigned bits) { return {0, bits}; }
  static RingElement one(unsigned bits) { return {1, bits}; }

  constexpr std::uint64_t value() const { return value_; }
  constexpr unsigned bits() const { return bits_; }

  friend RingElement operator+(RingElement a, RingElement b) {
    check_same(a, b);
    return raw(a.value_ + b.value_, a.bits_);
  }
  friend RingElement operator-(RingElement a, RingElement b) {
    check_same(a, b);
    return raw(a.value_ - b.value_, a.bits_);
  }
  friend RingElement operator*(RingElement a, RingElement b) {
    check_same(a, b);
    return raw(a.value_ * b.value_, a.bits_);
  }
  friend RingElement operator-(RingElement a) { return raw(std::uint64_t{0} - a.value_, a.bits_); }

  RingElement& operator+=(RingElement o) { return *this = *this + o; }
  RingElement& operator-=(RingElement o) { return *this = *this - o; }
  RingElement& operator*=(RingElement o) { return *this = *this * o; }

  friend bool operator==(RingElement a, RingElement b) { return a.bits_ == b.bits_ && a.value_ == b.value_; }

 private:
  static RingElement raw(std::uint64_t v, unsigned bits) {
    RingElement r;
    r.value_ = v & width_mask(bits);
    r.bits_ = bits;
    return r;
  }
  static void check_same(RingElement a, RingElement b) {
    if (a.bits_ != b.bits_) throw ContractViolation("ring width mismatch");
  }

  std::uint64_t value_ = 0;
  unsigned bits_ = 64;
};

inline RingElement ring_add(RingElement a, RingElement b) { return a + b; }
inline RingElement ring_sub(RingElement a, RingElement b) { return a - b; }
inline RingElement ring_mul(RingElement a, RingElement b) { return a * b; }
inline RingElement ring_neg(RingElement a) { return -a; }

/// Two's-complement sign bit. Undefined for the boolean ring.
int msb(RingElement a);

/// Signed interpretation of a (two's complement over `a.bits()` bits).
std::int64_t to_signed(RingElement a);

/// Reduce a signed integer into the ring.
RingElement from_signed(std::int64_t v, unsigned bits);

// Fixed point: signed two's complement over Z_{2^64}, `frac_bits` fractional bits.
inline constexpr unsigned kFracBits = 13;
inline constexpr unsigned kFixedWidth = 64;

/// round(x * 2^frac_bits) mod 2^64, rounding half away from zero.
/// Throws RangeError when |x| >= 2^(63 - frac_bits).
RingElement fx_encode(double x, unsigned frac_bits = kFracBits);
double fx_decode(RingElement raw, unsigned frac_bits = kFracBits);

/// Bytes per element on the wire: ceil(bits / 8).
constexpr std::size_t element_bytes(unsigned bits) { return (bits + 7) / 8; }

/// Little-endian packing. Width 1 packs eight elements per byte (LSB first).
std::vector<std::uint8_t> pack_elements(std::span<const RingElement> elems, unsigned bits);
std::vector<RingElement> unpack_elements(std::span<const std::uint8_t> bytes, unsigned bits, std::size_t count);
std::size_t packed_size(std::size_t count, unsigned bits);

}  // namespace tpc
