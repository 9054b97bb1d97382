#include "tpc/ring.hpp"

#include <cmath>
#include <string>

namespace tpc {

int msb(RingElement a) {
  if (a.bits() < 2) throw ContractViolation("msb undefined for the boolean ring");
  return static_cast<int>((a.value() >> (a.bits() - 1)) & 1U);
}

std::int64_t to_signed(RingElement a) {
  if (a.bits() == 64) return static_cast<std::int64_t>(a.value());
  const std::uint64_t sign = std::uint64_t{1} << (a.bits() - 1);
  if (a.value() & sign) return static_cast<std::int64_t>(a.value()) - static_cast<std::int64_t>(sign << 1);
  return static_cast<std::int64_t>(a.value());
}

RingElement from_signed(std::int64_t v, unsigned bits) { return {static_cast<std::uint64_t>(v), bits}; }

RingElement fx_encode(double x, unsigned frac_bits) {
  if (frac_bits >= 63) throw ContractViolation("frac_bits too large");
  if (!std::isfinite(x)) throw RangeError("fixed-point encode of a non-finite value");
  const double limit = std::ldexp(1.0, static_cast<int>(63 - frac_bits));
  if (std::fabs(x) >= limit) throw RangeError("fixed-point overflow: |x| >= 2^" + std::to_string(63 - frac_bits));
  // std::round is half-away-from-zero.
  const double scaled = std::round(std::ldexp(x, static_cast<int>(frac_bits)));
  return from_signed(static_cast<std::int64_t>(scaled), kFixedWidth);
}

double fx_decode(RingElement raw, unsigned frac_bits) {
  return std::ldexp(static_cast<double>(to_signed(raw)), -static_cast<int>(frac_bits));
}

std::size_t packed_size(std::size_t count, unsigned bits) {
  if (bits == 1) return (count + 7) / 8;
  return count * element_bytes(bits);
}

std::vector<std::uint8_t> pack_elements(std::span<const RingElement> elems, unsigned bits) {
  std::vector<std::uint8_t> out(packed_size(elems.size(), bits), 0);
  if (bits == 1) {
    for (std::size_t i = 0; i < elems.size(); ++i) {
      if (elems[i].bits() != 1) throw ContractViolation("pack: width mismatch");
      out[i / 8] |= static_cast<std::uint8_t>((elems[i].value() & 1U) << (i % 8));
    }
    return out;
  }
  const std::size_t nb = element_bytes(bits);
  for (std::size_t i = 0; i < elems.size(); ++i) {
    if (elems[i].bits() != bits) throw ContractViolation("pack: width mismatch");
    std::uint64_t v = elems[i].value();
    for (std::size_t b = 0; b < nb; ++b) out[i * nb + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return out;
}

std::vector<RingElement> unpack_elements(std::span<const std::uint8_t> bytes, unsigned bits, std::size_t count) {
  if (bytes.size() != packed_size(count, bits)) throw ContractViolation("unpack: byte count does not match element count");
  std::vector<RingElement> out;
  out.reserve(count);
  if (bits == 1) {
    for (std::size_t i = 0; i < count; ++i) out.emplace_back((bytes[i / 8] >> (i % 8)) & 1U, 1);
    return out;
  }
  const std::size_t nb = element_bytes(bits);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < nb; ++b) v |= std::uint64_t{bytes[i * nb + b]} << (8 * b);
    out.emplace_back(v, bits);
  }
  return out;
}

}  // namespace tpc
