#pragma once

#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "spikegap/errors.hpp"

namespace spikegap {

namespace mp = boost::multiprecision;

// Expression templates off: the solvers are written against plain value semantics.
using Quad = mp::number<mp::cpp_bin_float<113, mp::digit_base_2>, mp::et_off>;
using Octuple = mp::number<mp::cpp_bin_float<237, mp::digit_base_2>, mp::et_off>;

inline constexpr int kDoubleBits = 53;
inline constexpr int kQuadBits = 113;
inline constexpr int kOctupleBits = 237;
inline constexpr int kMaxPrecisionBits = kOctupleBits;

template <class Real>
inline constexpr int mantissa_bits = std::numeric_limits<Real>::digits;

/// Smallest supported backend with at least `bits` of mantissa.
inline int backend_bits(int bits) {
  if (bits <= 0) throw ConfigError("precision_bits must be positive, got " + std::to_string(bits));
  if (bits <= kDoubleBits) return kDoubleBits;
  if (bits <= kQuadBits) return kQuadBits;
  if (bits <= kOctupleBits) return kOctupleBits;
  throw ConfigError("precision_bits " + std::to_string(bits) + " exceeds the backend cap of " +
                    std::to_string(kMaxPrecisionBits));
}

/// Next rung of the adaptive ladder, or 0 at the cap.
inline int next_precision(int bits) {
  const int b = backend_bits(bits);
  if (b == kDoubleBits) return kQuadBits;
  if (b == kQuadBits) return kOctupleBits;
  return 0;
}

/// Calls f.template operator()<Real>() with the backend chosen for `bits`.
template <class F>
decltype(auto) with_precision(int bits, F&& f) {
  switch (backend_bits(bits)) {
    case kDoubleBits:
      return f.template operator()<double>();
    case kQuadBits:
      return f.template operator()<Quad>();
    default:
      return f.template operator()<Octuple>();
  }
}

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

}  // namespace spikegap
