#pragma once

#include <cstdint>

namespace disparity {

__extension__ using uint128 = unsigned __int128;

/// Non-negative fraction of counts. Comparisons are exact.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

/// -1, 0, +1 as a <, ==, > b. Both denominators must be nonzero.
inline int compare(Ratio a, Ratio b) {
  const uint128 lhs = static_cast<uint128>(a.num) * b.den;
  const uint128 rhs = static_cast<uint128>(b.num) * a.den;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline double to_double(Ratio r) { return static_cast<double>(r.num) / static_cast<double>(r.den); }

}  // namespace disparity
