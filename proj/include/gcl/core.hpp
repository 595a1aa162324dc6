// Common scalar/index types and small helpers shared across the library.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcl {

using index_t = std::int64_t;

constexpr int kMaxDim = 4;

using Extents = std::array<int, kMaxDim>;
using Spacing = std::array<double, kMaxDim>;

// All precondition violations surface as std::invalid_argument.
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

struct DivergedError : std::runtime_error {
  index_t step;
  explicit DivergedError(index_t s)
      : std::runtime_error("field diverged (NaN/Inf) at step " + std::to_string(s)), step(s) {}
};

inline int popcount4(unsigned m) {
  return ((m >> 0) & 1) + ((m >> 1) & 1) + ((m >> 2) & 1) + ((m >> 3) & 1);
}

}  // namespace gcl
