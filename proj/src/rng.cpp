#include "thermoresp/rng.hpp"

#include <cmath>
#include <numbers>

namespace thermoresp::rng {

double uniform01(std::uint64_t key) noexcept {
  // 53 random bits, shifted by half an ulp so 0 is never produced.
  return (static_cast<double>(mix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t key) noexcept {
  const double u1 = uniform01(key);
  const double u2 = uniform01(key ^ 0xD1B54A32D192ED03ULL);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace thermoresp::rng
