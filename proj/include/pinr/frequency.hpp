#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "pinr/tensor.hpp"

namespace pinr {

// Integer frequency multiplier (k1, k2).
struct IntFrequency {
  int k1 = 0;
  int k2 = 0;
  auto operator<=>(const IntFrequency&) const = default;

  IntFrequency negated() const { return {-k1, -k2}; }
  long long norm_squared() const {
    return static_cast<long long>(k1) * k1 + static_cast<long long>(k2) * k2;
  }
};

struct Period {
  double p1 = 2.0;
  double p2 = 2.0;
  bool operator==(const Period&) const = default;
};

// The frozen first layer of a periodic network: integer multipliers and the
// period they refer to. Row i realizes the angular frequency
// (k_i1 * 2pi / P1, k_i2 * 2pi / P2).
class FrequencySet {
 public:
  FrequencySet() = default;
  // Throws ConfigError if a row is (0,0) or two rows are equal or opposite.
  FrequencySet(std::vector<IntFrequency> multipliers, Period period);

  const std::vector<IntFrequency>& multipliers() const noexcept { return k_; }
  const Period& period() const noexcept { return period_; }
  std::size_t size() const noexcept { return k_.size(); }

  // n x 2 matrix of angular frequencies.
  diff::Tensor angular() const;

 private:
  std::vector<IntFrequency> k_;
  Period period_;
};

// Half-plane band: 0 <= k1 <= b1, -b2 <= k2 <= b2, dropping (0,0) and (0, k2 < 0)
// so no two members are sign pairs. Size (b1+1)(2 b2+1) - (b2+1).
std::vector<IntFrequency> enumerate_band(int b1, int b2);

std::size_t band_size(int b1, int b2);

// The `count` members of `pool` with the smallest Euclidean norm. Members of
// equal norm are ordered by a seeded shuffle, so the cut at the last norm
// shell is a uniform random choice. Returned in increasing norm order.
std::vector<IntFrequency> select_lowest_norm(std::vector<IntFrequency> pool, std::size_t count,
                                             std::uint64_t seed);

}  // namespace pinr
