#include "pinr/frequency.hpp"

#include <algorithm>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "pinr/errors.hpp"

namespace pinr {

FrequencySet::FrequencySet(std::vector<IntFrequency> multipliers, Period period)
    : k_(std::move(multipliers)), period_(period) {
  if (!(period_.p1 > 0.0 && period_.p2 > 0.0)) throw ConfigError("periods must be positive");
  std::set<IntFrequency> seen;
  for (const IntFrequency& k : k_) {
    if (k == IntFrequency{0, 0}) throw ConfigError("frequency set contains (0,0)");
    if (seen.contains(k) || seen.contains(k.negated())) {
      throw ConfigError("frequency set repeats (" + std::to_string(k.k1) + "," +
                        std::to_string(k.k2) + ") up to sign");
    }
    seen.insert(k);
  }
}

diff::Tensor FrequencySet::angular() const {
  diff::Tensor omega({k_.size(), 2});
  const double s1 = 2.0 * std::numbers::pi / period_.p1;
  const double s2 = 2.0 * std::numbers::pi / period_.p2;
  for (std::size_t i = 0; i < k_.size(); ++i) {
    omega.at(i, 0) = k_[i].k1 * s1;
    omega.at(i, 1) = k_[i].k2 * s2;
  }
  return omega;
}

std::vector<IntFrequency> enumerate_band(int b1, int b2) {
  if (b1 < 0 || b2 < 0) throw ConfigError("band limits must be nonnegative");
  std::vector<IntFrequency> out;
  out.reserve(band_size(b1, b2));
  for (int k1 = 0; k1 <= b1; ++k1) {
    for (int k2 = -b2; k2 <= b2; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      out.push_back({k1, k2});
    }
  }
  return out;
}

std::size_t band_size(int b1, int b2) {
  const auto a = static_cast<std::size_t>(b1), b = static_cast<std::size_t>(b2);
  return (a + 1) * (2 * b + 1) - (b + 1);
}

std::vector<IntFrequency> select_lowest_norm(std::vector<IntFrequency> pool, std::size_t count,
                                             std::uint64_t seed) {
  if (count > pool.size()) {
    throw ConfigError("requested " + std::to_string(count) + " frequencies but only " +
                      std::to_string(pool.size()) + " are available (short by " +
                      std::to_string(count - pool.size()) + ")");
  }
  std::sort(pool.begin(), pool.end());
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::stable_sort(pool.begin(), pool.end(), [](const IntFrequency& a, const IntFrequency& b) {
    return a.norm_squared() < b.norm_squared();
  });
  pool.resize(count);
  return pool;
}

}  // namespace pinr
