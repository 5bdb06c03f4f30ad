#include "pinr/mrnet.hpp"

#include <algorithm>
#include <cmath>

#include "pinr/errors.hpp"
#include "pinr/kernels.hpp"

namespace pinr {

std::vector<StageConfig> table1_stages() {
  return {
      {3, 3, 24, {32}},     {6, 6, 48, {32}},     {12, 12, 80, {64}},
      {24, 24, 192, {160}}, {56, 56, 384, {256}}, {128, 128, 1024, {512}},
  };
}

std::size_t MrNet::channels() const { return stages.empty() ? 0 : stages.front().channels(); }

Period MrNet::period() const { return stages.empty() ? Period{} : stages.front().period; }

bool MrNet::periodic() const {
  return std::all_of(stages.begin(), stages.end(), [](const PeriodicInr& s) { return s.periodic(); });
}

void MrNet::validate() const {
  if (stages.empty()) throw ConfigError("multiresolution network has no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    stages[i].validate();
    if (stages[i].channels() != channels()) {
      throw ShapeError("stage " + std::to_string(i) + " has a different channel count");
    }
    if (!(stages[i].period == period())) {
      throw ShapeError("stage " + std::to_string(i) + " has a different period");
    }
  }
}

std::vector<double> blend_weights(double t, std::size_t n) {
  t = std::clamp(t, 0.0, static_cast<double>(n));
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = std::clamp(t - static_cast<double>(i) + 1.0, 0.0, 1.0);
  return c;
}

std::uint64_t stage_seed(std::uint64_t seed, std::size_t stage) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<FrequencySet> partition_frequencies(const std::vector<StageConfig>& configs,
                                                Period period, std::uint64_t seed) {
  std::vector<FrequencySet> sets;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const StageConfig& cfg = configs[i];
    std::vector<IntFrequency> pool = enumerate_band(cfg.band1, cfg.band2);
    if (i > 0) {
      const StageConfig& prev = configs[i - 1];
      if (cfg.band1 <= prev.band1 || cfg.band2 <= prev.band2) {
        throw ConfigError("stage " + std::to_string(i) + ": bands must strictly increase");
      }
      // Bands are nested, so removing the previous band removes all lower ones.
      std::erase_if(pool, [&](const IntFrequency& k) {
        return k.k1 <= prev.band1 && std::abs(k.k2) <= prev.band2;
      });
    }
    if (cfg.freq_count > pool.size()) {
      throw ConfigError("stage " + std::to_string(i) + ": requested " +
                        std::to_string(cfg.freq_count) + " frequencies but band (" +
                        std::to_string(cfg.band1) + "," + std::to_string(cfg.band2) +
                        ") leaves " + std::to_string(pool.size()) + " after earlier stages");
    }
    sets.emplace_back(select_lowest_norm(std::move(pool), cfg.freq_count, stage_seed(seed, i)),
                      period);
  }
  return sets;
}

MrNet init_mrnet(const std::vector<StageConfig>& configs, Period period, std::size_t channels,
                 std::uint64_t seed) {
  auto sets = partition_frequencies(configs, period, seed);
  MrNet net;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    net.stages.push_back(init_with_frequencies(std::move(sets[i]), configs[i].hidden_widths,
                                               channels, stage_seed(seed, i)));
  }
  return net;
}

std::vector<diff::Tensor> stage_outputs(const MrNet& net, const diff::Tensor& coords,
                                        std::size_t count) {
  std::vector<diff::Tensor> out;
  for (std::size_t i = 0; i < std::min(count, net.size()); ++i) {
    out.push_back(forward(net.stages[i], coords));
  }
  return out;
}

diff::Tensor mrnet_eval(const MrNet& net, const diff::Tensor& coords, double t) {
  if (net.stages.empty()) throw ConfigError("multiresolution network has no stages");
  const auto weights = blend_weights(t, net.size());
  diff::Tensor sum({coords.rows(), net.channels()}, 0.0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const diff::Tensor g = forward(net.stages[i], coords);
    if (weights[i] == 1.0) {
      kernels::accumulate(sum.data(), g.data());
    } else {
      kernels::accumulate_scaled(sum.data(), g.data(), weights[i]);
    }
  }
  return sum;
}

}  // namespace pinr
