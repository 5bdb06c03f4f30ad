#pragma once

#include <cstdint>
#include <vector>

#include "pinr/frequency.hpp"
#include "pinr/periodic_inr.hpp"
#include "pinr/tensor.hpp"

namespace pinr {

struct StageConfig {
  int band1 = 3;
  int band2 = 3;
  std::size_t freq_count = 24;
  std::vector<std::size_t> hidden_widths{32};
};

// Stage layout of the six-stage texture network (band limit, first-layer
// width, hidden width per stage).
std::vector<StageConfig> table1_stages();

// Multiresolution network f(x, t) = sum_i c_i(t) g_i(x). All stages share one
// period and channel count.
struct MrNet {
  std::vector<PeriodicInr> stages;

  std::size_t size() const { return stages.size(); }
  std::size_t channels() const;
  Period period() const;
  bool periodic() const;
  void validate() const;
};

// c_i(t) = clamp01(t - i + 1); t = k + d yields g_0 + ... + g_k + d g_{k+1}.
// t is clamped to [0, n].
std::vector<double> blend_weights(double t, std::size_t n);

// Stage i takes freq_count_i lowest-norm multipliers from its band minus every
// earlier band. Throws ConfigError naming the stage on a shortfall or when
// bands do not strictly increase.
std::vector<FrequencySet> partition_frequencies(const std::vector<StageConfig>& configs,
                                                Period period, std::uint64_t seed);

MrNet init_mrnet(const std::vector<StageConfig>& configs, Period period, std::size_t channels,
                 std::uint64_t seed);

// Per-stage seed derived from the run seed.
std::uint64_t stage_seed(std::uint64_t seed, std::size_t stage);

// B x 2 -> B x channels.
diff::Tensor mrnet_eval(const MrNet& net, const diff::Tensor& coords, double t);

// Outputs of stages [0, count) at the given coordinates, unweighted.
std::vector<diff::Tensor> stage_outputs(const MrNet& net, const diff::Tensor& coords,
                                        std::size_t count);

}  // namespace pinr
