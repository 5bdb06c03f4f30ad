#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pinr/tape.hpp"
#include "pinr/tensor.hpp"

namespace pinr::diff {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step_count = 0;
  std::map<ParamId, Tensor> first_moment;
  std::map<ParamId, Tensor> second_moment;

  explicit AdamState(AdamConfig cfg = {});
};

struct ParamSlot {
  ParamId id;
  Tensor* tensor;
};
using ParameterList = std::vector<ParamSlot>;

// One bias-corrected Adam update. Parameters missing from `grads` are left
// untouched; a gradient without a matching parameter is a contract error.
void adam_step(const ParameterList& params, const GradientMap& grads, AdamState& state);

}  // namespace pinr::diff
