#include "pinr/adam.hpp"

#include <cmath>

#include "pinr/errors.hpp"

namespace pinr::diff {

AdamState::AdamState(AdamConfig cfg) : config(cfg) {
  if (!(cfg.beta1 > 0.0 && cfg.beta1 < 1.0 && cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
}

void adam_step(const ParameterList& params, const GradientMap& grads, AdamState& state) {
  for (const auto& [id, grad] : grads) {
    bool found = false;
    for (const ParamSlot& slot : params) found = found || slot.id == id;
    if (!found) {
      throw ContractError("gradient for unknown parameter " + std::to_string(id.value));
    }
  }

  state.step_count += 1;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);

  for (const ParamSlot& slot : params) {
    auto it = grads.find(slot.id);
    if (it == grads.end()) continue;
    const Tensor& g = it->second;
    Tensor& p = *slot.tensor;
    if (!g.same_shape(p)) {
      throw ShapeError("gradient shape " + shape_string(g.shape()) + " does not match parameter " +
                       shape_string(p.shape()));
    }
    auto [m_it, m_new] = state.first_moment.try_emplace(slot.id, p.shape(), 0.0);
    auto [v_it, v_new] = state.second_moment.try_emplace(slot.id, p.shape(), 0.0);
    auto m = m_it->second.data();
    auto v = v_it->second.data();
    auto pd = p.data();
    const auto gd = g.data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gd[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gd[i] * gd[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      pd[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace pinr::diff
