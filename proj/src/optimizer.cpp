#include "diffged/optimizer.hpp"

#include <cmath>

namespace diffged {

OptimizerState OptimizerState::for_config(const DenoiserConfig& config, const AdamOptions& options) {
  return {DenoiserParams<double>::zeros(config), DenoiserParams<double>::zeros(config), 0, options};
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first_moment,
                 std::span<double> second_moment, std::int64_t step, const AdamOptions& options,
                 double learning_rate, double weight_decay) {
  if (grads.size() != params.size() || first_moment.size() != params.size() ||
      second_moment.size() != params.size()) {
    throw ValidationError("adam_update: array sizes differ");
  }
  if (step < 1) throw ValidationError("adam_update: step must be at least 1");
  const double correction1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
  const double decay = 1.0 - learning_rate * weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    first_moment[i] = options.beta1 * first_moment[i] + (1.0 - options.beta1) * g;
    second_moment[i] = options.beta2 * second_moment[i] + (1.0 - options.beta2) * g * g;
    const double m_hat = first_moment[i] / correction1;
    const double v_hat = second_moment[i] / correction2;
    params[i] = params[i] * decay - learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

void optimizer_step(DenoiserParams<double>& params, const DenoiserParams<double>& grads, OptimizerState& state,
                    double learning_rate, double weight_decay) {
  auto p = params.blocks();
  auto g = const_cast<DenoiserParams<double>&>(grads).blocks();
  auto m = state.first_moment.blocks();
  auto v = state.second_moment.blocks();
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw ValidationError("optimizer_step: parameter layouts differ");
  }
  ++state.step;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto n = static_cast<std::size_t>(p[i].size());
    if (static_cast<std::size_t>(g[i].size()) != n || static_cast<std::size_t>(m[i].size()) != n ||
        static_cast<std::size_t>(v[i].size()) != n) {
      throw ValidationError("optimizer_step: block " + p[i].name + " differs in size");
    }
    adam_update({p[i].data, n}, {g[i].data, n}, {m[i].data, n}, {v[i].data, n}, state.step, state.options,
                learning_rate, weight_decay);
  }
}

}  // namespace diffged
