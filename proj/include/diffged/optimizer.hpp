#pragma once

#include <cstdint>
#include <span>

#include "diffged/denoiser.hpp"

namespace diffged {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AdamOptions&) const = default;
};

/// Adam moments mirroring the parameter layout, plus the step counter.
struct OptimizerState {
  DenoiserParams<double> first_moment;
  DenoiserParams<double> second_moment;
  std::int64_t step = 0;
  AdamOptions options;

  static OptimizerState for_config(const DenoiserConfig& config, const AdamOptions& options = {});
  bool operator==(const OptimizerState&) const = default;
};

/// One Adam update with decoupled weight decay on flat arrays. `step` is the
/// 1-based index of this update (used for bias correction). Parameters are
/// first scaled by (1 - lr * weight_decay), then moved along the bias-corrected
/// moment ratio.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first_moment,
                 std::span<double> second_moment, std::int64_t step, const AdamOptions& options,
                 double learning_rate, double weight_decay);

/// Increments state.step and applies adam_update to every parameter block.
void optimizer_step(DenoiserParams<double>& params, const DenoiserParams<double>& grads, OptimizerState& state,
                    double learning_rate, double weight_decay);

}  // namespace diffged
