#include "diffged/diffusion.hpp"

#include <string>

namespace diffged {

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw ValidationError("noise schedule needs at least one step");
  NoiseSchedule s;
  s.contraction_.reserve(betas.size() + 1);
  s.contraction_.push_back(1.0);
  for (double b : betas) {
    if (!(b >= 0.0 && b < 0.5)) throw ValidationError("beta " + std::to_string(b) + " outside [0, 0.5)");
    s.contraction_.push_back(s.contraction_.back() * (1.0 - 2.0 * b));
  }
  s.betas_ = std::move(betas);
  return s;
}

double NoiseSchedule::bridge_flip_prob(int from_t, int to_t) const {
  if (from_t < 0 || to_t > steps() || from_t > to_t) throw ValidationError("invalid bridge range");
  double product = 1.0;
  for (int s = from_t + 1; s <= to_t; ++s) product *= 1.0 - 2.0 * beta(s);
  return 0.5 * (1.0 - product);
}

NoiseSchedule build_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw ValidationError("schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 0.5)) {
    throw ValidationError("schedule requires 0 < beta_start <= beta_end < 0.5");
  }
  std::vector<double> betas(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
    betas[static_cast<std::size_t>(t - 1)] = beta_start + frac * (beta_end - beta_start);
  }
  return NoiseSchedule::from_betas(std::move(betas));
}

std::vector<int> ddim_subsequence(int T, int S) {
  if (S < 1 || S > T) throw ValidationError("sub-sequence length must satisfy 1 <= S <= T");
  std::vector<int> taus;
  taus.reserve(static_cast<std::size_t>(S));
  if (S == 1) return {T};
  for (int i = 0; i < S; ++i) {
    const double x = static_cast<double>(T) - static_cast<double>(i) * static_cast<double>(T - 1) / (S - 1);
    const int tau = static_cast<int>(std::lround(x));
    if (taus.empty() || tau < taus.back()) taus.push_back(tau);
  }
  taus.back() = 1;
  return taus;
}

BinaryMatrix sample_initial(int rows, int cols, Rng& rng) {
  BinaryMatrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = bernoulli(rng, 0.5);
  }
  return out;
}

BinaryMatrix forward_sample(const BinaryMatrix& m0, int t, const NoiseSchedule& schedule, Rng& rng) {
  if (t < 1 || t > schedule.steps()) throw ValidationError("forward_sample: t out of range");
  const double flip = schedule.flip_prob(t);
  BinaryMatrix out(m0.rows(), m0.cols());
  for (Eigen::Index i = 0; i < m0.rows(); ++i) {
    for (Eigen::Index j = 0; j < m0.cols(); ++j) {
      const bool state = m0(i, j) != 0;
      out(i, j) = bernoulli(rng, flip) ? !state : state;
    }
  }
  return out;
}

namespace detail {

PosteriorTable posterior_table(int from_t, int to_t, const NoiseSchedule& schedule) {
  if (!(0 <= to_t && to_t < from_t && from_t <= schedule.steps())) {
    throw ValidationError("posterior requires 0 <= to_t < from_t <= T");
  }
  const double bridge = schedule.bridge_flip_prob(to_t, from_t);
  const double flip_to = schedule.flip_prob(to_t);
  const double flip_from = schedule.flip_prob(from_t);
  PosteriorTable table{};
  for (int x = 0; x < 2; ++x) {
    // q(x at from_t | state 1 at to_t)
    const double reach = x == 1 ? 1.0 - bridge : bridge;
    for (int b = 0; b < 2; ++b) {
      const double prior_one = b == 1 ? 1.0 - flip_to : flip_to;
      const double evidence = x == b ? 1.0 - flip_from : flip_from;
      if (evidence < std::numeric_limits<double>::min()) {
        throw Error("posterior: vanishing evidence q(M^t | M^0); schedule has zero betas");
      }
      table.given[x][b] = reach * prior_one / evidence;
    }
  }
  return table;
}

}  // namespace detail

}  // namespace diffged
