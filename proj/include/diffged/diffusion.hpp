#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "diffged/error.hpp"
#include "diffged/rng.hpp"
#include "diffged/types.hpp"

namespace diffged {

/// Symmetric bit-flip noise schedule. Step t (1-based) flips a matching
/// state with probability beta_t; the t-step marginal flips with
/// probability (1 - prod_{s<=t}(1 - 2 beta_s)) / 2.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;

  /// Arbitrary betas in [0, 0.5); zero entries are intended for tests.
  static NoiseSchedule from_betas(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  /// beta_t for 1 <= t <= T.
  double beta(int t) const { return betas_.at(static_cast<std::size_t>(t - 1)); }
  const std::vector<double>& betas() const { return betas_; }

  /// prod_{s<=t} (1 - 2 beta_s); 1 at t = 0.
  double contraction(int t) const { return contraction_.at(static_cast<std::size_t>(t)); }
  /// Flip probability of the cumulative kernel Qbar_t; 0 at t = 0.
  double flip_prob(int t) const { return 0.5 * (1.0 - contraction(t)); }
  double stay_prob(int t) const { return 0.5 * (1.0 + contraction(t)); }

  /// Flip probability of Q_{from_t+1} ... Q_{to_t}, from a direct product.
  double bridge_flip_prob(int from_t, int to_t) const;

  bool operator==(const NoiseSchedule& other) const { return betas_ == other.betas_; }

 private:
  std::vector<double> betas_;
  std::vector<double> contraction_;
};

/// Linear schedule beta_1 = beta_start ... beta_T = beta_end.
/// Requires 0 < beta_start <= beta_end < 0.5 and T >= 1.
NoiseSchedule build_schedule(int T, double beta_start = 1e-4, double beta_end = 0.02);

/// Descending [tau_S, ..., tau_1]: round(linspace(T, 1, S)), so tau_S = T and
/// tau_1 = 1. Requires 1 <= S <= T.
std::vector<int> ddim_subsequence(int T, int S);

/// Entries i.i.d. Bernoulli(0.5), filled row by row.
BinaryMatrix sample_initial(int rows, int cols, Rng& rng);

/// Flips every entry of m0 independently with probability flip_prob(t).
BinaryMatrix forward_sample(const BinaryMatrix& m0, int t, const NoiseSchedule& schedule, Rng& rng);

namespace detail {

/// P(state = 1 at to_t | state x at from_t, clean state b), for x, b in {0,1}.
struct PosteriorTable {
  double given[2][2];  // [x][b]
};

PosteriorTable posterior_table(int from_t, int to_t, const NoiseSchedule& schedule);

}  // namespace detail

/// Per-entry P(M^{to_t} = 1 | M^{from_t}, clean-state probabilities), mixing
/// the two clean-state posteriors with weights m0_probs and 1 - m0_probs.
/// The step from from_t to to_t bridges through Q_{to_t+1} ... Q_{from_t}.
template <typename Scalar>
MatchingMatrix<Scalar> posterior(const BinaryMatrix& mt, const MatchingMatrix<Scalar>& m0_probs, int from_t,
                                 int to_t, const NoiseSchedule& schedule) {
  if (mt.rows() != m0_probs.rows() || mt.cols() != m0_probs.cols()) {
    throw ValidationError("posterior: state and probability matrices differ in shape");
  }
  const detail::PosteriorTable table = detail::posterior_table(from_t, to_t, schedule);
  MatchingMatrix<Scalar> out(mt.rows(), mt.cols());
  for (Eigen::Index j = 0; j < mt.cols(); ++j) {
    for (Eigen::Index i = 0; i < mt.rows(); ++i) {
      const int x = mt(i, j) != 0;
      const double p1 = static_cast<double>(m0_probs(i, j));
      out(i, j) = static_cast<Scalar>(table.given[x][1] * p1 + table.given[x][0] * (1.0 - p1));
    }
  }
  return out;
}

/// Samples M^{to_t} entry-wise from posterior(), row by row.
template <typename Scalar>
BinaryMatrix reverse_step(const BinaryMatrix& mt, const MatchingMatrix<Scalar>& m0_probs, int from_t, int to_t,
                          const NoiseSchedule& schedule, Rng& rng) {
  const MatchingMatrix<Scalar> probs = posterior(mt, m0_probs, from_t, to_t, schedule);
  BinaryMatrix out(mt.rows(), mt.cols());
  for (Eigen::Index i = 0; i < mt.rows(); ++i) {
    for (Eigen::Index j = 0; j < mt.cols(); ++j) out(i, j) = bernoulli(rng, static_cast<double>(probs(i, j)));
  }
  return out;
}

}  // namespace diffged
