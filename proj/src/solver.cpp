#include "diffged/solver.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "diffged/parallel.hpp"

namespace diffged {

void SolveConfig::validate(int T) const {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (steps < 1 || steps > T) {
    throw ValidationError("steps must lie in [1, " + std::to_string(T) + "], got " + std::to_string(steps));
  }
}

std::uint64_t chain_seed(std::uint64_t root, int index) {
  return derive_seed(root, static_cast<std::uint64_t>(index));
}

std::vector<int> solve_time_points(const SolveConfig& config, int T) {
  return config.one_shot ? std::vector<int>{T} : ddim_subsequence(T, config.steps);
}

MatchingMatrix<double> sample_matching(const GraphPair& pair, const DenoiserParams<double>& params,
                                       const NoiseSchedule& schedule, const std::vector<int>& time_points,
                                       std::uint64_t seed) {
  if (time_points.empty()) throw ValidationError("sample_matching: no time points");
  Rng rng(seed);
  BinaryMatrix state = sample_initial(pair.g.node_count(), pair.g_prime.node_count(), rng);
  for (std::size_t i = 0;; ++i) {
    MatchingMatrix<double> probs = denoise_forward(pair, state, time_points[i], params);
    if (i + 1 == time_points.size()) return probs;
    state = reverse_step(state, probs, time_points[i], time_points[i + 1], schedule, rng);
  }
}

SolveResult diffged_solve(const GraphPair& pair, const DenoiserParams<double>& params, const NoiseSchedule& schedule,
                          const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate(schedule.steps());
  if (pair.g.node_count() > pair.g_prime.node_count()) {
    throw ValidationError("diffged_solve expects a pair oriented with g no larger than g_prime");
  }
  const auto time_points = solve_time_points(config, schedule.steps());
  const auto k = static_cast<std::size_t>(config.k);

  SolveResult result;
  result.chain_mappings.resize(k);
  result.chain_costs.resize(k);
  parallel_for(
      k,
      [&](std::size_t i) {
        NodeMapping f;
        if (pair.g.node_count() > 0) {
          const auto probs = sample_matching(pair, params, schedule, time_points, chain_seed(config.seed, static_cast<int>(i)));
          f = extract(probs, config.method);
        }
        result.chain_costs[i] = edit_cost(pair, f);
        result.chain_mappings[i] = std::move(f);
      },
      config.workers == 0 ? default_workers() : config.workers);

  const auto best = std::min_element(result.chain_costs.begin(), result.chain_costs.end());
  const auto best_index = static_cast<std::size_t>(best - result.chain_costs.begin());
  result.predicted_ged = *best;
  result.best_mapping = result.chain_mappings[best_index];
  result.best_script = derive_edit_path(pair, result.best_mapping);

  std::set<std::vector<EditOp>> distinct;
  for (std::size_t i = 0; i < k; ++i) {
    if (result.chain_costs[i] != result.predicted_ged) continue;
    distinct.insert(canonicalize(derive_edit_path(pair, result.chain_mappings[i])).operations);
  }
  result.distinct_optimal_paths = static_cast<int>(distinct.size());
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace diffged
