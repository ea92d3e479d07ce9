#pragma once

#include <cstdint>
#include <vector>

#include "diffged/denoiser.hpp"
#include "diffged/diffusion.hpp"
#include "diffged/edit_path.hpp"
#include "diffged/extraction.hpp"

namespace diffged {

struct SolveConfig {
  /// Number of sampled matching matrices.
  int k = 100;
  /// Reverse steps of the sub-sampled chain.
  int steps = 10;
  ExtractionMethod method = ExtractionMethod::greedy;
  /// Predict from pure noise in a single pass at t = T, whatever `steps` is.
  bool one_shot = false;
  std::uint64_t seed = 0;
  /// Threads for the chains; 0 picks the hardware concurrency.
  std::size_t workers = 0;

  /// Throws ValidationError unless k >= 1 and 1 <= steps <= T.
  void validate(int T) const;
};

struct SolveResult {
  int predicted_ged = 0;
  NodeMapping best_mapping;
  EditScript best_script;
  /// Edit cost of chain i's mapping.
  std::vector<int> chain_costs;
  std::vector<NodeMapping> chain_mappings;
  /// Distinct canonical scripts among the chains that reach the minimum.
  int distinct_optimal_paths = 0;
  double seconds = 0.0;
};

/// Seed of chain `index`; independent of k so that larger k reuse the
/// chains of smaller k.
std::uint64_t chain_seed(std::uint64_t root, int index);

/// Time points visited by the reverse chain for this configuration.
std::vector<int> solve_time_points(const SolveConfig& config, int T);

/// Runs one reverse chain from Bernoulli(0.5) noise and returns the final
/// clean-state probabilities.
MatchingMatrix<double> sample_matching(const GraphPair& pair, const DenoiserParams<double>& params,
                                       const NoiseSchedule& schedule, const std::vector<int>& time_points,
                                       std::uint64_t seed);

/// Samples k matrices, extracts a mapping from each and returns the cheapest
/// induced edit path. Any parameters, trained or not, give a valid result.
SolveResult diffged_solve(const GraphPair& pair, const DenoiserParams<double>& params, const NoiseSchedule& schedule,
                          const SolveConfig& config);

}  // namespace diffged
