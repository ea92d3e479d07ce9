#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diffged/solver.hpp"
#include "json.hpp"

namespace diffged {

/// Averages over test pairs (MAE, accuracy) and over query groups (rank
/// statistics). Rank statistics are empty when no group qualifies.
struct MetricsReport {
  double mae = 0.0;
  double accuracy = 0.0;
  std::optional<double> spearman_rho;
  std::optional<double> kendall_tau;
  std::optional<double> p_at_10;
  std::optional<double> p_at_20;
  double mean_solve_seconds = 0.0;
  std::size_t pair_count = 0;
  /// Groups that entered the correlation averages.
  std::size_t ranked_groups = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. Empty if either input is constant
/// or has fewer than two entries.
std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b, O(n log n). Empty if either input is constant or has fewer
/// than two entries.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// |top_k(truth) ∩ top_k(predicted)| / min(k, n), where top_k takes the k
/// smallest scores and breaks ties by index.
double precision_at_k(std::span<const double> truth, std::span<const double> predicted, int k);

/// Metrics of `predicted` against the pairs' ground-truth GEDs. Pairs are
/// grouped by their query graph (the first graph as given, before
/// orientation); ρ and τ average over groups where both rankings vary, p@k
/// over all groups with at least two members.
MetricsReport compute_metrics(const std::vector<GraphPair>& pairs, const std::vector<int>& predicted,
                              double mean_solve_seconds = 0.0);

struct Evaluation {
  MetricsReport report;
  std::vector<int> predictions;
  std::vector<int> distinct_optimal_paths;
};

/// Solves every pair and scores the predictions. Pairs without a
/// ground-truth GED are rejected.
Evaluation evaluate(const std::vector<GraphPair>& pairs, const DenoiserParams<double>& params,
                    const NoiseSchedule& schedule, const SolveConfig& config);

/// {"mae", "accuracy", "rho", "tau", "p10", "p20", "time_s"}; absent
/// statistics are null.
nlohmann::json report_to_json(const MetricsReport& report);

}  // namespace diffged
