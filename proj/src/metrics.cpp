#include "diffged/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace diffged {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("rank statistics need equal-length inputs");
}

/// Merge sort of `v` counting the inversions it removes.
std::uint64_t sort_counting_swaps(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                                  std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = sort_counting_swaps(v, scratch, lo, mid) + sort_counting_swaps(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t out = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      scratch[out++] = v[j++];
    } else {
      scratch[out++] = v[i++];
    }
  }
  while (i < mid) scratch[out++] = v[i++];
  while (j < hi) scratch[out++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

/// Number of pairs tied within runs of equal values in a sorted sequence.
template <typename Equal>
std::uint64_t tied_pairs(std::size_t n, Equal&& equal) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string graph_key(const LabeledGraph& g) {
  std::string key = std::to_string(g.node_count()) + "|";
  for (int l : g.labels()) key += std::to_string(l) + ",";
  key += "|";
  for (const auto& e : g.edges()) key += std::to_string(e.u) + "-" + std::to_string(e.v) + ",";
  return key;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i + 1;
    while (j < idx.size() && values[idx[j]] == values[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t t = i; t < j; ++t) ranks[idx[t]] = rank;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  // Both rank vectors have mean (n + 1) / 2.
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const std::uint64_t ties_x = tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[idx[a]] == x[idx[b]]; });
  const std::uint64_t ties_xy = tied_pairs(
      n, [&](std::size_t a, std::size_t b) { return x[idx[a]] == x[idx[b]] && y[idx[a]] == y[idx[b]]; });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  std::vector<double> scratch(n);
  const std::uint64_t swaps = sort_counting_swaps(ys, scratch, 0, n);
  const std::uint64_t ties_y = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });
  const auto total = static_cast<double>(n * (n - 1) / 2);
  const double denom_x = total - static_cast<double>(ties_x);
  const double denom_y = total - static_cast<double>(ties_y);
  if (denom_x == 0.0 || denom_y == 0.0) return std::nullopt;
  const double numerator = total - static_cast<double>(ties_x) - static_cast<double>(ties_y) +
                           static_cast<double>(ties_xy) - 2.0 * static_cast<double>(swaps);
  return numerator / std::sqrt(denom_x * denom_y);
}

double precision_at_k(std::span<const double> truth, std::span<const double> predicted, int k) {
  check_lengths(truth, predicted);
  if (k < 1) throw ValidationError("precision_at_k needs k >= 1");
  const std::size_t kk = std::min(static_cast<std::size_t>(k), truth.size());
  if (kk == 0) throw ValidationError("precision_at_k needs at least one score");
  const auto a = top_k(truth, kk);
  const auto b = top_k(predicted, kk);
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(kk);
}

MetricsReport compute_metrics(const std::vector<GraphPair>& pairs, const std::vector<int>& predicted,
                              double mean_solve_seconds) {
  if (pairs.size() != predicted.size()) throw ValidationError("one prediction per pair is required");
  if (pairs.empty()) throw ValidationError("cannot score an empty test set");
  MetricsReport report;
  report.pair_count = pairs.size();
  report.mean_solve_seconds = mean_solve_seconds;
  std::map<std::string, std::vector<std::size_t>> groups;
  double abs_error = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].ground_truth_ged) throw ValidationError("pair " + std::to_string(i) + " has no ground-truth GED");
    const int gt = *pairs[i].ground_truth_ged;
    abs_error += std::abs(predicted[i] - gt);
    hits += predicted[i] == gt;
    groups[graph_key(pairs[i].swapped ? pairs[i].g_prime : pairs[i].g)].push_back(i);
  }
  report.mae = abs_error / static_cast<double>(pairs.size());
  report.accuracy = static_cast<double>(hits) / static_cast<double>(pairs.size());

  double rho_sum = 0.0;
  double tau_sum = 0.0;
  double p10_sum = 0.0;
  double p20_sum = 0.0;
  std::size_t p_groups = 0;
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    std::vector<double> truth;
    std::vector<double> pred;
    for (std::size_t i : members) {
      truth.push_back(*pairs[i].ground_truth_ged);
      pred.push_back(predicted[i]);
    }
    p10_sum += precision_at_k(truth, pred, 10);
    p20_sum += precision_at_k(truth, pred, 20);
    ++p_groups;
    const auto rho = spearman_rho(truth, pred);
    const auto tau = kendall_tau_b(truth, pred);
    if (rho && tau) {
      rho_sum += *rho;
      tau_sum += *tau;
      ++report.ranked_groups;
    }
  }
  if (report.ranked_groups > 0) {
    report.spearman_rho = rho_sum / static_cast<double>(report.ranked_groups);
    report.kendall_tau = tau_sum / static_cast<double>(report.ranked_groups);
  }
  if (p_groups > 0) {
    report.p_at_10 = p10_sum / static_cast<double>(p_groups);
    report.p_at_20 = p20_sum / static_cast<double>(p_groups);
  }
  return report;
}

Evaluation evaluate(const std::vector<GraphPair>& pairs, const DenoiserParams<double>& params,
                    const NoiseSchedule& schedule, const SolveConfig& config) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].ground_truth_ged) throw ValidationError("pair " + std::to_string(i) + " has no ground-truth GED");
  }
  Evaluation out;
  double seconds = 0.0;
  for (const auto& pair : pairs) {
    const SolveResult r = diffged_solve(pair, params, schedule, config);
    out.predictions.push_back(r.predicted_ged);
    out.distinct_optimal_paths.push_back(r.distinct_optimal_paths);
    seconds += r.seconds;
  }
  out.report = compute_metrics(pairs, out.predictions, pairs.empty() ? 0.0 : seconds / static_cast<double>(pairs.size()));
  return out;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"mae", report.mae},
          {"accuracy", report.accuracy},
          {"rho", opt(report.spearman_rho)},
          {"tau", opt(report.kendall_tau)},
          {"p10", opt(report.p_at_10)},
          {"p20", opt(report.p_at_20)},
          {"time_s", report.mean_solve_seconds}};
}

}  // namespace diffged
