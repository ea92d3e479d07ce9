#include "diffged/extraction.hpp"

#include <cmath>
#include <limits>

#include "diffged/error.hpp"
#include "diffged/parallel.hpp"

namespace diffged {

std::string to_string(ExtractionMethod method) {
  return method == ExtractionMethod::greedy ? "greedy" : "hungarian";
}

ExtractionMethod parse_extraction_method(const std::string& name) {
  if (name == "greedy") return ExtractionMethod::greedy;
  if (name == "hungarian") return ExtractionMethod::hungarian;
  throw ValidationError("unknown extraction method '" + name + "' (expected greedy or hungarian)");
}

namespace {

template <typename Scalar>
void check_shape(const MatchingMatrix<Scalar>& m) {
  if (m.rows() > m.cols()) {
    throw ValidationError("extraction needs rows <= cols, got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

}  // namespace

template <typename Scalar>
NodeMapping greedy_extract(const MatchingMatrix<Scalar>& m) {
  check_shape(m);
  const Eigen::Index n = m.rows();
  const Eigen::Index cols = m.cols();
  // Removed rows and columns act as entries below every probability.
  std::vector<char> row_done(static_cast<std::size_t>(n), 0);
  std::vector<char> col_done(static_cast<std::size_t>(cols), 0);
  NodeMapping f(static_cast<std::size_t>(n), -1);
  for (Eigen::Index round = 0; round < n; ++round) {
    Eigen::Index best_r = -1;
    Eigen::Index best_c = -1;
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index r = 0; r < n; ++r) {
      if (row_done[static_cast<std::size_t>(r)]) continue;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (col_done[static_cast<std::size_t>(c)]) continue;
        if (best_r < 0 || m(r, c) > best) {
          best = m(r, c);
          best_r = r;
          best_c = c;
        }
      }
    }
    row_done[static_cast<std::size_t>(best_r)] = 1;
    col_done[static_cast<std::size_t>(best_c)] = 1;
    f[static_cast<std::size_t>(best_r)] = static_cast<int>(best_c);
  }
  return f;
}

template <typename Scalar>
NodeMapping hungarian_extract(const MatchingMatrix<Scalar>& m) {
  check_shape(m);
  const int n = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(static_cast<double>(m.data()[i]))) throw ValidationError("hungarian_extract: non-finite entry");
  }
  // Minimize -m; rows and columns are 1-based, index 0 is the virtual root.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<double> v(static_cast<std::size_t>(cols + 1), 0.0);
  std::vector<int> match_col(static_cast<std::size_t>(cols + 1), 0);
  std::vector<int> way(static_cast<std::size_t>(cols + 1), 0);
  std::vector<double> min_v(static_cast<std::size_t>(cols + 1));
  std::vector<char> used(static_cast<std::size_t>(cols + 1));
  for (int i = 1; i <= n; ++i) {
    match_col[0] = i;
    int j0 = 0;
    std::fill(min_v.begin(), min_v.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match_col[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = -static_cast<double>(m(i0 - 1, j - 1)) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < min_v[static_cast<std::size_t>(j)]) {
          min_v[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (min_v[static_cast<std::size_t>(j)] < delta) {
          delta = min_v[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match_col[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_v[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match_col[static_cast<std::size_t>(j0)] = match_col[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  NodeMapping f(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= cols; ++j) {
    const int i = match_col[static_cast<std::size_t>(j)];
    if (i > 0) f[static_cast<std::size_t>(i - 1)] = j - 1;
  }
  return f;
}

template <typename Scalar>
NodeMapping extract(const MatchingMatrix<Scalar>& m, ExtractionMethod method) {
  return method == ExtractionMethod::greedy ? greedy_extract(m) : hungarian_extract(m);
}

template <typename Scalar>
std::vector<NodeMapping> parallel_extract(const std::vector<MatchingMatrix<Scalar>>& matrices,
                                          ExtractionMethod method, std::size_t workers) {
  std::vector<NodeMapping> out(matrices.size());
  parallel_for(
      matrices.size(), [&](std::size_t i) { out[i] = extract(matrices[i], method); },
      workers == 0 ? default_workers() : workers);
  return out;
}

template <typename Scalar>
double mapping_weight(const MatchingMatrix<Scalar>& m, const NodeMapping& f) {
  double total = 0.0;
  for (std::size_t v = 0; v < f.size(); ++v) total += static_cast<double>(m(static_cast<Eigen::Index>(v), f[v]));
  return total;
}

#define DIFFGED_INSTANTIATE(S)                                                                                \
  template NodeMapping greedy_extract<S>(const MatchingMatrix<S>&);                                          \
  template NodeMapping hungarian_extract<S>(const MatchingMatrix<S>&);                                       \
  template NodeMapping extract<S>(const MatchingMatrix<S>&, ExtractionMethod);                               \
  template std::vector<NodeMapping> parallel_extract<S>(const std::vector<MatchingMatrix<S>>&, ExtractionMethod, \
                                                        std::size_t);                                         \
  template double mapping_weight<S>(const MatchingMatrix<S>&, const NodeMapping&);

DIFFGED_INSTANTIATE(float)
DIFFGED_INSTANTIATE(double)

#undef DIFFGED_INSTANTIATE

}  // namespace diffged
