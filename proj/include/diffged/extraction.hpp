#pragma once

#include <string>
#include <vector>

#include "diffged/graph.hpp"
#include "diffged/types.hpp"

namespace diffged {

enum class ExtractionMethod { greedy, hungarian };

std::string to_string(ExtractionMethod method);
/// Accepts "greedy" and "hungarian"; throws ValidationError otherwise.
ExtractionMethod parse_extraction_method(const std::string& name);

/// Repeatedly takes the largest remaining entry and removes its row and
/// column. Ties go to the smallest row, then the smallest column.
/// O(|V|^2 |V'|). Requires rows <= cols.
template <typename Scalar>
NodeMapping greedy_extract(const MatchingMatrix<Scalar>& m);

/// Injective mapping maximizing the summed entries (shortest augmenting
/// paths with potentials). Requires rows <= cols and finite entries.
template <typename Scalar>
NodeMapping hungarian_extract(const MatchingMatrix<Scalar>& m);

template <typename Scalar>
NodeMapping extract(const MatchingMatrix<Scalar>& m, ExtractionMethod method);

/// Extracts every matrix independently; output i belongs to input i.
template <typename Scalar>
std::vector<NodeMapping> parallel_extract(const std::vector<MatchingMatrix<Scalar>>& matrices,
                                          ExtractionMethod method, std::size_t workers = 0);

/// Sum of m(v, f(v)).
template <typename Scalar>
double mapping_weight(const MatchingMatrix<Scalar>& m, const NodeMapping& f);

}  // namespace diffged
