#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace diffged {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// |V| x |V'| node-correspondence probabilities.
template <typename Scalar>
using MatchingMatrix = Matrix<Scalar>;

/// |V| x |V'| node-correspondence states in {0, 1}.
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace diffged
