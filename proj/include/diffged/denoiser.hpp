#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffged/graph.hpp"
#include "diffged/types.hpp"

namespace diffged {

/// Shape of the denoising network.
struct DenoiserConfig {
  /// Output width of each layer; one GIN + AGNN block per entry.
  std::vector<int> layer_dims{128, 64, 32, 32, 32, 32};
  /// Width of the one-hot node label input.
  int vocab_size = 1;
  /// Width of the sinusoidal encoding of matching states; 0 selects
  /// layer_dims.front().
  int pair_embedding_dim = 0;
  double frequency_base = 10000.0;
  /// Graph normalization switch; disabling it turns both norms into the
  /// identity (used by hand-computed fixtures).
  bool use_graph_norm = true;

  int pair_input_dim() const { return pair_embedding_dim > 0 ? pair_embedding_dim : layer_dims.front(); }
  /// Throws ValidationError on an empty or non-positive layer list.
  void validate() const;
  bool operator==(const DenoiserConfig&) const = default;
};

/// Per-channel graph normalization: y = gamma * (x - alpha * mean) / std + beta.
template <typename Scalar>
struct GraphNormParams {
  Vector<Scalar> gamma;
  Vector<Scalar> alpha;
  Vector<Scalar> beta;
};

template <typename Scalar>
struct LayerParams {
  // GIN update MLP (shared by both graphs): w2 * relu(w1 * x + b1) + b2.
  Matrix<Scalar> gin_w1;
  Vector<Scalar> gin_b1;
  Matrix<Scalar> gin_w2;
  Vector<Scalar> gin_b2;
  // Anisotropic cross-graph weights W1 ... W7.
  Matrix<Scalar> w1, w2, w3, w4, w5, w6, w7;
  // Pair-embedding update MLP.
  Matrix<Scalar> mlp_w1;
  Vector<Scalar> mlp_b1;
  Matrix<Scalar> mlp_w2;
  Vector<Scalar> mlp_b2;
  GraphNormParams<Scalar> pair_norm;
  GraphNormParams<Scalar> node_norm;
};

/// Scalar matching score per pair embedding: w2 * relu(w1 * h + b1) + b2.
template <typename Scalar>
struct HeadParams {
  Matrix<Scalar> w1;
  Vector<Scalar> b1;
  Matrix<Scalar> w2;
  Vector<Scalar> b2;
};

/// Mutable view of one named parameter array.
template <typename Scalar>
struct ParamBlock {
  std::string name;
  /// Coarser grouping used by gradient checks, e.g. "layers.0.pair_norm".
  std::string group;
  Scalar* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const { return rows * cols; }
};

/// All learnable weights of the denoising network.
template <typename Scalar>
struct DenoiserParams {
  DenoiserConfig config;
  std::vector<LayerParams<Scalar>> layers;
  HeadParams<Scalar> head;

  /// Correctly shaped, all zero. Graph-norm scales are zero as well.
  static DenoiserParams zeros(const DenoiserConfig& config);
  /// Weights and biases uniform in +-1/sqrt(fan_in); graph norms start at
  /// gamma = 1, alpha = 1, beta = 0.
  static DenoiserParams initialized(const DenoiserConfig& config, std::uint64_t seed);

  /// Every parameter array in a fixed order.
  std::vector<ParamBlock<Scalar>> blocks();
  std::size_t parameter_count() const;

  bool operator==(const DenoiserParams& other) const;
};

/// Node and pair embeddings between layers. Features are stored one column
/// per node or per pair: pair_forward column v * |V'| + v' holds h_{vv'} and
/// pair_backward column v' * |V| + v holds h_{v'v}.
template <typename Scalar>
struct PairEmbeddingState {
  Matrix<Scalar> node_g;
  Matrix<Scalar> node_g_prime;
  Matrix<Scalar> pair_forward;
  Matrix<Scalar> pair_backward;
  Vector<Scalar> time;
};

/// Transformer-style encoding: entry 2i = sin(x / base^(2i/dim)), entry
/// 2i+1 = cos of the same argument. Throws ValidationError for odd dim.
template <typename Scalar>
Vector<Scalar> sinusoidal_embedding(double x, int dim, double base = 10000.0);

/// GIN update with epsilon = 0: column v becomes MLP(h_v + sum of neighbour
/// columns). Input is feature_dim x node_count.
template <typename Scalar>
Matrix<Scalar> gin_encode(const LabeledGraph& g, const Matrix<Scalar>& node_features, const LayerParams<Scalar>& layer);

/// Joint normalization of two feature blocks (columns are group members),
/// statistics pooled over both. Returns the two normalized blocks.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> graph_norm(const Matrix<Scalar>& first, const Matrix<Scalar>& second,
                                                     const GraphNormParams<Scalar>& params);

/// One anisotropic cross-graph layer. `state.node_*` must already hold the
/// GIN outputs of this layer and `state.pair_*` the previous layer's pair
/// embeddings; `state.time` is the time encoding of this layer's width.
template <typename Scalar>
PairEmbeddingState<Scalar> agnn_layer(const PairEmbeddingState<Scalar>& state, const LayerParams<Scalar>& layer,
                                      bool use_graph_norm = true);

/// Matching probabilities p(M0 = 1 | M^t, G, G'), shape |V| x |V'|, entries
/// in (0, 1). Deterministic; running (G', G, M^T) yields the transpose
/// exactly.
template <typename Scalar>
MatchingMatrix<Scalar> denoise_forward(const GraphPair& pair, const BinaryMatrix& mt, int t,
                                       const DenoiserParams<Scalar>& params);

/// Same as denoise_forward but on explicit graphs (any orientation).
template <typename Scalar>
MatchingMatrix<Scalar> denoise_forward(const LabeledGraph& g, const LabeledGraph& g_prime, const BinaryMatrix& mt,
                                       int t, const DenoiserParams<Scalar>& params);

template <typename Scalar>
struct LossAndGradient {
  Scalar loss;
  DenoiserParams<Scalar> gradients;
};

/// Mean binary cross-entropy against a binary target, with probabilities
/// clamped to [1e-7, 1 - 1e-7], and its gradient with respect to every
/// parameter.
template <typename Scalar>
LossAndGradient<Scalar> denoise_backward(const GraphPair& pair, const BinaryMatrix& mt, int t,
                                         const DenoiserParams<Scalar>& params, const BinaryMatrix& target);

/// Adds the gradient of the loss into `gradients` (same shapes as params)
/// and returns the loss.
template <typename Scalar>
Scalar accumulate_gradient(const GraphPair& pair, const BinaryMatrix& mt, int t, const DenoiserParams<Scalar>& params,
                           const BinaryMatrix& target, DenoiserParams<Scalar>& gradients);

/// Sign of every ReLU input in the forward pass, in a fixed order. A change
/// between two nearby parameter settings means a kink lies between them.
template <typename Scalar>
std::vector<bool> relu_activation_pattern(const GraphPair& pair, const BinaryMatrix& mt, int t,
                                          const DenoiserParams<Scalar>& params);

/// Clamped mean binary cross-entropy of probabilities against a target.
template <typename Scalar>
Scalar bce_loss(const MatchingMatrix<Scalar>& probs, const BinaryMatrix& target);

}  // namespace diffged
