#include "diffged/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "diffged/rng.hpp"

namespace diffged {

void DenoiserConfig::validate() const {
  if (layer_dims.empty()) throw ValidationError("denoiser needs at least one layer");
  for (int d : layer_dims) {
    if (d <= 0) throw ValidationError("layer dimensions must be positive");
  }
  if (vocab_size < 1) throw ValidationError("vocabulary size must be positive");
  if (pair_input_dim() % 2 != 0) throw ValidationError("pair embedding dimension must be even");
  for (int d : layer_dims) {
    if (d % 2 != 0) throw ValidationError("layer dimensions must be even for the time encoding");
  }
}

namespace {

constexpr double kNormEpsilon = 1e-5;
constexpr double kProbClamp = 1e-7;

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived>
auto relu_mask(const Eigen::MatrixBase<Derived>& x) {
  return (x.array() > typename Derived::Scalar(0)).template cast<typename Derived::Scalar>();
}

/// A + I for sum aggregation over closed neighbourhoods.
template <typename Scalar>
Matrix<Scalar> closed_adjacency(const LabeledGraph& g) {
  Matrix<Scalar> a = Matrix<Scalar>::Identity(g.node_count(), g.node_count());
  for (const auto& e : g.edges()) {
    a(e.u, e.v) = Scalar(1);
    a(e.v, e.u) = Scalar(1);
  }
  return a;
}

template <typename Scalar>
struct GinCache {
  Matrix<Scalar> input;
  Matrix<Scalar> aggregated;
  Matrix<Scalar> hidden_pre;
};

template <typename Scalar>
struct NormCache {
  Vector<Scalar> mean;
  Vector<Scalar> inv_std;
  Matrix<Scalar> centered_first;
  Matrix<Scalar> centered_second;
  Scalar count = 0;
};

template <typename Scalar>
struct LayerCache {
  GinCache<Scalar> gin_g, gin_h;
  Matrix<Scalar> hat_g, hat_h;
  Matrix<Scalar> pair_in_a, pair_in_b;
  Matrix<Scalar> pair_hat_a, pair_hat_b;
  Matrix<Scalar> tilde_a, tilde_b;
  NormCache<Scalar> pair_norm;
  Matrix<Scalar> normed_a, normed_b;
  Matrix<Scalar> mlp_in_a, mlp_in_b;
  Matrix<Scalar> mlp_pre_a, mlp_pre_b;
  Matrix<Scalar> gate_g, gate_h;
  Matrix<Scalar> sig_a, sig_b;
  NormCache<Scalar> node_norm;
  Matrix<Scalar> node_normed_g, node_normed_h;
  Vector<Scalar> time;
};

template <typename Scalar>
struct ForwardCache {
  int rows = 0;
  int cols = 0;
  Matrix<Scalar> adjacency_g, adjacency_h;
  std::vector<LayerCache<Scalar>> layers;
  Matrix<Scalar> final_a, final_b;
  Matrix<Scalar> head_pre_a, head_pre_b;
  Matrix<Scalar> logits;
};

template <typename Scalar>
Matrix<Scalar> gin_forward(const Matrix<Scalar>& input, const Matrix<Scalar>& adjacency,
                           const LayerParams<Scalar>& p, GinCache<Scalar>* cache) {
  Matrix<Scalar> aggregated = input * adjacency;
  Matrix<Scalar> pre = (p.gin_w1 * aggregated).colwise() + p.gin_b1;
  Matrix<Scalar> out = (p.gin_w2 * relu(pre)).colwise() + p.gin_b2;
  if (cache) {
    cache->input = input;
    cache->aggregated = std::move(aggregated);
    cache->hidden_pre = std::move(pre);
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> gin_backward(const Matrix<Scalar>& d_out, const Matrix<Scalar>& adjacency, const LayerParams<Scalar>& p,
                            const GinCache<Scalar>& cache, LayerParams<Scalar>& grad, bool need_input_grad) {
  grad.gin_w2.noalias() += d_out * relu(cache.hidden_pre).transpose();
  grad.gin_b2 += d_out.rowwise().sum();
  Matrix<Scalar> d_pre = (p.gin_w2.transpose() * d_out).cwiseProduct(relu_mask(cache.hidden_pre).matrix());
  grad.gin_w1.noalias() += d_pre * cache.aggregated.transpose();
  grad.gin_b1 += d_pre.rowwise().sum();
  if (!need_input_grad) return {};
  return (p.gin_w1.transpose() * d_pre) * adjacency;
}

/// Statistics are summed per block and then added, so swapping the blocks
/// gives bit-identical results.
template <typename Scalar>
void norm_forward(const Matrix<Scalar>& first, const Matrix<Scalar>& second, const GraphNormParams<Scalar>& p,
                  bool enabled, Matrix<Scalar>& out_first, Matrix<Scalar>& out_second, NormCache<Scalar>* cache) {
  if (!enabled) {
    out_first = first;
    out_second = second;
    return;
  }
  const Scalar count = static_cast<Scalar>(first.cols() + second.cols());
  const Vector<Scalar> mean = (first.rowwise().sum() + second.rowwise().sum()) / count;
  const Vector<Scalar> shift = p.alpha.cwiseProduct(mean);
  Matrix<Scalar> centered_first = first.colwise() - shift;
  Matrix<Scalar> centered_second = second.colwise() - shift;
  const Vector<Scalar> variance = (centered_first.array().square().rowwise().sum().matrix() +
                                   centered_second.array().square().rowwise().sum().matrix()) /
                                  count;
  const Vector<Scalar> inv_std = (variance.array() + Scalar(kNormEpsilon)).rsqrt().matrix();
  const Vector<Scalar> scale = p.gamma.cwiseProduct(inv_std);
  out_first = (centered_first.array().colwise() * scale.array()).colwise() + p.beta.array();
  out_second = (centered_second.array().colwise() * scale.array()).colwise() + p.beta.array();
  if (cache) {
    cache->mean = mean;
    cache->inv_std = inv_std;
    cache->centered_first = std::move(centered_first);
    cache->centered_second = std::move(centered_second);
    cache->count = count;
  }
}

template <typename Scalar>
void norm_backward(const Matrix<Scalar>& d_first, const Matrix<Scalar>& d_second, const GraphNormParams<Scalar>& p,
                   bool enabled, const NormCache<Scalar>& c, GraphNormParams<Scalar>& grad, Matrix<Scalar>& dx_first,
                   Matrix<Scalar>& dx_second) {
  if (!enabled) {
    dx_first = d_first;
    dx_second = d_second;
    return;
  }
  grad.beta += d_first.rowwise().sum() + d_second.rowwise().sum();
  const Vector<Scalar> gc = d_first.cwiseProduct(c.centered_first).rowwise().sum() +
                            d_second.cwiseProduct(c.centered_second).rowwise().sum();
  grad.gamma += gc.cwiseProduct(c.inv_std);
  const Vector<Scalar> direct = p.gamma.cwiseProduct(c.inv_std);
  const Vector<Scalar> through_std =
      (p.gamma.array() * c.inv_std.array().cube() * gc.array() / c.count).matrix();
  Matrix<Scalar> dc_first =
      (d_first.array().colwise() * direct.array()) - (c.centered_first.array().colwise() * through_std.array());
  Matrix<Scalar> dc_second =
      (d_second.array().colwise() * direct.array()) - (c.centered_second.array().colwise() * through_std.array());
  const Vector<Scalar> dc_sum = dc_first.rowwise().sum() + dc_second.rowwise().sum();
  grad.alpha -= c.mean.cwiseProduct(dc_sum);
  const Vector<Scalar> shift = p.alpha.cwiseProduct(dc_sum) / c.count;
  dx_first = dc_first.colwise() - shift;
  dx_second = dc_second.colwise() - shift;
}

/// Cross terms: tilde[:, v*m + v'] += own[:, v] + other[:, v'].
template <typename Scalar>
void add_cross_terms(Matrix<Scalar>& tilde, const Matrix<Scalar>& own, const Matrix<Scalar>& other) {
  const Eigen::Index n = own.cols();
  const Eigen::Index m = other.cols();
  for (Eigen::Index v = 0; v < n; ++v) {
    for (Eigen::Index w = 0; w < m; ++w) tilde.col(v * m + w) += own.col(v) + other.col(w);
  }
}

/// Gated aggregation: x[:, v] += sum_w gate[:, w] * sig[:, v*m + w].
template <typename Scalar>
void add_gated_messages(Matrix<Scalar>& x, const Matrix<Scalar>& gate, const Matrix<Scalar>& sig) {
  const Eigen::Index n = x.cols();
  const Eigen::Index m = gate.cols();
  for (Eigen::Index v = 0; v < n; ++v) {
    for (Eigen::Index w = 0; w < m; ++w) x.col(v) += gate.col(w).cwiseProduct(sig.col(v * m + w));
  }
}

template <typename Scalar>
Matrix<Scalar> sigmoid_of(const Matrix<Scalar>& x) {
  return x.unaryExpr([](Scalar z) { return sigmoid(z); });
}

/// Runs the anisotropic part of a layer on GIN outputs hat_g / hat_h.
template <typename Scalar>
void agnn_forward(const LayerParams<Scalar>& p, bool use_norm, LayerCache<Scalar>& c, Matrix<Scalar>& out_g,
                  Matrix<Scalar>& out_h, Matrix<Scalar>& out_a, Matrix<Scalar>& out_b) {
  c.pair_hat_a = p.w1 * c.pair_in_a;
  c.pair_hat_b = p.w1 * c.pair_in_b;
  const Matrix<Scalar> own_g = p.w3 * c.hat_g;
  const Matrix<Scalar> own_h = p.w3 * c.hat_h;
  const Matrix<Scalar> other_g = p.w4 * c.hat_g;
  const Matrix<Scalar> other_h = p.w4 * c.hat_h;
  c.tilde_a = p.w2 * c.pair_hat_a;
  c.tilde_b = p.w2 * c.pair_hat_b;
  add_cross_terms(c.tilde_a, own_g, other_h);
  add_cross_terms(c.tilde_b, own_h, other_g);

  norm_forward(c.tilde_a, c.tilde_b, p.pair_norm, use_norm, c.normed_a, c.normed_b, &c.pair_norm);
  const Vector<Scalar> time_proj = p.w5 * c.time;
  c.mlp_in_a = relu(c.normed_a).colwise() + time_proj;
  c.mlp_in_b = relu(c.normed_b).colwise() + time_proj;
  c.mlp_pre_a = (p.mlp_w1 * c.mlp_in_a).colwise() + p.mlp_b1;
  c.mlp_pre_b = (p.mlp_w1 * c.mlp_in_b).colwise() + p.mlp_b1;
  out_a = c.pair_hat_a + ((p.mlp_w2 * relu(c.mlp_pre_a)).colwise() + p.mlp_b2);
  out_b = c.pair_hat_b + ((p.mlp_w2 * relu(c.mlp_pre_b)).colwise() + p.mlp_b2);

  c.gate_g = p.w7 * c.hat_g;
  c.gate_h = p.w7 * c.hat_h;
  c.sig_a = sigmoid_of(c.tilde_a);
  c.sig_b = sigmoid_of(c.tilde_b);
  Matrix<Scalar> x_g = p.w6 * c.hat_g;
  Matrix<Scalar> x_h = p.w6 * c.hat_h;
  add_gated_messages(x_g, c.gate_h, c.sig_a);
  add_gated_messages(x_h, c.gate_g, c.sig_b);
  norm_forward(x_g, x_h, p.node_norm, use_norm, c.node_normed_g, c.node_normed_h, &c.node_norm);
  out_g = c.hat_g + relu(c.node_normed_g);
  out_h = c.hat_h + relu(c.node_normed_h);
}

template <typename Scalar>
Matrix<Scalar> pair_encoding(const BinaryMatrix& states, bool transposed, int dim, double base) {
  const Vector<Scalar> zero = sinusoidal_embedding<Scalar>(0.0, dim, base);
  const Vector<Scalar> one = sinusoidal_embedding<Scalar>(1.0, dim, base);
  const Eigen::Index n = transposed ? states.cols() : states.rows();
  const Eigen::Index m = transposed ? states.rows() : states.cols();
  Matrix<Scalar> out(dim, n * m);
  for (Eigen::Index v = 0; v < n; ++v) {
    for (Eigen::Index w = 0; w < m; ++w) {
      const bool bit = transposed ? states(w, v) != 0 : states(v, w) != 0;
      out.col(v * m + w) = bit ? one : zero;
    }
  }
  return out;
}

template <typename Scalar>
void run_forward(const LabeledGraph& g, const LabeledGraph& h, const BinaryMatrix& mt, int t,
                 const DenoiserParams<Scalar>& params, ForwardCache<Scalar>& cache) {
  const DenoiserConfig& config = params.config;
  if (params.layers.size() != config.layer_dims.size()) throw ValidationError("parameters do not match config");
  if (mt.rows() != g.node_count() || mt.cols() != h.node_count()) {
    throw ValidationError("matching matrix shape does not match the graph pair");
  }
  if (t < 1) throw ValidationError("time step must be at least 1");
  const int n = g.node_count();
  const int m = h.node_count();
  cache.rows = n;
  cache.cols = m;
  cache.adjacency_g = closed_adjacency<Scalar>(g);
  cache.adjacency_h = closed_adjacency<Scalar>(h);
  cache.layers.assign(params.layers.size(), {});

  auto encode_labels = [&](const LabeledGraph& graph) {
    Matrix<Scalar> x = Matrix<Scalar>::Zero(config.vocab_size, graph.node_count());
    for (int v = 0; v < graph.node_count(); ++v) {
      const int l = graph.label(v);
      if (l < 0 || l >= config.vocab_size) throw ValidationError("node label outside the model vocabulary");
      x(l, v) = Scalar(1);
    }
    return x;
  };
  Matrix<Scalar> cur_g = encode_labels(g);
  Matrix<Scalar> cur_h = encode_labels(h);
  Matrix<Scalar> cur_a = pair_encoding<Scalar>(mt, false, config.pair_input_dim(), config.frequency_base);
  Matrix<Scalar> cur_b = pair_encoding<Scalar>(mt, true, config.pair_input_dim(), config.frequency_base);

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& p = params.layers[l];
    auto& c = cache.layers[l];
    c.time = sinusoidal_embedding<Scalar>(static_cast<double>(t), config.layer_dims[l], config.frequency_base);
    c.hat_g = gin_forward(cur_g, cache.adjacency_g, p, &c.gin_g);
    c.hat_h = gin_forward(cur_h, cache.adjacency_h, p, &c.gin_h);
    c.pair_in_a = std::move(cur_a);
    c.pair_in_b = std::move(cur_b);
    agnn_forward(p, config.use_graph_norm, c, cur_g, cur_h, cur_a, cur_b);
  }
  const auto& head = params.head;
  cache.head_pre_a = (head.w1 * cur_a).colwise() + head.b1;
  cache.head_pre_b = (head.w1 * cur_b).colwise() + head.b1;
  const Matrix<Scalar> score_a = (head.w2 * relu(cache.head_pre_a)).colwise() + head.b2;
  const Matrix<Scalar> score_b = (head.w2 * relu(cache.head_pre_b)).colwise() + head.b2;
  cache.final_a = std::move(cur_a);
  cache.final_b = std::move(cur_b);
  cache.logits.resize(n, m);
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < m; ++w) cache.logits(v, w) = score_a(0, v * m + w) + score_b(0, w * n + v);
  }
}

template <typename Scalar>
void run_backward(const DenoiserParams<Scalar>& params, const ForwardCache<Scalar>& cache,
                  const Matrix<Scalar>& d_logits, DenoiserParams<Scalar>& grad) {
  const int n = cache.rows;
  const int m = cache.cols;
  const bool use_norm = params.config.use_graph_norm;
  const auto& head = params.head;

  Matrix<Scalar> d_score_a(1, n * m);
  Matrix<Scalar> d_score_b(1, n * m);
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < m; ++w) {
      d_score_a(0, v * m + w) = d_logits(v, w);
      d_score_b(0, w * n + v) = d_logits(v, w);
    }
  }
  grad.head.w2.noalias() += d_score_a * relu(cache.head_pre_a).transpose();
  grad.head.w2.noalias() += d_score_b * relu(cache.head_pre_b).transpose();
  grad.head.b2 += d_score_a.rowwise().sum() + d_score_b.rowwise().sum();
  const Matrix<Scalar> d_head_a = (head.w2.transpose() * d_score_a).cwiseProduct(relu_mask(cache.head_pre_a).matrix());
  const Matrix<Scalar> d_head_b = (head.w2.transpose() * d_score_b).cwiseProduct(relu_mask(cache.head_pre_b).matrix());
  grad.head.w1.noalias() += d_head_a * cache.final_a.transpose();
  grad.head.w1.noalias() += d_head_b * cache.final_b.transpose();
  grad.head.b1 += d_head_a.rowwise().sum() + d_head_b.rowwise().sum();

  Matrix<Scalar> d_a = head.w1.transpose() * d_head_a;
  Matrix<Scalar> d_b = head.w1.transpose() * d_head_b;
  Matrix<Scalar> d_g = Matrix<Scalar>::Zero(params.config.layer_dims.back(), n);
  Matrix<Scalar> d_h = Matrix<Scalar>::Zero(params.config.layer_dims.back(), m);

  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& p = params.layers[li];
    const auto& c = cache.layers[li];
    auto& gp = grad.layers[li];
    const bool need_input = li > 0;

    // Node update: out = hat + relu(GN(w6 hat + gated messages)).
    Matrix<Scalar> d_hat_g = d_g;
    Matrix<Scalar> d_hat_h = d_h;
    const Matrix<Scalar> d_y_g = d_g.cwiseProduct(relu_mask(c.node_normed_g).matrix());
    const Matrix<Scalar> d_y_h = d_h.cwiseProduct(relu_mask(c.node_normed_h).matrix());
    Matrix<Scalar> d_x_g, d_x_h;
    norm_backward(d_y_g, d_y_h, p.node_norm, use_norm, c.node_norm, gp.node_norm, d_x_g, d_x_h);
    gp.w6.noalias() += d_x_g * c.hat_g.transpose();
    gp.w6.noalias() += d_x_h * c.hat_h.transpose();
    d_hat_g.noalias() += p.w6.transpose() * d_x_g;
    d_hat_h.noalias() += p.w6.transpose() * d_x_h;

    Matrix<Scalar> d_gate_g = Matrix<Scalar>::Zero(c.gate_g.rows(), n);
    Matrix<Scalar> d_gate_h = Matrix<Scalar>::Zero(c.gate_h.rows(), m);
    Matrix<Scalar> d_tilde_a(c.tilde_a.rows(), c.tilde_a.cols());
    Matrix<Scalar> d_tilde_b(c.tilde_b.rows(), c.tilde_b.cols());
    for (int v = 0; v < n; ++v) {
      for (int w = 0; w < m; ++w) {
        const Eigen::Index a = v * m + w;
        const Eigen::Index b = w * n + v;
        d_gate_h.col(w) += d_x_g.col(v).cwiseProduct(c.sig_a.col(a));
        d_gate_g.col(v) += d_x_h.col(w).cwiseProduct(c.sig_b.col(b));
        d_tilde_a.col(a) = d_x_g.col(v).cwiseProduct(c.gate_h.col(w));
        d_tilde_b.col(b) = d_x_h.col(w).cwiseProduct(c.gate_g.col(v));
      }
    }
    d_tilde_a.array() *= c.sig_a.array() * (Scalar(1) - c.sig_a.array());
    d_tilde_b.array() *= c.sig_b.array() * (Scalar(1) - c.sig_b.array());
    gp.w7.noalias() += d_gate_g * c.hat_g.transpose();
    gp.w7.noalias() += d_gate_h * c.hat_h.transpose();
    d_hat_g.noalias() += p.w7.transpose() * d_gate_g;
    d_hat_h.noalias() += p.w7.transpose() * d_gate_h;

    // Pair update: out = pair_hat + MLP(relu(GN(tilde)) + w5 h_t).
    Matrix<Scalar> d_pair_hat_a = d_a;
    Matrix<Scalar> d_pair_hat_b = d_b;
    gp.mlp_w2.noalias() += d_a * relu(c.mlp_pre_a).transpose();
    gp.mlp_w2.noalias() += d_b * relu(c.mlp_pre_b).transpose();
    gp.mlp_b2 += d_a.rowwise().sum() + d_b.rowwise().sum();
    const Matrix<Scalar> d_pre_a = (p.mlp_w2.transpose() * d_a).cwiseProduct(relu_mask(c.mlp_pre_a).matrix());
    const Matrix<Scalar> d_pre_b = (p.mlp_w2.transpose() * d_b).cwiseProduct(relu_mask(c.mlp_pre_b).matrix());
    gp.mlp_w1.noalias() += d_pre_a * c.mlp_in_a.transpose();
    gp.mlp_w1.noalias() += d_pre_b * c.mlp_in_b.transpose();
    gp.mlp_b1 += d_pre_a.rowwise().sum() + d_pre_b.rowwise().sum();
    const Matrix<Scalar> d_in_a = p.mlp_w1.transpose() * d_pre_a;
    const Matrix<Scalar> d_in_b = p.mlp_w1.transpose() * d_pre_b;
    const Vector<Scalar> d_time_proj = d_in_a.rowwise().sum() + d_in_b.rowwise().sum();
    gp.w5.noalias() += d_time_proj * c.time.transpose();
    const Matrix<Scalar> d_normed_a = d_in_a.cwiseProduct(relu_mask(c.normed_a).matrix());
    const Matrix<Scalar> d_normed_b = d_in_b.cwiseProduct(relu_mask(c.normed_b).matrix());
    Matrix<Scalar> d_norm_a, d_norm_b;
    norm_backward(d_normed_a, d_normed_b, p.pair_norm, use_norm, c.pair_norm, gp.pair_norm, d_norm_a, d_norm_b);
    d_tilde_a += d_norm_a;
    d_tilde_b += d_norm_b;

    gp.w2.noalias() += d_tilde_a * c.pair_hat_a.transpose();
    gp.w2.noalias() += d_tilde_b * c.pair_hat_b.transpose();
    d_pair_hat_a.noalias() += p.w2.transpose() * d_tilde_a;
    d_pair_hat_b.noalias() += p.w2.transpose() * d_tilde_b;

    Matrix<Scalar> d_own_g = Matrix<Scalar>::Zero(c.hat_g.rows(), n);
    Matrix<Scalar> d_own_h = Matrix<Scalar>::Zero(c.hat_h.rows(), m);
    Matrix<Scalar> d_other_g = Matrix<Scalar>::Zero(c.hat_g.rows(), n);
    Matrix<Scalar> d_other_h = Matrix<Scalar>::Zero(c.hat_h.rows(), m);
    for (int v = 0; v < n; ++v) {
      for (int w = 0; w < m; ++w) {
        const Eigen::Index a = v * m + w;
        const Eigen::Index b = w * n + v;
        d_own_g.col(v) += d_tilde_a.col(a);
        d_other_h.col(w) += d_tilde_a.col(a);
        d_own_h.col(w) += d_tilde_b.col(b);
        d_other_g.col(v) += d_tilde_b.col(b);
      }
    }
    gp.w3.noalias() += d_own_g * c.hat_g.transpose();
    gp.w3.noalias() += d_own_h * c.hat_h.transpose();
    gp.w4.noalias() += d_other_g * c.hat_g.transpose();
    gp.w4.noalias() += d_other_h * c.hat_h.transpose();
    d_hat_g.noalias() += p.w3.transpose() * d_own_g;
    d_hat_g.noalias() += p.w4.transpose() * d_other_g;
    d_hat_h.noalias() += p.w3.transpose() * d_own_h;
    d_hat_h.noalias() += p.w4.transpose() * d_other_h;

    gp.w1.noalias() += d_pair_hat_a * c.pair_in_a.transpose();
    gp.w1.noalias() += d_pair_hat_b * c.pair_in_b.transpose();
    if (need_input) {
      d_a = p.w1.transpose() * d_pair_hat_a;
      d_b = p.w1.transpose() * d_pair_hat_b;
    }
    d_g = gin_backward(d_hat_g, cache.adjacency_g, p, c.gin_g, gp, need_input);
    d_h = gin_backward(d_hat_h, cache.adjacency_h, p, c.gin_h, gp, need_input);
  }
}

template <typename Derived>
void fill_uniform(Eigen::PlainObjectBase<Derived>& x, Rng& rng, double bound) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = static_cast<typename Derived::Scalar>((2.0 * uniform01(rng) - 1.0) * bound);
  }
}

template <typename Scalar>
GraphNormParams<Scalar> norm_params(int d, Scalar gamma, Scalar alpha) {
  return {Vector<Scalar>::Constant(d, gamma), Vector<Scalar>::Constant(d, alpha), Vector<Scalar>::Zero(d)};
}

template <typename Scalar>
DenoiserParams<Scalar> shaped(const DenoiserConfig& config, Scalar norm_gamma, Scalar norm_alpha) {
  config.validate();
  DenoiserParams<Scalar> p;
  p.config = config;
  int node_in = config.vocab_size;
  int pair_in = config.pair_input_dim();
  for (int d : config.layer_dims) {
    LayerParams<Scalar> l;
    l.gin_w1 = Matrix<Scalar>::Zero(d, node_in);
    l.gin_b1 = Vector<Scalar>::Zero(d);
    l.gin_w2 = Matrix<Scalar>::Zero(d, d);
    l.gin_b2 = Vector<Scalar>::Zero(d);
    l.w1 = Matrix<Scalar>::Zero(d, pair_in);
    for (auto* w : {&l.w2, &l.w3, &l.w4, &l.w5, &l.w6, &l.w7}) *w = Matrix<Scalar>::Zero(d, d);
    l.mlp_w1 = Matrix<Scalar>::Zero(d, d);
    l.mlp_b1 = Vector<Scalar>::Zero(d);
    l.mlp_w2 = Matrix<Scalar>::Zero(d, d);
    l.mlp_b2 = Vector<Scalar>::Zero(d);
    l.pair_norm = norm_params<Scalar>(d, norm_gamma, norm_alpha);
    l.node_norm = norm_params<Scalar>(d, norm_gamma, norm_alpha);
    p.layers.push_back(std::move(l));
    node_in = d;
    pair_in = d;
  }
  const int d = config.layer_dims.back();
  p.head.w1 = Matrix<Scalar>::Zero(d, d);
  p.head.b1 = Vector<Scalar>::Zero(d);
  p.head.w2 = Matrix<Scalar>::Zero(1, d);
  p.head.b2 = Vector<Scalar>::Zero(1);
  return p;
}

}  // namespace

template <typename Scalar>
DenoiserParams<Scalar> DenoiserParams<Scalar>::zeros(const DenoiserConfig& config) {
  return shaped<Scalar>(config, Scalar(0), Scalar(0));
}

template <typename Scalar>
DenoiserParams<Scalar> DenoiserParams<Scalar>::initialized(const DenoiserConfig& config, std::uint64_t seed) {
  DenoiserParams p = shaped<Scalar>(config, Scalar(1), Scalar(1));
  Rng rng(derive_seed(seed, 0x5eed));
  auto init = [&rng](Matrix<Scalar>& w, Vector<Scalar>* b) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    fill_uniform(w, rng, bound);
    if (b) fill_uniform(*b, rng, bound);
  };
  for (auto& l : p.layers) {
    init(l.gin_w1, &l.gin_b1);
    init(l.gin_w2, &l.gin_b2);
    for (auto* w : {&l.w1, &l.w2, &l.w3, &l.w4, &l.w5, &l.w6, &l.w7}) init(*w, nullptr);
    init(l.mlp_w1, &l.mlp_b1);
    init(l.mlp_w2, &l.mlp_b2);
  }
  init(p.head.w1, &p.head.b1);
  init(p.head.w2, &p.head.b2);
  return p;
}

template <typename Scalar>
std::vector<ParamBlock<Scalar>> DenoiserParams<Scalar>::blocks() {
  std::vector<ParamBlock<Scalar>> out;
  auto add = [&out](std::string name, std::string group, auto& x) {
    out.push_back({std::move(name), std::move(group), x.data(), x.rows(), x.cols()});
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const std::string prefix = "layers." + std::to_string(i) + ".";
    add(prefix + "gin.w1", prefix + "gin", l.gin_w1);
    add(prefix + "gin.b1", prefix + "gin", l.gin_b1);
    add(prefix + "gin.w2", prefix + "gin", l.gin_w2);
    add(prefix + "gin.b2", prefix + "gin", l.gin_b2);
    add(prefix + "w1", prefix + "pair_linear", l.w1);
    add(prefix + "w2", prefix + "pair_linear", l.w2);
    add(prefix + "w3", prefix + "pair_linear", l.w3);
    add(prefix + "w4", prefix + "pair_linear", l.w4);
    add(prefix + "w5", prefix + "time_linear", l.w5);
    add(prefix + "w6", prefix + "node_linear", l.w6);
    add(prefix + "w7", prefix + "node_linear", l.w7);
    add(prefix + "mlp.w1", prefix + "pair_mlp", l.mlp_w1);
    add(prefix + "mlp.b1", prefix + "pair_mlp", l.mlp_b1);
    add(prefix + "mlp.w2", prefix + "pair_mlp", l.mlp_w2);
    add(prefix + "mlp.b2", prefix + "pair_mlp", l.mlp_b2);
    add(prefix + "pair_norm.gamma", prefix + "pair_norm", l.pair_norm.gamma);
    add(prefix + "pair_norm.alpha", prefix + "pair_norm", l.pair_norm.alpha);
    add(prefix + "pair_norm.beta", prefix + "pair_norm", l.pair_norm.beta);
    add(prefix + "node_norm.gamma", prefix + "node_norm", l.node_norm.gamma);
    add(prefix + "node_norm.alpha", prefix + "node_norm", l.node_norm.alpha);
    add(prefix + "node_norm.beta", prefix + "node_norm", l.node_norm.beta);
  }
  add("head.w1", "head", head.w1);
  add("head.b1", "head", head.b1);
  add("head.w2", "head", head.w2);
  add("head.b2", "head", head.b2);
  return out;
}

template <typename Scalar>
std::size_t DenoiserParams<Scalar>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& b : const_cast<DenoiserParams*>(this)->blocks()) total += static_cast<std::size_t>(b.size());
  return total;
}

template <typename Scalar>
bool DenoiserParams<Scalar>::operator==(const DenoiserParams& other) const {
  if (!(config == other.config)) return false;
  auto mine = const_cast<DenoiserParams*>(this)->blocks();
  auto theirs = const_cast<DenoiserParams&>(other).blocks();
  if (mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].rows != theirs[i].rows || mine[i].cols != theirs[i].cols) return false;
    if (!std::equal(mine[i].data, mine[i].data + mine[i].size(), theirs[i].data)) return false;
  }
  return true;
}

template <typename Scalar>
Vector<Scalar> sinusoidal_embedding(double x, int dim, double base) {
  if (dim <= 0 || dim % 2 != 0) throw ValidationError("sinusoidal embedding needs a positive even dimension");
  Vector<Scalar> out(dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double arg = x / std::pow(base, static_cast<double>(2 * i) / dim);
    out(2 * i) = static_cast<Scalar>(std::sin(arg));
    out(2 * i + 1) = static_cast<Scalar>(std::cos(arg));
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> gin_encode(const LabeledGraph& g, const Matrix<Scalar>& node_features, const LayerParams<Scalar>& layer) {
  if (node_features.cols() != g.node_count() || node_features.rows() != layer.gin_w1.cols()) {
    throw ValidationError("gin_encode: feature matrix shape mismatch");
  }
  return gin_forward<Scalar>(node_features, closed_adjacency<Scalar>(g), layer, nullptr);
}

template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> graph_norm(const Matrix<Scalar>& first, const Matrix<Scalar>& second,
                                                     const GraphNormParams<Scalar>& params) {
  if (first.rows() != params.gamma.size() || second.rows() != params.gamma.size()) {
    throw ValidationError("graph_norm: channel count mismatch");
  }
  std::pair<Matrix<Scalar>, Matrix<Scalar>> out;
  norm_forward<Scalar>(first, second, params, true, out.first, out.second, nullptr);
  return out;
}

template <typename Scalar>
PairEmbeddingState<Scalar> agnn_layer(const PairEmbeddingState<Scalar>& state, const LayerParams<Scalar>& layer,
                                      bool use_graph_norm) {
  const Eigen::Index n = state.node_g.cols();
  const Eigen::Index m = state.node_g_prime.cols();
  const Eigen::Index d = layer.w2.rows();
  if (state.pair_forward.cols() != n * m || state.pair_backward.cols() != n * m ||
      state.pair_forward.rows() != layer.w1.cols() || state.node_g.rows() != d || state.node_g_prime.rows() != d ||
      state.time.size() != layer.w5.cols()) {
    throw ValidationError("agnn_layer: state shape mismatch");
  }
  LayerCache<Scalar> c;
  c.hat_g = state.node_g;
  c.hat_h = state.node_g_prime;
  c.pair_in_a = state.pair_forward;
  c.pair_in_b = state.pair_backward;
  c.time = state.time;
  PairEmbeddingState<Scalar> out;
  out.time = state.time;
  agnn_forward(layer, use_graph_norm, c, out.node_g, out.node_g_prime, out.pair_forward, out.pair_backward);
  return out;
}

template <typename Scalar>
MatchingMatrix<Scalar> denoise_forward(const LabeledGraph& g, const LabeledGraph& g_prime, const BinaryMatrix& mt,
                                       int t, const DenoiserParams<Scalar>& params) {
  if (g.node_count() == 0 || g_prime.node_count() == 0) {
    if (mt.rows() != g.node_count() || mt.cols() != g_prime.node_count()) {
      throw ValidationError("matching matrix shape does not match the graph pair");
    }
    return MatchingMatrix<Scalar>(g.node_count(), g_prime.node_count());
  }
  ForwardCache<Scalar> cache;
  run_forward(g, g_prime, mt, t, params, cache);
  return sigmoid_of(cache.logits);
}

template <typename Scalar>
MatchingMatrix<Scalar> denoise_forward(const GraphPair& pair, const BinaryMatrix& mt, int t,
                                       const DenoiserParams<Scalar>& params) {
  return denoise_forward(pair.g, pair.g_prime, mt, t, params);
}

template <typename Scalar>
std::vector<bool> relu_activation_pattern(const GraphPair& pair, const BinaryMatrix& mt, int t,
                                          const DenoiserParams<Scalar>& params) {
  std::vector<bool> out;
  if (pair.g.node_count() == 0 || pair.g_prime.node_count() == 0) return out;
  ForwardCache<Scalar> cache;
  run_forward(pair.g, pair.g_prime, mt, t, params, cache);
  auto append = [&](const Matrix<Scalar>& pre) {
    for (Eigen::Index i = 0; i < pre.size(); ++i) out.push_back(pre.data()[i] > Scalar(0));
  };
  for (const auto& c : cache.layers) {
    append(c.gin_g.hidden_pre);
    append(c.gin_h.hidden_pre);
    append(c.normed_a);
    append(c.normed_b);
    append(c.mlp_pre_a);
    append(c.mlp_pre_b);
    append(c.node_normed_g);
    append(c.node_normed_h);
  }
  append(cache.head_pre_a);
  append(cache.head_pre_b);
  return out;
}

template <typename Scalar>
Scalar bce_loss(const MatchingMatrix<Scalar>& probs, const BinaryMatrix& target) {
  if (probs.rows() != target.rows() || probs.cols() != target.cols()) throw ValidationError("bce_loss: shape mismatch");
  if (probs.size() == 0) return Scalar(0);
  Scalar total = 0;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const Scalar p = std::clamp(probs(i, j), Scalar(kProbClamp), Scalar(1 - kProbClamp));
      total -= target(i, j) ? std::log(p) : std::log(Scalar(1) - p);
    }
  }
  return total / static_cast<Scalar>(probs.size());
}

template <typename Scalar>
Scalar accumulate_gradient(const GraphPair& pair, const BinaryMatrix& mt, int t, const DenoiserParams<Scalar>& params,
                           const BinaryMatrix& target, DenoiserParams<Scalar>& gradients) {
  if (target.rows() != mt.rows() || target.cols() != mt.cols()) throw ValidationError("target shape mismatch");
  if (mt.size() == 0) return Scalar(0);
  ForwardCache<Scalar> cache;
  run_forward(pair.g, pair.g_prime, mt, t, params, cache);
  const MatchingMatrix<Scalar> probs = sigmoid_of(cache.logits);
  const Scalar inv_count = Scalar(1) / static_cast<Scalar>(probs.size());
  Matrix<Scalar> d_logits(probs.rows(), probs.cols());
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const Scalar p = probs(i, j);
      const bool clamped = p < Scalar(kProbClamp) || p > Scalar(1 - kProbClamp);
      d_logits(i, j) = clamped ? Scalar(0) : (p - Scalar(target(i, j) ? 1 : 0)) * inv_count;
    }
  }
  run_backward(params, cache, d_logits, gradients);
  return bce_loss<Scalar>(probs, target);
}

template <typename Scalar>
LossAndGradient<Scalar> denoise_backward(const GraphPair& pair, const BinaryMatrix& mt, int t,
                                         const DenoiserParams<Scalar>& params, const BinaryMatrix& target) {
  LossAndGradient<Scalar> out{Scalar(0), DenoiserParams<Scalar>::zeros(params.config)};
  out.loss = accumulate_gradient(pair, mt, t, params, target, out.gradients);
  return out;
}

#define DIFFGED_INSTANTIATE(S)                                                                                   \
  template struct DenoiserParams<S>;                                                                             \
  template Vector<S> sinusoidal_embedding<S>(double, int, double);                                              \
  template Matrix<S> gin_encode<S>(const LabeledGraph&, const Matrix<S>&, const LayerParams<S>&);               \
  template std::pair<Matrix<S>, Matrix<S>> graph_norm<S>(const Matrix<S>&, const Matrix<S>&,                    \
                                                         const GraphNormParams<S>&);                            \
  template PairEmbeddingState<S> agnn_layer<S>(const PairEmbeddingState<S>&, const LayerParams<S>&, bool);      \
  template MatchingMatrix<S> denoise_forward<S>(const GraphPair&, const BinaryMatrix&, int,                     \
                                                const DenoiserParams<S>&);                                      \
  template MatchingMatrix<S> denoise_forward<S>(const LabeledGraph&, const LabeledGraph&, const BinaryMatrix&, \
                                                int, const DenoiserParams<S>&);                                 \
  template S bce_loss<S>(const MatchingMatrix<S>&, const BinaryMatrix&);                                        \
  template std::vector<bool> relu_activation_pattern<S>(const GraphPair&, const BinaryMatrix&, int,             \
                                                        const DenoiserParams<S>&);                              \
  template S accumulate_gradient<S>(const GraphPair&, const BinaryMatrix&, int, const DenoiserParams<S>&,       \
                                    const BinaryMatrix&, DenoiserParams<S>&);                                   \
  template LossAndGradient<S> denoise_backward<S>(const GraphPair&, const BinaryMatrix&, int,                   \
                                                  const DenoiserParams<S>&, const BinaryMatrix&);

DIFFGED_INSTANTIATE(float)
DIFFGED_INSTANTIATE(double)

#undef DIFFGED_INSTANTIATE

}  // namespace diffged
