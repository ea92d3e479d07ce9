#include "diffged/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "diffged/metrics.hpp"
#include "diffged/oracle.hpp"
#include "diffged/parallel.hpp"

namespace diffged {

namespace {

/// Gradient buffers are reduced in this many fixed slices of the batch.
constexpr std::size_t kGradientChunks = 8;

void add_into(DenoiserParams<double>& total, DenoiserParams<double>& part, double scale) {
  auto t = total.blocks();
  auto p = part.blocks();
  for (std::size_t b = 0; b < t.size(); ++b) {
    for (Eigen::Index i = 0; i < t[b].size(); ++i) t[b].data[i] += scale * p[b].data[i];
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (!(learning_rate >= 0.0)) throw ValidationError("learning_rate must be non-negative");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be non-negative");
  if (val_every < 1 || val_k < 1) throw ValidationError("val_every and val_k must be positive");
  if (val_steps < 1 || val_steps > schedule.steps) throw ValidationError("val_steps must lie in [1, T]");
  schedule.build();
  model.validate();
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"epochs", "batch_size", "learning_rate", "weight_decay", "T",
                                              "beta_start", "beta_end", "seed", "layer_dims", "val_every",
                                              "val_k", "val_steps", "workers"};
  if (!j.is_object()) throw ParseError("training config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ParseError("unknown training config key '" + key + "'");
  }
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.schedule.steps = j.value("T", c.schedule.steps);
    c.schedule.beta_start = j.value("beta_start", c.schedule.beta_start);
    c.schedule.beta_end = j.value("beta_end", c.schedule.beta_end);
    c.seed = j.value("seed", c.seed);
    c.model.layer_dims = j.value("layer_dims", c.model.layer_dims);
    c.val_every = j.value("val_every", c.val_every);
    c.val_k = j.value("val_k", c.val_k);
    c.val_steps = j.value("val_steps", c.val_steps);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad training config value: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"T", c.schedule.steps},
          {"beta_start", c.schedule.beta_start},
          {"beta_end", c.schedule.beta_end},
          {"seed", c.seed},
          {"layer_dims", c.model.layer_dims},
          {"val_every", c.val_every},
          {"val_k", c.val_k},
          {"val_steps", c.val_steps},
          {"workers", c.workers}};
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return train_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

double train_step(DenoiserParams<double>& params, OptimizerState& optimizer, std::span<const GraphPair> batch,
                  const NoiseSchedule& schedule, Rng& rng, double learning_rate, double weight_decay,
                  std::size_t workers) {
  if (batch.empty()) throw ValidationError("train_step needs a non-empty batch");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i].ground_truth_mapping) {
      throw ValidationError("batch item " + std::to_string(i) + " has no ground-truth mapping");
    }
  }
  const std::uint64_t step_seed = rng();
  const std::size_t n = batch.size();
  const std::size_t chunks = std::min(kGradientChunks, n);
  std::vector<DenoiserParams<double>> partial(chunks);
  std::vector<double> losses(n);
  std::vector<int> times(n);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        partial[c] = DenoiserParams<double>::zeros(params.config);
        for (std::size_t i = c * n / chunks; i < (c + 1) * n / chunks; ++i) {
          Rng item_rng(derive_seed(step_seed, i));
          const int t = static_cast<int>(uniform_int(item_rng, 1, schedule.steps()));
          const BinaryMatrix target = ground_truth_matrix(batch[i]);
          const BinaryMatrix noisy = forward_sample(target, t, schedule, item_rng);
          times[i] = t;
          losses[i] = accumulate_gradient(batch[i], noisy, t, params, target, partial[c]);
        }
      },
      workers == 0 ? default_workers() : workers);

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(losses[i])) {
      std::ostringstream msg;
      msg << "non-finite loss on batch item " << i << " (t = " << times[i] << ", |V| = " << batch[i].g.node_count()
          << ", |V'| = " << batch[i].g_prime.node_count() << ")";
      throw Error(msg.str());
    }
  }
  auto gradient = DenoiserParams<double>::zeros(params.config);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& part : partial) add_into(gradient, part, scale);
  optimizer_step(params, gradient, optimizer, learning_rate, weight_decay);
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
}

TrainResult train(const Dataset& training, const std::vector<GraphPair>& validation, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (training.pairs.empty()) throw ValidationError("training set is empty");
  for (std::size_t i = 0; i < training.pairs.size(); ++i) {
    if (!training.pairs[i].ground_truth_mapping) {
      throw ValidationError("training pair " + std::to_string(i) + " has no ground-truth mapping");
    }
  }
  DenoiserConfig model = config.model;
  model.vocab_size = std::max(1, training.vocab.size());
  const NoiseSchedule schedule = config.schedule.build();

  TrainResult result;
  Checkpoint current{DenoiserParams<double>::initialized(model, derive_seed(config.seed, 0)), training.vocab,
                     config.schedule, OptimizerState::for_config(model, config.adam)};
  result.best = current;
  Rng rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(training.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<GraphPair> batch;
  double best_accuracy = -1.0;
  double best_mae = 0.0;
  bool first_batch = true;

  SolveConfig val_config;
  val_config.k = config.val_k;
  val_config.steps = config.val_steps;
  val_config.seed = derive_seed(config.seed, 2);
  val_config.workers = config.workers;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i - 1)))]);
    }
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(training.pairs[order[i]]);
      const double loss = train_step(current.params, *current.optimizer, batch, schedule, rng, config.learning_rate,
                                     config.weight_decay, config.workers);
      if (first_batch) {
        result.initial_loss = loss;
        first_batch = false;
      }
      loss_sum += loss * static_cast<double>(end - start);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    const bool validate_now = !validation.empty() && (epoch % config.val_every == 0 || epoch == config.epochs);
    if (validate_now) {
      const Evaluation eval = evaluate(validation, current.params, schedule, val_config);
      record.val_accuracy = eval.report.accuracy;
      record.val_mae = eval.report.mae;
      if (eval.report.accuracy > best_accuracy ||
          (eval.report.accuracy == best_accuracy && eval.report.mae <= best_mae)) {
        best_accuracy = eval.report.accuracy;
        best_mae = eval.report.mae;
        result.best = current;
        result.best_epoch = epoch;
      }
    }
    result.curve.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  result.last = current;
  if (validation.empty()) {
    result.best = current;
    result.best_epoch = config.epochs;
  }
  return result;
}

void write_loss_curve(const std::vector<EpochRecord>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,val_accuracy,val_mae\n" << std::setprecision(17);
  for (const auto& r : curve) {
    out << r.epoch << ',' << r.train_loss << ',';
    if (r.val_accuracy) out << *r.val_accuracy;
    out << ',';
    if (r.val_mae) out << *r.val_mae;
    out << '\n';
  }
}

}  // namespace diffged
