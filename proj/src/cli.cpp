#include "diffged/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "diffged/checkpoint.hpp"
#include "diffged/dataset.hpp"
#include "diffged/metrics.hpp"
#include "diffged/oracle.hpp"
#include "diffged/solver.hpp"
#include "diffged/synthetic.hpp"
#include "diffged/training.hpp"

namespace diffged {

namespace {

using nlohmann::json;

/// Reads base graphs: one graph record per line, or pair records whose first
/// graph is used.
std::vector<LabeledGraph> read_graphs(const std::string& path, LabelVocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<LabeledGraph> graphs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json record = json::parse(line);
      if (record.contains("vocab")) {
        for (const auto& name : record["vocab"]) vocab.intern(name.get<std::string>());
        continue;
      }
      graphs.push_back(graph_from_json(record.contains("g") ? record["g"] : record, vocab));
    } catch (const json::exception& e) {
      throw ParseError(path + " line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return graphs;
}

/// Output stream for --out, or the default stream when the flag is empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

/// Rewrites the dataset's label ids into the checkpoint's vocabulary.
std::vector<GraphPair> pairs_for_model(const Dataset& data, const LabelVocabulary& model_vocab) {
  if (data.vocab == model_vocab) return data.pairs;
  std::vector<GraphPair> out;
  out.reserve(data.pairs.size());
  for (const auto& p : data.pairs) out.push_back(remap_labels(p, data.vocab, model_vocab));
  return out;
}

struct SolveFlags {
  int k = 100;
  int steps = 10;
  std::string method = "greedy";
  bool one_shot = false;
  std::uint64_t seed = 0;
  std::size_t workers = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--k", k, "Matching matrices sampled per pair")->check(CLI::PositiveNumber);
    cmd->add_option("--s", steps, "Reverse denoising steps")->check(CLI::PositiveNumber);
    cmd->add_option("--method", method, "Mapping extraction")->check(CLI::IsMember({"greedy", "hungarian"}));
    cmd->add_flag("--one-shot", one_shot, "Single forward pass from noise (no diffusion)");
    cmd->add_option("--seed", seed, "Root seed of the sampling chains");
    cmd->add_option("--workers", workers, "Threads for the chains (0 = all cores)");
  }
  SolveConfig config() const {
    SolveConfig c;
    c.k = k;
    c.steps = steps;
    c.method = parse_extraction_method(method);
    c.one_shot = one_shot;
    c.seed = seed;
    c.workers = workers;
    return c;
  }
};

json solve_to_json(const SolveResult& r, const GraphPair& pair, const LabelVocabulary& vocab) {
  return {{"predicted_ged", r.predicted_ged},
          {"mapping", r.best_mapping},
          {"swapped", pair.swapped},
          {"chain_costs", r.chain_costs},
          {"distinct_optimal_paths", r.distinct_optimal_paths},
          {"time_s", r.seconds},
          {"edit_path", script_to_json(r.best_script, vocab)}};
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

void print_report(std::ostream& out, const MetricsReport& r) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(4) << "pairs     " << r.pair_count << "\n"
      << "mae       " << r.mae << "\n"
      << "accuracy  " << r.accuracy << "\n"
      << "rho       " << format_optional(r.spearman_rho) << "\n"
      << "tau       " << format_optional(r.kendall_tau) << "\n"
      << "p@10      " << format_optional(r.p_at_10) << "\n"
      << "p@20      " << format_optional(r.p_at_20) << "\n"
      << "time_s    " << r.mean_solve_seconds << "\n";
  out.flags(flags);
  out.precision(precision);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("'" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ValidationError("empty value list");
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph edit distance by sampling node matchings from a diffusion model", "diffged"};
  app.require_subcommand(1);

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Create synthetic pairs with known GED from base graphs");
  std::string gen_input;
  std::string gen_out;
  int per_graph = 10;
  std::uint64_t gen_seed = 0;
  std::size_t random_count = 0;
  int min_nodes = 5;
  int max_nodes = 8;
  std::vector<int> label_counts{1};
  double edge_prob = 0.3;
  int small_max_delta = 5;
  bool no_shuffle = false;
  auto* gen_in_opt = gen->add_option("--input", gen_input, "Base graphs (graph or pair records, one per line)");
  auto* gen_rand_opt = gen->add_option("--random", random_count, "Generate this many random base graphs instead");
  gen_in_opt->excludes(gen_rand_opt);
  gen->add_option("--per-graph", per_graph, "Synthetic partners per base graph")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Root seed");
  gen->add_option("--min-nodes", min_nodes, "Smallest random base graph")->check(CLI::PositiveNumber);
  gen->add_option("--max-nodes", max_nodes, "Largest random base graph")->check(CLI::PositiveNumber);
  gen->add_option("--labels", label_counts, "Label counts cycled over random base graphs")->delimiter(',');
  gen->add_option("--edge-prob", edge_prob, "Extra-edge probability of random graphs")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--max-delta", small_max_delta, "Largest delta for graphs of at most 20 nodes")
      ->check(CLI::PositiveNumber);
  gen->add_flag("--no-shuffle", no_shuffle, "Keep partner node order (ground truth is the identity)");
  gen->add_option("--out", gen_out, "Output dataset (default stdout)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact GED for every pair; writes an annotated dataset");
  std::string oracle_input;
  std::string oracle_out;
  int oracle_max_nodes = 8;
  std::size_t astar_budget = 5'000'000;
  oracle->add_option("--input", oracle_input, "Dataset")->required();
  oracle->add_option("--max-nodes", oracle_max_nodes, "Brute force up to this size, A* above");
  oracle->add_option("--budget", astar_budget, "A* expansion budget");
  oracle->add_option("--out", oracle_out, "Annotated dataset (default stdout)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the denoising network");
  std::string config_path;
  std::string train_data;
  std::string val_data;
  std::string train_out;
  train_cmd->add_option("--config", config_path, "Training config (JSON)")->required();
  train_cmd->add_option("--data", train_data, "Training dataset")->required();
  train_cmd->add_option("--val", val_data, "Validation dataset for model selection");
  train_cmd->add_option("--out", train_out, "Output directory")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Predict GED and an edit path for each pair in a file");
  std::string pair_path;
  std::string solve_ckpt;
  bool solve_json = false;
  bool emit_path = false;
  SolveFlags solve_flags;
  solve->add_option("--pair", pair_path, "Pair file (one or more records)")->required();
  solve->add_option("--ckpt", solve_ckpt, "Model checkpoint")->required();
  solve_flags.add(solve);
  solve->add_flag("--json", solve_json, "One JSON result per line");
  solve->add_flag("--emit-path", emit_path, "Print the edit path (always included with --json)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score predictions against ground-truth GEDs");
  std::string eval_data;
  std::string eval_ckpt;
  std::string predictor = "model";
  bool eval_json = false;
  SolveFlags eval_flags;
  eval->add_option("--data", eval_data, "Dataset with gt_ged")->required();
  eval->add_option("--ckpt", eval_ckpt, "Model checkpoint (predictor model)");
  eval->add_option("--predictor", predictor, "model or oracle")->check(CLI::IsMember({"model", "oracle"}));
  eval_flags.add(eval);
  eval->add_flag("--json", eval_json, "JSON report");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Sweep k or the number of denoising steps");
  std::string ablate_data;
  std::string ablate_ckpt;
  std::string sweep;
  std::string values;
  std::string ablate_out;
  SolveFlags ablate_flags;
  ablate->add_option("--data", ablate_data, "Dataset with gt_ged")->required();
  ablate->add_option("--ckpt", ablate_ckpt, "Model checkpoint")->required();
  ablate->add_option("--sweep", sweep, "Parameter to sweep")->required()->check(CLI::IsMember({"k", "s"}));
  ablate->add_option("--values", values, "Comma-separated values (default per parameter)");
  ablate_flags.add(ablate);
  ablate->add_option("--out", ablate_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen) {
      Dataset data;
      CorpusOptions options;
      options.per_graph = per_graph;
      options.small_graph_max_delta = small_max_delta;
      options.shuffle_targets = !no_shuffle;
      if (!gen_input.empty()) {
        const auto bases = read_graphs(gen_input, data.vocab);
        if (data.vocab.size() == 0) data.vocab.intern("0");
        const std::vector<int> per_base_labels(bases.size(), data.vocab.size());
        data.pairs = build_synthetic_corpus(bases, derive_seed(gen_seed, 1), options, per_base_labels);
      } else if (random_count > 0) {
        RandomCorpusSpec spec;
        spec.base_count = random_count;
        spec.min_nodes = min_nodes;
        spec.max_nodes = max_nodes;
        spec.extra_edge_prob = edge_prob;
        spec.label_counts = label_counts;
        spec.corpus = options;
        spec.seed = gen_seed;
        data = random_corpus(spec);
      } else {
        throw ValidationError("gen-synthetic needs --input or --random");
      }
      Output o(gen_out, out);
      write_dataset(data, o.get());
      return 0;
    }

    if (*oracle) {
      Dataset data = load_dataset(oracle_input);
      int disagreements = 0;
      for (std::size_t i = 0; i < data.pairs.size(); ++i) {
        auto& pair = data.pairs[i];
        OracleResult r;
        if (pair.g.node_count() <= oracle_max_nodes) {
          r = exact_ged_bruteforce(pair, {oracle_max_nodes, 1});
        } else {
          r = exact_ged_astar(pair, astar_budget, 1);
        }
        if (!r.optimal) {
          err << "pair " << i << ": search budget exhausted, GED in [" << r.lower_bound << ", " << r.ged
              << "]; left unannotated\n";
          continue;
        }
        if (pair.ground_truth_ged && *pair.ground_truth_ged != r.ged) {
          ++disagreements;
          err << "pair " << i << ": recorded gt_ged " << *pair.ground_truth_ged << ", exact " << r.ged << "\n";
        }
        pair.ground_truth_ged = r.ged;
        pair.ground_truth_mapping = r.optimal_mappings.front();
      }
      Output o(oracle_out, out);
      write_dataset(data, o.get());
      err << data.pairs.size() << " pairs, " << disagreements << " disagreements with recorded gt_ged\n";
      return 0;
    }

    if (*train_cmd) {
      const TrainConfig config = load_train_config(config_path);
      const Dataset data = load_dataset(train_data);
      std::vector<GraphPair> validation;
      if (!val_data.empty()) validation = pairs_for_model(load_dataset(val_data), data.vocab);
      std::filesystem::create_directories(train_out);
      const auto start = std::chrono::steady_clock::now();
      const TrainResult result = train(data, validation, config, [&](const EpochRecord& r) {
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        err << "epoch " << r.epoch << " loss " << r.train_loss;
        if (r.val_accuracy) err << " val_accuracy " << *r.val_accuracy << " val_mae " << *r.val_mae;
        std::ostringstream seconds;
        seconds << std::fixed << std::setprecision(1) << elapsed;
        err << " (" << seconds.str() << " s)\n";
      });
      const std::filesystem::path dir(train_out);
      save_checkpoint(result.best, dir / "model.bin");
      save_checkpoint(result.last, dir / "last.bin");
      write_loss_curve(result.curve, dir / "loss.csv");
      std::ofstream(dir / "config.json") << train_config_to_json(config).dump(2) << "\n";
      err << "best epoch " << result.best_epoch << ", wrote " << (dir / "model.bin").string() << "\n";
      return 0;
    }

    if (*solve) {
      const Checkpoint ckpt = load_checkpoint(solve_ckpt);
      const NoiseSchedule schedule = ckpt.schedule.build();
      const Dataset data = load_dataset(pair_path);
      const auto pairs = pairs_for_model(data, ckpt.vocab);
      const SolveConfig config = solve_flags.config();
      for (const auto& pair : pairs) {
        const SolveResult r = diffged_solve(pair, ckpt.params, schedule, config);
        if (solve_json) {
          out << solve_to_json(r, pair, ckpt.vocab).dump() << "\n";
        } else {
          out << "ged " << r.predicted_ged << "  mapping [";
          for (std::size_t v = 0; v < r.best_mapping.size(); ++v) out << (v ? "," : "") << r.best_mapping[v];
          out << "]  distinct optimal paths " << r.distinct_optimal_paths << "  (" << r.seconds << " s)\n";
          if (emit_path) out << "path " << script_to_json(r.best_script, ckpt.vocab).dump() << "\n";
        }
      }
      return 0;
    }

    if (*eval) {
      const Dataset data = load_dataset(eval_data);
      MetricsReport report;
      if (predictor == "oracle") {
        std::vector<int> predicted;
        const auto start = std::chrono::steady_clock::now();
        for (const auto& pair : data.pairs) predicted.push_back(exact_ged_astar(pair, 5'000'000, 0).ged);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report = compute_metrics(data.pairs, predicted, seconds / static_cast<double>(std::max<std::size_t>(1, predicted.size())));
      } else {
        if (eval_ckpt.empty()) throw ValidationError("--ckpt is required with --predictor model");
        const Checkpoint ckpt = load_checkpoint(eval_ckpt);
        report = evaluate(pairs_for_model(data, ckpt.vocab), ckpt.params, ckpt.schedule.build(), eval_flags.config())
                     .report;
      }
      if (eval_json) {
        out << report_to_json(report).dump() << "\n";
      } else {
        print_report(out, report);
      }
      return 0;
    }

    if (*ablate) {
      const Checkpoint ckpt = load_checkpoint(ablate_ckpt);
      const NoiseSchedule schedule = ckpt.schedule.build();
      const auto pairs = pairs_for_model(load_dataset(ablate_data), ckpt.vocab);
      std::vector<int> grid;
      if (!values.empty()) {
        grid = parse_int_list(values);
      } else if (sweep == "k") {
        grid = {1, 2, 4, 8, 16, 32, 64, 100};
      } else {
        grid = {1, 2, 3, 4, 5, 10, 20};
      }
      Output o(ablate_out, out);
      o.get() << "param,value,accuracy,mae,time_s\n";
      for (int value : grid) {
        SolveConfig config = ablate_flags.config();
        (sweep == "k" ? config.k : config.steps) = value;
        const MetricsReport r = evaluate(pairs, ckpt.params, schedule, config).report;
        o.get() << sweep << ',' << value << ',' << std::setprecision(17) << r.accuracy << ',' << r.mae << ','
                << r.mean_solve_seconds << "\n";
        o.get().flush();
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace diffged
