#include "diffged/dataset.hpp"

#include <fstream>
#include <sstream>

#include "diffged/edit_path.hpp"

namespace diffged {

using nlohmann::json;

LabeledGraph graph_from_json(const json& node, LabelVocabulary& vocab) {
  if (!node.is_object()) throw ParseError("graph must be an object");
  if (!node.contains("n") || !node["n"].is_number_integer()) throw ParseError("graph needs integer field \"n\"");
  const int n = node["n"].get<int>();
  if (n < 0) throw ValidationError("negative node count");
  std::vector<Edge> edges;
  if (node.contains("edges")) {
    const auto& list = node["edges"];
    if (!list.is_array()) throw ParseError("\"edges\" must be an array");
    edges.reserve(list.size());
    for (const auto& e : list) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        throw ParseError("edge must be a pair of integers");
      }
      edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  if (node.contains("labels") && !node["labels"].is_null()) {
    const auto& list = node["labels"];
    if (!list.is_array()) throw ParseError("\"labels\" must be an array");
    if (list.size() != static_cast<std::size_t>(n)) {
      throw ValidationError("graph has " + std::to_string(n) + " nodes but " +
                            std::to_string(list.size()) + " labels");
    }
    for (std::size_t v = 0; v < list.size(); ++v) {
      if (list[v].is_string()) {
        labels[v] = vocab.intern(list[v].get<std::string>());
      } else if (list[v].is_number_integer()) {
        labels[v] = vocab.intern(std::to_string(list[v].get<long long>()));
      } else {
        throw ParseError("label must be a string");
      }
    }
  } else {
    const int id = vocab.intern("0");
    std::fill(labels.begin(), labels.end(), id);
  }
  return LabeledGraph(n, std::move(edges), std::move(labels));
}

json graph_to_json(const LabeledGraph& g, const LabelVocabulary& vocab) {
  json edges = json::array();
  for (const auto& e : g.edges()) edges.push_back({e.u, e.v});
  json labels = json::array();
  for (int id : g.labels()) labels.push_back(vocab.name(id));
  return json{{"n", g.node_count()}, {"edges", std::move(edges)}, {"labels", std::move(labels)}};
}

GraphPair pair_from_json(const json& record, LabelVocabulary& vocab) {
  if (!record.is_object()) throw ParseError("record must be an object");
  if (!record.contains("g") || !record.contains("g_prime")) throw ParseError("record needs \"g\" and \"g_prime\"");
  LabeledGraph first = graph_from_json(record["g"], vocab);
  LabeledGraph second = graph_from_json(record["g_prime"], vocab);
  std::optional<NodeMapping> mapping;
  if (record.contains("gt_mapping") && !record["gt_mapping"].is_null()) {
    const auto& list = record["gt_mapping"];
    if (!list.is_array()) throw ParseError("\"gt_mapping\" must be an array or null");
    NodeMapping f;
    for (const auto& x : list) {
      if (!x.is_number_integer()) throw ParseError("\"gt_mapping\" entries must be integers");
      f.push_back(x.get<int>());
    }
    mapping = std::move(f);
  }
  std::optional<int> ged;
  if (record.contains("gt_ged") && !record["gt_ged"].is_null()) {
    if (!record["gt_ged"].is_number_integer()) throw ParseError("\"gt_ged\" must be an integer or null");
    ged = record["gt_ged"].get<int>();
  }
  GraphPair pair = make_graph_pair(std::move(first), std::move(second), std::move(mapping), ged);
  if (pair.ground_truth_mapping && pair.ground_truth_ged) {
    const int cost = edit_cost(pair, *pair.ground_truth_mapping);
    if (cost != *pair.ground_truth_ged) {
      throw ValidationError("gt_mapping costs " + std::to_string(cost) + " but gt_ged is " +
                            std::to_string(*pair.ground_truth_ged));
    }
  }
  return pair;
}

json pair_to_json(const GraphPair& pair, const LabelVocabulary& vocab) {
  const LabeledGraph& first = pair.swapped ? pair.g_prime : pair.g;
  const LabeledGraph& second = pair.swapped ? pair.g : pair.g_prime;
  json record{{"g", graph_to_json(first, vocab)}, {"g_prime", graph_to_json(second, vocab)}};
  record["gt_mapping"] = pair.ground_truth_mapping ? json(*pair.ground_truth_mapping) : json(nullptr);
  record["gt_ged"] = pair.ground_truth_ged ? json(*pair.ground_truth_ged) : json(nullptr);
  return record;
}

Dataset parse_dataset(std::istream& in) {
  Dataset out;
  std::string line;
  std::size_t record_index = 0;
  std::size_t line_number = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        "record " + std::to_string(record_index) + " (line " + std::to_string(line_number) + ")";
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (first_content && record.is_object() && record.contains("vocab")) {
      first_content = false;
      try {
        out.vocab = LabelVocabulary(record["vocab"].get<std::vector<std::string>>());
      } catch (const json::exception& e) {
        throw ParseError("vocabulary header (line " + std::to_string(line_number) + "): " + e.what());
      }
      continue;
    }
    first_content = false;
    try {
      out.pairs.push_back(pair_from_json(record, out.vocab));
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    ++record_index;
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  return parse_dataset(in);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << json{{"vocab", dataset.vocab.names()}}.dump() << '\n';
  for (const auto& pair : dataset.pairs) out << pair_to_json(pair, dataset.vocab).dump() << '\n';
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset to " + path.string());
  write_dataset(dataset, out);
  out.flush();
  if (!out) throw Error("failed while writing dataset to " + path.string());
}

}  // namespace diffged
