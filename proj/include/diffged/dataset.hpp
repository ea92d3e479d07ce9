#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "diffged/graph.hpp"
#include "json.hpp"

namespace diffged {

struct Dataset {
  std::vector<GraphPair> pairs;
  LabelVocabulary vocab;

  bool operator==(const Dataset&) const = default;
};

/// Reads a line-delimited JSON file of pair records:
///
///   {"g": {"n": 3, "edges": [[0,1],[1,2]], "labels": ["C","O","C"]},
///    "g_prime": {...}, "gt_mapping": [0,2,1] | null, "gt_ged": 2 | null}
///
/// An optional first line {"vocab": [...]} fixes the label id order; without
/// it ids are assigned in order of first appearance. A graph without a
/// "labels" field is unlabeled and every node gets the label "0". Blank
/// lines are skipped. Pairs are oriented so that g is the smaller graph.
///
/// Throws ParseError naming the record index for malformed JSON or schema
/// violations and ValidationError for graph invariant violations.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in);

/// Writes the dataset (vocabulary line first) so that load_dataset returns an
/// identical Dataset. Pairs are written in their original orientation.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
void write_dataset(const Dataset& dataset, std::ostream& out);

/// Single-record helpers, shared with the CLI.
GraphPair pair_from_json(const nlohmann::json& record, LabelVocabulary& vocab);
nlohmann::json pair_to_json(const GraphPair& pair, const LabelVocabulary& vocab);
LabeledGraph graph_from_json(const nlohmann::json& node, LabelVocabulary& vocab);
nlohmann::json graph_to_json(const LabeledGraph& g, const LabelVocabulary& vocab);

}  // namespace diffged
