#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "xcheck/assignment.hpp"
#include "xcheck/ergraph.hpp"
#include "xcheck/textembed.hpp"

namespace xcheck {

struct MatchConfig {
  double node_threshold = 0.8;
  double edge_threshold = 0.5;
  double edge_support_threshold = 0.3;
  std::size_t conflict_tolerance = 0;
  std::size_t max_walk_length = 4;

  // Throws Error{InvalidConfig}.
  void validate() const;
};

struct NodePair {
  std::string claim_id;
  std::string evidence_id;
  double similarity = 0.0;
};

struct NodeMapping {
  std::vector<NodePair> pairs;
  std::vector<std::string> unmatched_claim_nodes;
  std::vector<std::string> unmatched_evidence_nodes;

  const NodePair* for_claim(std::string_view claim_id) const;
};

enum class ConflictType { Location, Date };
std::string_view to_string(ConflictType t);

using ContextTuple = std::variant<LocationData, DateData>;
std::string format_context(const ContextTuple& c);

struct ConflictRecord {
  std::string claim_node_id;
  std::string evidence_node_id;
  ConflictType type = ConflictType::Location;
  ContextTuple claim_context;
  ContextTuple evidence_context;
  // The context nodes whose hierarchies disagree.
  std::string claim_context_node_id;
  std::string evidence_context_node_id;
  std::size_t evidence_index = 0;
};

enum class EdgeState { Verified, Unconnected, Dissimilar };
std::string_view to_string(EdgeState s);

struct EdgeStatus {
  RelationEdge claim_edge;
  EdgeState state = EdgeState::Unconnected;
  std::optional<std::vector<RelationEdge>> supporting_walk;  // evidence edges in walk order
  std::optional<double> walk_similarity;
  std::size_t evidence_index = 0;
};

// Outcome of matching one claim graph against one or more evidence graphs.
// `mappings[k]` is the node mapping against evidence graph k.
struct MatchReport {
  std::vector<NodeMapping> mappings;
  std::vector<ConflictRecord> conflicts;
  std::vector<EdgeStatus> edge_statuses;
  double support_fraction = 0.0;
  bool matched = false;

  std::size_t verified_count() const;
  // Claim node ids not mapped in any evidence graph, in claim order.
  std::vector<std::string> unmatched_claim_nodes(const ERGraph& claim) const;
};

// The match rule: conflicts within tolerance and enough claim edges verified.
// A claim without edges never matches.
bool match_decision(std::size_t conflicts, double support_fraction, std::size_t claim_edges,
                    const MatchConfig& cfg);

// Cross-graph similarity: rows are claim nodes, columns evidence nodes, each
// entry the cosine of the "name. description" embeddings.
assignment::Matrix node_similarity(const ERGraph& claim, const ERGraph& evidence,
                                   EmbeddingProvider& embedder);

// Thresholded assignment over a precomputed similarity matrix. Entries below
// cfg.node_threshold are masked out; ties resolve to the lowest
// (claim index, evidence index).
NodeMapping map_nodes_from_similarity(const ERGraph& claim, const ERGraph& evidence,
                                      const assignment::Matrix& similarity,
                                      const MatchConfig& cfg);

NodeMapping map_nodes(const ERGraph& claim, const ERGraph& evidence, EmbeddingProvider& embedder,
                      const MatchConfig& cfg);

std::vector<ConflictRecord> find_conflict(const ERGraph& claim, const ERGraph& evidence,
                                          const NodeMapping& mapping, ConflictType type);

std::vector<EdgeStatus> find_support(const ERGraph& claim, const ERGraph& evidence,
                                     const NodeMapping& mapping, EmbeddingProvider& embedder,
                                     const MatchConfig& cfg);

MatchReport graph_match(const ERGraph& claim, std::span<const ERGraph> evidence,
                        EmbeddingProvider& embedder, const MatchConfig& cfg);

inline MatchReport graph_match(const ERGraph& claim, const ERGraph& evidence,
                               EmbeddingProvider& embedder, const MatchConfig& cfg) {
  return graph_match(claim, std::span<const ERGraph>(&evidence, 1), embedder, cfg);
}

nlohmann::json to_json(const MatchConfig& cfg);
MatchConfig match_config_from_json(const nlohmann::json& j, MatchConfig base = {});
nlohmann::json to_json(const NodeMapping& m);
nlohmann::json to_json(const ConflictRecord& c);
nlohmann::json to_json(const EdgeStatus& s);
nlohmann::json to_json(const MatchReport& r);

}  // namespace xcheck
