#include "xcheck/graphmatch.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "xcheck/error.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

using nlohmann::json;

namespace {

// Upper bound on alternative walks examined per claim edge.
constexpr std::size_t kMaxWalks = 4096;

struct Adjacent {
  std::size_t edge;
  std::size_t neighbor;
};

std::vector<std::vector<Adjacent>> undirected_adjacency(const ERGraph& g) {
  std::vector<std::vector<Adjacent>> adj(g.nodes.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto s = g.index_of(g.edges[e].src);
    auto d = g.index_of(g.edges[e].dst);
    if (!s || !d || *s == *d) continue;
    adj[*s].push_back({e, *d});
    adj[*d].push_back({e, *s});
  }
  return adj;
}

// All simple walks from `from` to `to` with at most `max_len` edges, ordered
// shortest first, then by edge indices.
std::vector<std::vector<std::size_t>> simple_walks(const std::vector<std::vector<Adjacent>>& adj,
                                                   std::size_t from, std::size_t to,
                                                   std::size_t max_len) {
  std::vector<std::vector<std::size_t>> walks;
  std::vector<std::size_t> path;
  std::vector<char> on_path(adj.size(), 0);
  std::function<void(std::size_t)> dfs = [&](std::size_t node) {
    if (walks.size() >= kMaxWalks) return;
    if (node == to) {
      walks.push_back(path);
      return;
    }
    if (path.size() >= max_len) return;
    for (const auto& a : adj[node]) {
      if (on_path[a.neighbor]) continue;
      on_path[a.neighbor] = 1;
      path.push_back(a.edge);
      dfs(a.neighbor);
      path.pop_back();
      on_path[a.neighbor] = 0;
    }
  };
  on_path[from] = 1;
  dfs(from);
  std::stable_sort(walks.begin(), walks.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return walks;
}

std::vector<std::size_t> context_nodes(const ERGraph& g, std::size_t center, EntityType type,
                                       const std::vector<std::vector<Adjacent>>& adj) {
  std::set<std::size_t> ego{center};
  for (const auto& a : adj[center]) ego.insert(a.neighbor);
  std::vector<std::size_t> out;
  for (std::size_t i : ego) {  // std::set iterates in node order
    if (g.nodes[i].type == type) out.push_back(i);
  }
  return out;
}

int state_rank(EdgeState s) {
  switch (s) {
    case EdgeState::Verified: return 2;
    case EdgeState::Dissimilar: return 1;
    case EdgeState::Unconnected: return 0;
  }
  return 0;
}

json context_json(const ContextTuple& c) {
  return std::visit([](const auto& v) { return to_json(v); }, c);
}

}  // namespace

void MatchConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig, std::string(name) + " must lie in [0, 1]");
    }
  };
  unit(node_threshold, "node_threshold");
  unit(edge_threshold, "edge_threshold");
  unit(edge_support_threshold, "edge_support_threshold");
  if (max_walk_length < 1) throw Error(ErrorCode::InvalidConfig, "max_walk_length must be >= 1");
}

const NodePair* NodeMapping::for_claim(std::string_view claim_id) const {
  for (const auto& p : pairs) {
    if (p.claim_id == claim_id) return &p;
  }
  return nullptr;
}

std::string_view to_string(ConflictType t) {
  return t == ConflictType::Location ? "LOCATION" : "DATE";
}

std::string format_context(const ContextTuple& c) {
  return std::visit([](const auto& v) { return format_hierarchy(v); }, c);
}

std::string_view to_string(EdgeState s) {
  switch (s) {
    case EdgeState::Verified: return "VERIFIED";
    case EdgeState::Unconnected: return "UNCONNECTED";
    case EdgeState::Dissimilar: return "DISSIMILAR";
  }
  return "UNCONNECTED";
}

std::size_t MatchReport::verified_count() const {
  return static_cast<std::size_t>(
      std::count_if(edge_statuses.begin(), edge_statuses.end(),
                    [](const EdgeStatus& s) { return s.state == EdgeState::Verified; }));
}

std::vector<std::string> MatchReport::unmatched_claim_nodes(const ERGraph& claim) const {
  std::vector<std::string> out;
  for (const auto& n : claim.nodes) {
    bool mapped = std::any_of(mappings.begin(), mappings.end(),
                              [&](const NodeMapping& m) { return m.for_claim(n.id) != nullptr; });
    if (!mapped) out.push_back(n.id);
  }
  return out;
}

bool match_decision(std::size_t conflicts, double support_fraction, std::size_t claim_edges,
                    const MatchConfig& cfg) {
  if (claim_edges == 0) return false;
  return conflicts <= cfg.conflict_tolerance && support_fraction >= cfg.edge_support_threshold;
}

assignment::Matrix node_similarity(const ERGraph& claim, const ERGraph& evidence,
                                   EmbeddingProvider& embedder) {
  std::vector<std::string> texts;
  texts.reserve(claim.nodes.size() + evidence.nodes.size());
  for (const auto& n : claim.nodes) texts.push_back(node_text(n));
  for (const auto& n : evidence.nodes) texts.push_back(node_text(n));
  auto emb = embedder.embed_batch(texts);

  // Only the cross-graph block is materialized: intra-graph pairs are masked
  // out of the assignment entirely.
  const std::size_t nc = claim.nodes.size();
  assignment::Matrix sim(nc, std::vector<double>(evidence.nodes.size(), 0.0));
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < evidence.nodes.size(); ++j) {
      sim[i][j] = cosine(emb[i], emb[nc + j]);
    }
  }
  return sim;
}

NodeMapping map_nodes_from_similarity(const ERGraph& claim, const ERGraph& evidence,
                                      const assignment::Matrix& similarity,
                                      const MatchConfig& cfg) {
  const std::size_t nc = claim.nodes.size();
  const std::size_t ne = evidence.nodes.size();
  if (similarity.size() != nc || (nc && similarity.front().size() != ne)) {
    throw Error(ErrorCode::DimMismatch, "similarity matrix shape does not match the graphs");
  }

  // Below-threshold entries become weight 0, which the solver treats as
  // "no edge", so they can never be part of the reported mapping.
  assignment::Matrix weights(nc, std::vector<double>(ne, 0.0));
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < ne; ++j) {
      const double s = similarity[i][j];
      weights[i][j] = (s >= cfg.node_threshold && s > 0.0) ? s : 0.0;
    }
  }
  auto solved = assignment::max_weight_lexicographic(weights);

  NodeMapping m;
  std::vector<char> evidence_used(ne, 0);
  for (std::size_t i = 0; i < nc; ++i) {
    const int j = solved.row_to_col[i];
    if (j < 0) {
      m.unmatched_claim_nodes.push_back(claim.nodes[i].id);
      continue;
    }
    evidence_used[static_cast<std::size_t>(j)] = 1;
    m.pairs.push_back({claim.nodes[i].id, evidence.nodes[static_cast<std::size_t>(j)].id,
                       similarity[i][static_cast<std::size_t>(j)]});
  }
  for (std::size_t j = 0; j < ne; ++j) {
    if (!evidence_used[j]) m.unmatched_evidence_nodes.push_back(evidence.nodes[j].id);
  }
  return m;
}

NodeMapping map_nodes(const ERGraph& claim, const ERGraph& evidence, EmbeddingProvider& embedder,
                      const MatchConfig& cfg) {
  return map_nodes_from_similarity(claim, evidence, node_similarity(claim, evidence, embedder), cfg);
}

std::vector<ConflictRecord> find_conflict(const ERGraph& claim, const ERGraph& evidence,
                                          const NodeMapping& mapping, ConflictType type) {
  const EntityType ent = type == ConflictType::Location ? EntityType::Location : EntityType::Date;
  const auto claim_adj = undirected_adjacency(claim);
  const auto evidence_adj = undirected_adjacency(evidence);

  auto context_of = [&](const EntityNode& n) -> ContextTuple {
    if (type == ConflictType::Location) return n.location.value_or(LocationData{});
    return n.date.value_or(DateData{});
  };
  auto agree = [&](const EntityNode& a, const EntityNode& b) {
    if (type == ConflictType::Location) {
      return compatible(a.location.value_or(LocationData{}), b.location.value_or(LocationData{}));
    }
    return compatible(a.date.value_or(DateData{}), b.date.value_or(DateData{}));
  };

  std::vector<ConflictRecord> out;
  for (const auto& pair : mapping.pairs) {
    auto ci = claim.index_of(pair.claim_id);
    auto ei = evidence.index_of(pair.evidence_id);
    if (!ci || !ei) continue;
    auto claim_ctx = context_nodes(claim, *ci, ent, claim_adj);
    auto evidence_ctx = context_nodes(evidence, *ei, ent, evidence_adj);
    if (claim_ctx.empty() || evidence_ctx.empty()) continue;

    bool consistent = false;
    for (std::size_t a : claim_ctx) {
      for (std::size_t b : evidence_ctx) {
        consistent = consistent || agree(claim.nodes[a], evidence.nodes[b]);
      }
    }
    if (consistent) continue;

    const auto& cn = claim.nodes[claim_ctx.front()];
    const auto& en = evidence.nodes[evidence_ctx.front()];
    ConflictRecord r;
    r.claim_node_id = pair.claim_id;
    r.evidence_node_id = pair.evidence_id;
    r.type = type;
    r.claim_context = context_of(cn);
    r.evidence_context = context_of(en);
    r.claim_context_node_id = cn.id;
    r.evidence_context_node_id = en.id;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EdgeStatus> find_support(const ERGraph& claim, const ERGraph& evidence,
                                     const NodeMapping& mapping, EmbeddingProvider& embedder,
                                     const MatchConfig& cfg) {
  const auto adj = undirected_adjacency(evidence);
  std::vector<EdgeStatus> out;
  out.reserve(claim.edges.size());

  for (const auto& ce : claim.edges) {
    EdgeStatus status;
    status.claim_edge = ce;
    const NodePair* a = mapping.for_claim(ce.src);
    const NodePair* b = mapping.for_claim(ce.dst);
    auto ai = a ? evidence.index_of(a->evidence_id) : std::nullopt;
    auto bi = b ? evidence.index_of(b->evidence_id) : std::nullopt;
    if (!ai || !bi || *ai == *bi) {
      out.push_back(std::move(status));
      continue;
    }
    auto walks = simple_walks(adj, *ai, *bi, cfg.max_walk_length);
    if (walks.empty()) {
      out.push_back(std::move(status));
      continue;
    }

    const Embedding claim_action = embedder.embed(ce.action);
    auto collate = [&](const std::vector<std::size_t>& walk) {
      std::vector<std::string> actions;
      for (std::size_t e : walk) actions.push_back(evidence.edges[e].action);
      return str::join(actions, " ");
    };
    auto walk_edges = [&](const std::vector<std::size_t>& walk) {
      std::vector<RelationEdge> edges;
      for (std::size_t e : walk) edges.push_back(evidence.edges[e]);
      return edges;
    };

    // The shortest walk decides first; longer walks can still verify the
    // edge, so extra evidence edges never lower support.
    status.state = EdgeState::Dissimilar;
    status.supporting_walk = walk_edges(walks.front());
    status.walk_similarity = cosine(claim_action, embedder.embed(collate(walks.front())));
    if (*status.walk_similarity >= cfg.edge_threshold) {
      status.state = EdgeState::Verified;
    } else {
      for (std::size_t w = 1; w < walks.size(); ++w) {
        const double s = cosine(claim_action, embedder.embed(collate(walks[w])));
        if (s >= cfg.edge_threshold) {
          status.state = EdgeState::Verified;
          status.supporting_walk = walk_edges(walks[w]);
          status.walk_similarity = s;
          break;
        }
      }
    }
    out.push_back(std::move(status));
  }
  return out;
}

MatchReport graph_match(const ERGraph& claim, std::span<const ERGraph> evidence,
                        EmbeddingProvider& embedder, const MatchConfig& cfg) {
  cfg.validate();
  MatchReport report;
  report.edge_statuses.resize(claim.edges.size());
  for (std::size_t i = 0; i < claim.edges.size(); ++i) {
    report.edge_statuses[i].claim_edge = claim.edges[i];
  }

  for (std::size_t k = 0; k < evidence.size(); ++k) {
    const ERGraph& ev = evidence[k];
    auto mapping = map_nodes(claim, ev, embedder, cfg);
    for (auto type : {ConflictType::Location, ConflictType::Date}) {
      for (auto& c : find_conflict(claim, ev, mapping, type)) {
        c.evidence_index = k;
        report.conflicts.push_back(std::move(c));
      }
    }
    auto statuses = find_support(claim, ev, mapping, embedder, cfg);
    for (std::size_t i = 0; i < statuses.size(); ++i) {
      auto& current = report.edge_statuses[i];
      auto& candidate = statuses[i];
      candidate.evidence_index = k;
      const int cr = state_rank(candidate.state);
      const int br = state_rank(current.state);
      const bool better =
          cr > br || (cr == br && candidate.walk_similarity.value_or(-2.0) >
                                      current.walk_similarity.value_or(-2.0));
      if (better) current = std::move(candidate);
    }
    report.mappings.push_back(std::move(mapping));
  }

  const std::size_t n_edges = claim.edges.size();
  report.support_fraction =
      n_edges == 0 ? 0.0 : static_cast<double>(report.verified_count()) / static_cast<double>(n_edges);
  report.matched = match_decision(report.conflicts.size(), report.support_fraction, n_edges, cfg);
  return report;
}

json to_json(const MatchConfig& cfg) {
  return json{{"node_threshold", cfg.node_threshold},
              {"edge_threshold", cfg.edge_threshold},
              {"edge_support_threshold", cfg.edge_support_threshold},
              {"conflict_tolerance", cfg.conflict_tolerance},
              {"max_walk_length", cfg.max_walk_length}};
}

MatchConfig match_config_from_json(const json& j, MatchConfig base) {
  base.node_threshold = j.value("node_threshold", base.node_threshold);
  base.edge_threshold = j.value("edge_threshold", base.edge_threshold);
  base.edge_support_threshold = j.value("edge_support_threshold", base.edge_support_threshold);
  base.conflict_tolerance = j.value("conflict_tolerance", base.conflict_tolerance);
  base.max_walk_length = j.value("max_walk_length", base.max_walk_length);
  base.validate();
  return base;
}

json to_json(const NodeMapping& m) {
  json pairs = json::array();
  for (const auto& p : m.pairs) {
    pairs.push_back({{"claim_node", p.claim_id}, {"evidence_node", p.evidence_id},
                     {"similarity", p.similarity}});
  }
  return json{{"pairs", std::move(pairs)},
              {"unmatched_claim_nodes", m.unmatched_claim_nodes},
              {"unmatched_evidence_nodes", m.unmatched_evidence_nodes}};
}

json to_json(const ConflictRecord& c) {
  return json{{"claim_node", c.claim_node_id},
              {"evidence_node", c.evidence_node_id},
              {"conflict_type", std::string(to_string(c.type))},
              {"claim_context", context_json(c.claim_context)},
              {"evidence_context", context_json(c.evidence_context)},
              {"claim_context_node", c.claim_context_node_id},
              {"evidence_context_node", c.evidence_context_node_id},
              {"evidence_index", c.evidence_index}};
}

json to_json(const EdgeStatus& s) {
  json j{{"claim_edge",
          {{"src", s.claim_edge.src}, {"dst", s.claim_edge.dst}, {"action", s.claim_edge.action}}},
         {"status", std::string(to_string(s.state))},
         {"evidence_index", s.evidence_index}};
  if (s.supporting_walk) {
    json walk = json::array();
    for (const auto& e : *s.supporting_walk) {
      walk.push_back({{"src", e.src}, {"dst", e.dst}, {"action", e.action}});
    }
    j["supporting_walk"] = std::move(walk);
  }
  if (s.walk_similarity) j["walk_similarity"] = *s.walk_similarity;
  return j;
}

json to_json(const MatchReport& r) {
  json mappings = json::array();
  for (const auto& m : r.mappings) mappings.push_back(to_json(m));
  json conflicts = json::array();
  for (const auto& c : r.conflicts) conflicts.push_back(to_json(c));
  json edges = json::array();
  for (const auto& s : r.edge_statuses) edges.push_back(to_json(s));
  return json{{"mappings", std::move(mappings)},
              {"conflicts", std::move(conflicts)},
              {"edge_statuses", std::move(edges)},
              {"support_fraction", r.support_fraction},
              {"matched", r.matched}};
}

}  // namespace xcheck
