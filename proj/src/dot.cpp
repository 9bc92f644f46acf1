#include "xcheck/dot.hpp"

#include <array>
#include <map>
#include <set>
#include <sstream>

#include "xcheck/error.hpp"

namespace xcheck {

namespace {

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf",
    "#8c564b", "#e377c2", "#bcbd22", "#7f7f7f", "#aec7e8"};
constexpr const char* kConflict = "red";

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string edge_key(const std::string& a, const std::string& b) {
  return a < b ? a + "\x1f" + b : b + "\x1f" + a;
}

}  // namespace

std::string export_dot(const ERGraph& g, const MatchReport* report, const DotOptions& opts) {
  std::set<std::string> ids;
  for (const auto& n : g.nodes) ids.insert(n.id);
  auto require = [&](const std::string& id) {
    if (!ids.count(id)) {
      throw Error(ErrorCode::DanglingReference, "annotation cites unknown node id '" + id + "'");
    }
  };

  std::map<std::string, std::string> node_color;
  std::map<std::size_t, std::string> edge_color;  // edge index in g
  std::set<std::string> red_nodes;
  std::set<std::string> red_links;

  if (report) {
    const bool claim_side = opts.role == DotRole::Claim;
    if (!claim_side && opts.evidence_index >= report->mappings.size()) {
      throw Error(ErrorCode::DanglingReference,
                  "report has no evidence graph #" + std::to_string(opts.evidence_index));
    }

    // Colors are keyed on claim node order so claim and evidence renderings agree.
    std::map<std::string, std::string> claim_color;
    std::size_t next = 0;
    for (const auto& m : report->mappings) {
      for (const auto& p : m.pairs) {
        if (!claim_color.count(p.claim_id)) {
          claim_color[p.claim_id] = kPalette[next++ % kPalette.size()];
        }
      }
    }

    if (claim_side) {
      for (const auto& m : report->mappings) {
        for (const auto& p : m.pairs) {
          require(p.claim_id);
          node_color[p.claim_id] = claim_color[p.claim_id];
        }
        for (const auto& id : m.unmatched_claim_nodes) require(id);
      }
    } else {
      for (const auto& p : report->mappings[opts.evidence_index].pairs) {
        require(p.evidence_id);
        node_color[p.evidence_id] = claim_color[p.claim_id];
      }
      for (const auto& id : report->mappings[opts.evidence_index].unmatched_evidence_nodes) {
        require(id);
      }
    }

    std::size_t verified_rank = 0;
    for (const auto& s : report->edge_statuses) {
      if (claim_side) {
        require(s.claim_edge.src);
        require(s.claim_edge.dst);
      }
      if (s.state != EdgeState::Verified) continue;
      const char* color = kPalette[(next + verified_rank++) % kPalette.size()];
      if (claim_side) {
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
          if (g.edges[e].src == s.claim_edge.src && g.edges[e].dst == s.claim_edge.dst &&
              g.edges[e].action == s.claim_edge.action) {
            edge_color[e] = color;
          }
        }
      } else if (s.evidence_index == opts.evidence_index && s.supporting_walk) {
        for (const auto& w : *s.supporting_walk) {
          require(w.src);
          require(w.dst);
          for (std::size_t e = 0; e < g.edges.size(); ++e) {
            if (g.edges[e] == w) edge_color[e] = color;
          }
        }
      }
    }

    for (const auto& c : report->conflicts) {
      if (claim_side) {
        require(c.claim_node_id);
        require(c.claim_context_node_id);
        red_nodes.insert(c.claim_node_id);
        red_links.insert(edge_key(c.claim_node_id, c.claim_context_node_id));
      } else if (c.evidence_index == opts.evidence_index) {
        require(c.evidence_node_id);
        require(c.evidence_context_node_id);
        red_nodes.insert(c.evidence_node_id);
        red_links.insert(edge_key(c.evidence_node_id, c.evidence_context_node_id));
      }
    }
  }

  std::ostringstream out;
  out << "digraph " << quote(opts.graph_name) << " {\n";
  out << "  node [shape=box, style=rounded];\n";
  for (const auto& n : g.nodes) {
    std::string label = n.name + "\n(" + std::string(to_string(n.type)) + ")";
    if (n.location) label += "\n" + format_hierarchy(*n.location);
    if (n.date) label += "\n" + format_hierarchy(*n.date);
    out << "  " << quote(n.id) << " [label=" << quote(label);
    if (red_nodes.count(n.id)) {
      out << ", color=" << kConflict << ", fontcolor=" << kConflict << ", penwidth=2";
    } else if (auto it = node_color.find(n.id); it != node_color.end()) {
      out << ", color=" << quote(it->second) << ", style=\"rounded,filled\", fillcolor="
          << quote(std::string(it->second) + "40");
    }
    out << "];\n";
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    out << "  " << quote(edge.src) << " -> " << quote(edge.dst) << " [label=" << quote(edge.action);
    if (red_links.count(edge_key(edge.src, edge.dst))) {
      out << ", color=" << kConflict << ", fontcolor=" << kConflict;
    } else if (auto it = edge_color.find(e); it != edge_color.end()) {
      out << ", color=" << quote(it->second) << ", penwidth=2";
    }
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace xcheck
