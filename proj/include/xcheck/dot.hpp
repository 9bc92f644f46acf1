#pragma once

#include <cstddef>
#include <string>

#include "xcheck/ergraph.hpp"
#include "xcheck/graphmatch.hpp"

namespace xcheck {

// Which side of a MatchReport the exported graph plays.
enum class DotRole { Claim, Evidence };

struct DotOptions {
  DotRole role = DotRole::Claim;
  std::size_t evidence_index = 0;  // used when role == Evidence
  std::string graph_name = "G";
};

// Graphviz rendering. With a report, each matched node pair (and each claim
// edge with the walk that verified it) shares a palette color; conflicted
// nodes and the edges tying them to their conflicting context are red.
// Throws Error{DanglingReference} when the report cites ids missing from `g`.
std::string export_dot(const ERGraph& g, const MatchReport* report = nullptr,
                       const DotOptions& opts = {});

}  // namespace xcheck
