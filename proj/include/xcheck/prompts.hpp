#pragma once

// Prompt templates sent to the LLM. Bump kPromptVersion whenever any template
// text changes; golden files under tests/golden/prompts pin the rendered output.

#include <string>
#include <string_view>
#include <vector>

#include "xcheck/ergraph.hpp"

namespace xcheck::prompts {

inline constexpr std::string_view kPromptVersion = "er-prompts/1";

std::string graph(std::string_view text);

std::string conditional_graph(std::string_view evidence_text, const GraphTemplate& tmpl);

// Appended to a retry after the previous reply failed validation.
std::string retry_note(std::string_view violation);

struct RefineInputs {
  std::string_view prior_query;
  std::vector<std::string> failing_channels;     // e.g. "place"
  std::vector<std::string> channel_entities;     // entities standing in for those channels
  std::vector<std::string> unmatched_entities;   // claim nodes the evidence did not cover
  bool repeat_warning = false;                   // previous reply echoed prior_query
};

std::string refine_query(std::string_view claim_text, const RefineInputs& in);

}  // namespace xcheck::prompts
