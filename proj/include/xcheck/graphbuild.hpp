#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "xcheck/ergraph.hpp"
#include "xcheck/graphmatch.hpp"
#include "xcheck/imagematch.hpp"
#include "xcheck/llm.hpp"

namespace xcheck {

// Optional post-processing of a validated graph, e.g. attaching knowledge-base
// facts to node descriptions. Off unless supplied.
using NodeEnricher = std::function<void(ERGraph&)>;

// Prompts until the reply parses into a valid graph, re-prompting with the
// violation appended. At most llm.max_retries() calls. Throws
// GraphBuildExhausted (carrying the last violation) or ProviderUnavailable.
ERGraph build_graph(std::string_view text, LlmProvider& llm, const NodeEnricher& enrich = {});

// Evidence graph steered by the claim template. Beyond the usual graph rules,
// a reply is rejected when it drops a template node the evidence text names,
// or leaves out a masked pair the text connects within one sentence.
ERGraph build_graph_conditional(std::string_view evidence_text, const GraphTemplate& tmpl,
                                LlmProvider& llm, const NodeEnricher& enrich = {});

// The template-specific checks used by build_graph_conditional.
std::vector<Violation> conditional_violations(const ERGraph& g, std::string_view evidence_text,
                                              const GraphTemplate& tmpl);

// Entity types standing in for an image channel when refining a query.
std::optional<EntityType> channel_entity_type(Channel c);

// Asks the LLM for a new search string built from the claim entities behind
// failing image channels and the claim nodes the evidence left unmatched.
// Either feedback may be null. Throws RefinementStagnant when two replies in a
// row are empty or repeat prior_query.
std::string refine_search_string(std::string_view claim_text, const ERGraph& claim_graph,
                                 std::string_view prior_query, const ImageMatchResult* image_feedback,
                                 const MatchReport* text_feedback, LlmProvider& llm,
                                 double image_threshold = 0.9);

}  // namespace xcheck
