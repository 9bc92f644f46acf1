#include "xcheck/prompts.hpp"

#include "xcheck/strings.hpp"

namespace xcheck::prompts {

namespace {

constexpr std::string_view kSchema = R"(Output format: a single JSON object and nothing else.
{
  "nodes": [
    {"id": "<short snake_case id>", "name": "<entity as written>",
     "ent_type": "PERSON|ORG|LOCATION|DATE|EVENT|OBJECT|MISC",
     "description": "<one sentence on who or what this is, in context>",
     "location_data": {"city": "...", "state": "...", "country": "..."},
     "date_data": {"day": 1, "month": 1, "year": 2000}}
  ],
  "edges": [
    {"src": "<node id>", "dst": "<node id>",
     "action": "<verb phrase taken from the text>",
     "action_description": "<what the action means, in your own words>"}
  ]
}
Graph conditions:
- location_data only on LOCATION nodes and on every LOCATION node; date_data only on DATE nodes and on every DATE node.
- Unknown hierarchy levels are written "UNK". Never leave every level UNK.
- Every edge joins two different existing node ids. No duplicate (src, dst, action).
- Every LOCATION and DATE node is attached to at least one edge.
- Use the actual action words from the text; do not invent relations the text does not state.)";

constexpr std::string_view kGraphExample = R"(Example.
Text: "Severe floods hit the village of Lostwithiel in Cornwall on 5 June 2013; residents fled."
{"nodes": [
  {"id": "floods", "name": "Severe floods", "ent_type": "EVENT", "description": "flooding after heavy rain"},
  {"id": "lostwithiel", "name": "Lostwithiel", "ent_type": "LOCATION", "description": "a village in Cornwall",
   "location_data": {"city": "Lostwithiel", "state": "Cornwall", "country": "UK"}},
  {"id": "june_5_2013", "name": "5 June 2013", "ent_type": "DATE", "description": "the day of the floods",
   "date_data": {"day": 5, "month": 6, "year": 2013}},
  {"id": "residents", "name": "Residents", "ent_type": "MISC", "description": "people living in the village"}],
 "edges": [
  {"src": "floods", "dst": "lostwithiel", "action": "hit", "action_description": "struck and damaged the area"},
  {"src": "floods", "dst": "june_5_2013", "action": "hit on", "action_description": "happened on that day"},
  {"src": "residents", "dst": "floods", "action": "fled", "action_description": "escaped from the danger"}]})";

}  // namespace

std::string graph(std::string_view text) {
  std::string p;
  p += "[" + std::string(kPromptVersion) + " build_graph]\n";
  p += "You turn a short news text into an entity-relationship graph.\n";
  p += "Nodes are the named entities of the text: people, organisations, places, dates, events, "
       "notable objects. Edges are the actions that connect two entities in the text.\n\n";
  p += kSchema;
  p += "\n\n";
  p += kGraphExample;
  p += "\n\nText: \"" + std::string(text) + "\"\n";
  return p;
}

std::string conditional_graph(std::string_view evidence_text, const GraphTemplate& tmpl) {
  std::string p;
  p += "[" + std::string(kPromptVersion) + " build_graph_conditional]\n";
  p += "You turn an evidence text into an entity-relationship graph that can be compared with a "
       "reference graph.\n";
  p += "Reference nodes: reuse the same id for every reference node that the evidence text "
       "mentions, with hierarchy data as stated by the evidence text (not the reference).\n";
  p += "Masked edges: for every masked pair whose two entities the evidence text connects, add "
       "the edge with the action and description the evidence text supports. Skip pairs the "
       "text does not connect.\n";
  p += "You may add further nodes and edges found only in the evidence text.\n\n";
  p += kSchema;
  p += "\n\nReference graph with masked actions:\n";
  p += to_json(tmpl).dump(2);
  p += "\n\nEvidence text: \"" + std::string(evidence_text) + "\"\n";
  return p;
}

std::string retry_note(std::string_view violation) {
  return "\nYour previous answer was rejected: " + std::string(violation) +
         "\nReturn the corrected JSON object only.\n";
}

std::string refine_query(std::string_view claim_text, const RefineInputs& in) {
  std::string p;
  p += "[" + std::string(kPromptVersion) + " refine_query]\n";
  p += "A web search for news images matching a claim did not find the same image.\n";
  p += "Claim: \"" + std::string(claim_text) + "\"\n";
  p += "Previous search string: \"" + std::string(in.prior_query) + "\"\n";
  if (!in.failing_channels.empty()) {
    p += "Image aspects that did not match: " + str::join(in.failing_channels, ", ") + "\n";
  }
  if (!in.channel_entities.empty()) {
    p += "Claim entities for those aspects: " + str::join(in.channel_entities, "; ") + "\n";
  }
  if (!in.unmatched_entities.empty()) {
    p += "Claim entities the found text did not cover: " + str::join(in.unmatched_entities, "; ") + "\n";
  }
  p += "Write a new search string, in the style of a news headline, that puts these entities "
       "first. Reply with the search string only, on one line.\n";
  if (in.repeat_warning) p += "Do not repeat the previous search string.\n";
  return p;
}

}  // namespace xcheck::prompts
