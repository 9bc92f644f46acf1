#include "xcheck/graphbuild.hpp"

#include <algorithm>
#include <set>

#include "xcheck/error.hpp"
#include "xcheck/prompts.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

namespace {

using Check = std::function<std::vector<Violation>(const ERGraph&)>;

ERGraph build_loop(LlmTask task, std::string_view subject, const std::string& base_prompt,
                   LlmProvider& llm, const Check& extra, const NodeEnricher& enrich) {
  std::string last;
  for (int attempt = 1; attempt <= llm.max_retries(); ++attempt) {
    LlmRequest req{task, base_prompt, std::string(subject)};
    if (!last.empty()) req.prompt += prompts::retry_note(last);
    const auto reply = llm.complete(req);
    try {
      auto g = parse_graph(reply, subject);
      if (extra) {
        auto v = extra(g);
        if (!v.empty()) {
          last = v.front().rule + " (" + v.front().subject + "): " + v.front().message;
          continue;
        }
      }
      if (enrich) enrich(g);
      return g;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Malformed && e.code() != ErrorCode::InvariantViolation) throw;
      last = e.detail();
    }
  }
  throw Error(ErrorCode::GraphBuildExhausted,
              std::string(to_string(task)) + " gave no valid graph in " + std::to_string(llm.max_retries()) +
                  " attempts; last violation: " + last);
}

std::vector<std::string> sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
      if (!str::trim(cur).empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!str::trim(cur).empty()) out.push_back(cur);
  return out;
}

const EntityNode* counterpart(const ERGraph& g, const EntityNode& tn) {
  for (const auto& n : g.nodes) {
    if (n.id == tn.id || str::iequals(n.name, tn.name)) return &n;
  }
  return nullptr;
}

std::string clean_query(std::string_view reply) {
  for (const auto& line : str::split(reply, '\n')) {
    auto q = str::squash(line);
    while (q.size() >= 2 && (q.front() == '"' || q.front() == '\'') && q.back() == q.front()) {
      q = str::squash(std::string_view(q).substr(1, q.size() - 2));
    }
    if (!q.empty()) return q;
  }
  return {};
}

}  // namespace

ERGraph build_graph(std::string_view text, LlmProvider& llm, const NodeEnricher& enrich) {
  if (str::trim(text).empty()) throw Error(ErrorCode::Malformed, "cannot build a graph from empty text");
  return build_loop(LlmTask::BuildGraph, text, prompts::graph(text), llm, {}, enrich);
}

ERGraph build_graph_conditional(std::string_view evidence_text, const GraphTemplate& tmpl, LlmProvider& llm,
                                const NodeEnricher& enrich) {
  if (tmpl.required_nodes.empty()) throw Error(ErrorCode::EmptyGraph, "conditional build needs a template");
  if (str::trim(evidence_text).empty()) {
    throw Error(ErrorCode::Malformed, "cannot build a graph from empty text");
  }
  auto check = [&](const ERGraph& g) { return conditional_violations(g, evidence_text, tmpl); };
  return build_loop(LlmTask::BuildGraphConditional, evidence_text,
                    prompts::conditional_graph(evidence_text, tmpl), llm, check, enrich);
}

std::vector<Violation> conditional_violations(const ERGraph& g, std::string_view evidence_text,
                                              const GraphTemplate& tmpl) {
  std::vector<Violation> out;
  for (const auto& tn : tmpl.required_nodes) {
    if (!str::icontains(evidence_text, tn.name) || counterpart(g, tn)) continue;
    out.push_back({tn.id, "missing_template_node",
                   "evidence text names '" + tn.name + "' but the graph has no node for it"});
  }
  const auto sents = sentences(evidence_text);
  for (const auto& me : tmpl.masked_edges) {
    const EntityNode* ts = nullptr;
    const EntityNode* td = nullptr;
    for (const auto& n : tmpl.required_nodes) {
      if (n.id == me.src) ts = &n;
      if (n.id == me.dst) td = &n;
    }
    if (!ts || !td) continue;
    const bool connected = std::any_of(sents.begin(), sents.end(), [&](const std::string& s) {
      return str::icontains(s, ts->name) && str::icontains(s, td->name);
    });
    if (!connected) continue;
    const auto* es = counterpart(g, *ts);
    const auto* ed = counterpart(g, *td);
    const bool realized = es && ed && std::any_of(g.edges.begin(), g.edges.end(), [&](const RelationEdge& e) {
                            return (e.src == es->id && e.dst == ed->id) || (e.src == ed->id && e.dst == es->id);
                          });
    if (!realized) {
      out.push_back({me.src + "->" + me.dst, "unrealized_masked_edge",
                     "the text connects '" + ts->name + "' and '" + td->name + "' but the graph has no edge between them"});
    }
  }
  return out;
}

std::optional<EntityType> channel_entity_type(Channel c) {
  switch (c) {
    case Channel::Place: return EntityType::Location;
    case Channel::Faces: return EntityType::Person;
    case Channel::Semantic: return EntityType::Event;
    case Channel::Objects: return EntityType::Object;
    case Channel::Caption: return std::nullopt;
  }
  return std::nullopt;
}

std::string refine_search_string(std::string_view claim_text, const ERGraph& claim_graph,
                                 std::string_view prior_query, const ImageMatchResult* image_feedback,
                                 const MatchReport* text_feedback, LlmProvider& llm, double image_threshold) {
  prompts::RefineInputs in;
  in.prior_query = prior_query;
  if (image_feedback) {
    std::set<EntityType> types;
    for (auto c : image_feedback->failing_channels(image_threshold)) {
      in.failing_channels.emplace_back(to_string(c));
      if (auto t = channel_entity_type(c)) types.insert(*t);
    }
    for (const auto& n : claim_graph.nodes) {
      if (types.count(n.type)) in.channel_entities.push_back(n.name);
    }
  }
  if (text_feedback) {
    for (const auto& id : text_feedback->unmatched_claim_nodes(claim_graph)) {
      in.unmatched_entities.push_back(claim_graph.find_node(id)->name);
    }
  } else {
    for (const auto& n : claim_graph.nodes) in.unmatched_entities.push_back(n.name);
  }

  const auto prior = str::squash(prior_query);
  for (int attempt = 0; attempt < 2; ++attempt) {
    in.repeat_warning = attempt > 0;
    auto q = clean_query(llm.complete({LlmTask::RefineQuery, prompts::refine_query(claim_text, in),
                                       std::string(prior_query)}));
    if (!q.empty() && !str::iequals(q, prior)) return q;
  }
  throw Error(ErrorCode::RefinementStagnant, "search refinement kept returning \"" + prior + "\"");
}

}  // namespace xcheck
