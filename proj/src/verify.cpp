#include "xcheck/verify.hpp"

#include <sstream>

#include "xcheck/error.hpp"
#include "xcheck/graphbuild.hpp"
#include "xcheck/retrieval.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

using nlohmann::json;

std::string_view to_string(Code c) {
  switch (c) {
    case Code::XvSupports: return "XV_SUPPORTS";
    case Code::XvOoc: return "XV_OOC";
    case Code::XvNs: return "XV_NS";
    case Code::XtSupports: return "XT_SUPPORTS";
    case Code::XtNs: return "XT_NS";
    case Code::XtConflicts: return "XT_CONFLICTS";
  }
  return "XV_NS";
}

std::string_view to_string(Label l) { return l == Label::Pristine ? "PRISTINE" : "FAKE"; }

std::optional<Label> parse_label(std::string_view s) {
  if (str::iequals(s, "pristine")) return Label::Pristine;
  if (str::iequals(s, "fake")) return Label::Fake;
  return std::nullopt;
}

void VerifyConfig::validate() const {
  match.validate();
  image.validate();
}

Decision decide(const Signals& s, const VerifyConfig& cfg) {
  Decision d;
  if (s.m_vt) {
    if (s.m_v) {
      d.codes.push_back(Code::XvSupports);
      d.verified = true;
    } else {
      d.codes.push_back(Code::XvOoc);
    }
  } else {
    d.codes.push_back(Code::XvNs);
  }
  if (s.m_t) {
    d.codes.push_back(Code::XtSupports);
    const bool vetoed = cfg.ooc_vetoes_xt && s.m_vt && !s.m_v;
    if (!vetoed) d.verified = true;
  } else {
    d.codes.push_back(Code::XtNs);
  }
  if (s.c_t) {
    d.codes.push_back(Code::XtConflicts);
    d.verified = false;
  }
  if (cfg.strict_vt_conflicts && s.c_vt) d.verified = false;
  return d;
}

namespace {

Signals signals_of(const Verdict& v, const VerifyConfig& cfg) {
  Signals s;
  s.m_vt = v.xv_text && v.xv_text->matched;
  s.m_v = v.image && v.image->matched;
  s.m_t = v.xt && v.xt->matched;
  s.c_t = v.xt && v.xt->conflicts.size() > cfg.match.conflict_tolerance;
  s.c_vt = v.xv_text && v.xv_text->conflicts.size() > cfg.match.conflict_tolerance;
  return s;
}

void apply(Verdict& v, const VerifyConfig& cfg) {
  v.signals = signals_of(v, cfg);
  auto d = decide(v.signals, cfg);
  v.verified = d.verified;
  v.codes = std::move(d.codes);
  v.label = v.verified ? Label::Pristine : Label::Fake;
}

std::string evidence_error(const std::string& what, const Error& e) {
  return "EVIDENCE_ERROR: " + what + ": " + e.detail();
}

// Conditional graphs for every usable evidence text; index i of the result
// corresponds to the i-th returned item position.
struct BuiltGraphs {
  std::vector<ERGraph> graphs;
  std::vector<std::size_t> item_index;
};

BuiltGraphs build_evidence_graphs(const std::vector<EvidenceItem>& items, const ERGraph& claim, LlmProvider& llm,
                                  std::vector<std::string>& annotations) {
  BuiltGraphs out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& text = items[i].contextual_text;
    if (!text || str::trim(*text).empty()) continue;
    try {
      out.graphs.push_back(evidence_graph(*text, claim, llm));
      out.item_index.push_back(i);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GraphBuildExhausted) throw;
      annotations.push_back(evidence_error(items[i].source_url, e));
    }
  }
  return out;
}

}  // namespace

Decision rederive(const Verdict& v, const VerifyConfig& cfg) { return decide(signals_of(v, cfg), cfg); }

Verdict verify_claim(std::string_view claim_text, const VisualFeatureBundle& claim_bundle,
                     const std::vector<EvidenceItem>& visual_evidence,
                     const std::vector<EvidenceItem>& text_evidence, LlmProvider& llm,
                     EmbeddingProvider& embedder, const VerifyConfig& cfg, const ERGraph* claim_graph) {
  cfg.validate();
  Verdict v;
  try {
    v.claim_graph = claim_graph ? *claim_graph : build_graph(claim_text, llm);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::GraphBuildExhausted) throw;
    v.annotations.push_back(evidence_error("claim", e));
    return v;
  }
  const ERGraph& claim = *v.claim_graph;

  auto vt = build_evidence_graphs(visual_evidence, claim, llm, v.annotations);
  auto te = build_evidence_graphs(text_evidence, claim, llm, v.annotations);
  v.xv_text = graph_match(claim, vt.graphs, embedder, cfg.match);
  v.xt = graph_match(claim, te.graphs, embedder, cfg.match);

  // Rank visual evidence; the text score of each item is its own match against the claim.
  std::vector<VisualScore> scores;
  for (std::size_t i = 0; i < visual_evidence.size(); ++i) {
    const auto& item = visual_evidence[i];
    VisualScore s;
    s.url = item.source_url;
    if (visual_evidence.size() > 1) {
      for (std::size_t g = 0; g < vt.item_index.size(); ++g) {
        if (vt.item_index[g] == i) s.support_fraction = graph_match(claim, vt.graphs[g], embedder, cfg.match).support_fraction;
      }
      if (item.feature_bundle) {
        auto r = image_match(claim_bundle, *item.feature_bundle, cfg.image);
        s.channels_passed = r.channels_passed;
        s.mean_score = r.mean_score();
      }
    }
    scores.push_back(std::move(s));
  }
  if (auto best = select_best_visual(scores)) {
    const auto& item = visual_evidence[*best];
    v.best_visual_url = item.source_url;
    if (item.feature_bundle) v.image = image_match(claim_bundle, *item.feature_bundle, cfg.image);
  }

  apply(v, cfg);
  return v;
}

json to_json(const VerifyConfig& c) {
  return json{{"strict_vt_conflicts", c.strict_vt_conflicts}, {"ooc_vetoes_xt", c.ooc_vetoes_xt}};
}

VerifyConfig verify_config_from_json(const json& j, VerifyConfig base) {
  base.strict_vt_conflicts = j.value("strict_vt_conflicts", base.strict_vt_conflicts);
  base.ooc_vetoes_xt = j.value("ooc_vetoes_xt", base.ooc_vetoes_xt);
  return base;
}

json to_json(const Verdict& v) {
  json codes = json::array();
  for (auto c : v.codes) codes.push_back(std::string(to_string(c)));
  json j{{"verified", v.verified},
         {"label", std::string(to_string(v.label))},
         {"codes", std::move(codes)},
         {"signals",
          {{"m_vt", v.signals.m_vt},
           {"m_v", v.signals.m_v},
           {"m_t", v.signals.m_t},
           {"c_t", v.signals.c_t},
           {"c_vt", v.signals.c_vt}}}};
  j["image"] = v.image ? to_json(*v.image) : json("ABSENT");
  j["xv_text"] = v.xv_text ? to_json(*v.xv_text) : json("ABSENT");
  j["xt"] = v.xt ? to_json(*v.xt) : json("ABSENT");
  j["best_visual_url"] = v.best_visual_url ? json(*v.best_visual_url) : json(nullptr);
  j["claim_graph"] = v.claim_graph ? to_json(*v.claim_graph) : json(nullptr);
  j["annotations"] = v.annotations;
  return j;
}

namespace {

std::string node_name(const ERGraph& g, const std::string& id) {
  if (const auto* n = g.find_node(id)) return n->name;
  return id;
}

void render_report(std::ostringstream& out, const std::string& title, const MatchReport& r, const ERGraph& claim) {
  out << "\n## " << title << "\n\n";
  out << "support " << r.verified_count() << "/" << r.edge_statuses.size() << " edges ("
      << r.support_fraction << "), " << r.conflicts.size() << " conflict(s), "
      << (r.matched ? "matched" : "not matched") << "\n";
  std::vector<std::string> mapped;
  for (std::size_t k = 0; k < r.mappings.size(); ++k) {
    for (const auto& p : r.mappings[k].pairs) {
      std::ostringstream s;
      s << "- " << node_name(claim, p.claim_id) << " -> evidence " << k << " `" << p.evidence_id << "` ("
        << p.similarity << ")";
      mapped.push_back(s.str());
    }
  }
  if (!mapped.empty()) {
    out << "\nMatched nodes:\n";
    for (const auto& m : mapped) out << m << "\n";
  }
  if (!r.edge_statuses.empty()) {
    out << "\n| claim edge | state | walk |\n|---|---|---|\n";
    for (const auto& s : r.edge_statuses) {
      out << "| " << node_name(claim, s.claim_edge.src) << " -" << s.claim_edge.action << "-> "
          << node_name(claim, s.claim_edge.dst) << " | " << to_string(s.state) << " | ";
      if (s.supporting_walk) {
        std::vector<std::string> actions;
        for (const auto& e : *s.supporting_walk) actions.push_back(e.action);
        out << str::join(actions, ", ");
        if (s.walk_similarity) out << " (" << *s.walk_similarity << ")";
      }
      out << " |\n";
    }
  }
  for (const auto& c : r.conflicts) {
    out << "\nConflict (" << to_string(c.type) << "): " << node_name(claim, c.claim_node_id) << " "
        << format_context(c.claim_context) << " vs evidence " << c.evidence_index << " `" << c.evidence_node_id
        << "` " << format_context(c.evidence_context) << "\n";
  }
}

}  // namespace

std::string render_markdown(const Verdict& v) {
  std::ostringstream out;
  std::vector<std::string> codes;
  for (auto c : v.codes) codes.push_back(std::string(to_string(c)));
  out << "# Verdict: " << to_string(v.label) << "\n\n";
  out << "Codes: " << (codes.empty() ? "none" : str::join(codes, ", ")) << "\n";
  for (const auto& a : v.annotations) out << "\n> " << a << "\n";
  if (v.image) {
    out << "\n## Image\n\n";
    if (v.best_visual_url) out << "Compared with " << *v.best_visual_url << "\n\n";
    out << "| channel | score |\n|---|---|\n";
    for (auto ch : kChannels) {
      out << "| " << to_string(ch) << " | ";
      if (auto s = v.image->score(ch)) {
        out << *s;
      } else {
        out << "ABSENT";
      }
      out << " |\n";
    }
    out << "\n" << v.image->channels_passed << " channel(s) passed, " << (v.image->matched ? "matched" : "not matched")
        << "\n";
  }
  if (v.claim_graph) {
    if (v.xv_text) render_report(out, "Visual evidence text", *v.xv_text, *v.claim_graph);
    if (v.xt) render_report(out, "Text evidence", *v.xt, *v.claim_graph);
  }
  return out.str();
}

}  // namespace xcheck
