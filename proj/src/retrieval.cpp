#include "xcheck/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "xcheck/error.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

using nlohmann::json;

std::string_view to_string(FoundRule r) { return r == FoundRule::Both ? "both" : "image-only"; }

std::optional<FoundRule> parse_found_rule(std::string_view s) {
  if (str::iequals(s, "both")) return FoundRule::Both;
  if (str::iequals(s, "image-only") || str::iequals(s, "image_only")) return FoundRule::ImageOnly;
  return std::nullopt;
}

void RetrievalConfig::validate() const {
  if (max_tries < 1) throw Error(ErrorCode::InvalidConfig, "max_tries must be >= 1");
  if (max_candidates < 1) throw Error(ErrorCode::InvalidConfig, "max_candidates must be >= 1");
  match.validate();
  image.validate();
}

std::optional<std::size_t> select_best_visual(const std::vector<VisualScore>& c) {
  if (c.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const auto& a = c[i];
    const auto& b = c[best];
    auto key_a = std::make_tuple(a.support_fraction, a.channels_passed, a.mean_score);
    auto key_b = std::make_tuple(b.support_fraction, b.channels_passed, b.mean_score);
    if (key_a > key_b || (key_a == key_b && a.url < b.url)) best = i;
  }
  return best;
}

VisualScore visual_score(const CandidateResult& c) {
  VisualScore s;
  s.url = c.item.source_url;
  if (c.text) s.support_fraction = c.text->support_fraction;
  if (c.image) {
    s.channels_passed = c.image->channels_passed;
    s.mean_score = c.image->mean_score();
  }
  return s;
}

std::string initial_query(const ERGraph& claim) {
  const EntityType order[] = {EntityType::Person, EntityType::Event, EntityType::Location, EntityType::Date,
                              EntityType::Org,    EntityType::Object, EntityType::Misc};
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (auto t : order) {
    for (const auto& n : claim.nodes) {
      if (n.type == t && seen.insert(str::lower(n.name)).second) names.push_back(n.name);
    }
  }
  return str::join(names, " ");
}

ERGraph evidence_graph(std::string_view text, const ERGraph& claim, LlmProvider& llm) {
  if (claim.edges.empty()) return build_graph(text, llm);
  return build_graph_conditional(text, make_template(claim), llm);
}

namespace {

CandidateResult score_candidate(const EvidenceItem& item, const ERGraph& claim,
                                const VisualFeatureBundle& claim_bundle, Providers p, const RetrievalConfig& cfg) {
  CandidateResult r;
  r.item = item;
  if (item.feature_bundle) r.image = image_match(claim_bundle, *item.feature_bundle, cfg.image);
  if (item.contextual_text && !str::trim(*item.contextual_text).empty()) {
    try {
      auto g = evidence_graph(*item.contextual_text, claim, p.llm);
      r.text = graph_match(claim, g, p.embedder, cfg.match);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GraphBuildExhausted) throw;
      r.error = e.what();
    }
  }
  const bool image_ok = r.image && r.image->matched;
  const bool text_ok = r.text && r.text->matched;
  r.passed = image_ok && (cfg.found_rule == FoundRule::ImageOnly || text_ok);
  return r;
}

}  // namespace

RetrievalTrace retrieve_visual_evidence(const ERGraph& claim, std::string_view claim_text,
                                        const VisualFeatureBundle& claim_bundle, Providers p,
                                        const RetrievalConfig& cfg) {
  cfg.validate();
  RetrievalTrace trace;
  std::string query = initial_query(claim);
  try {
    for (int k = 1; k <= cfg.max_tries; ++k) {
      trace.attempts.push_back({query, {}});
      auto& attempt = trace.attempts.back();
      SearchQuery q{SearchKind::DirectText, query, cfg.allowlist, cfg.max_candidates};
      for (const auto& item : direct_search(q, p.search)) {
        attempt.candidates.push_back(score_candidate(item, claim, claim_bundle, p, cfg));
        if (attempt.candidates.back().passed) {
          trace.found = attempt.candidates.back().item;
          break;
        }
      }
      if (trace.found || k == cfg.max_tries) break;

      std::vector<VisualScore> scores;
      for (const auto& c : attempt.candidates) scores.push_back(visual_score(c));
      const CandidateResult* best = nullptr;
      if (auto i = select_best_visual(scores)) best = &attempt.candidates[*i];
      query = refine_search_string(claim_text, claim, query, best && best->image ? &*best->image : nullptr,
                                   best && best->text ? &*best->text : nullptr, p.llm, cfg.image.threshold);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ProviderUnavailable && e.code() != ErrorCode::RefinementStagnant &&
        e.code() != ErrorCode::GraphBuildExhausted && e.code() != ErrorCode::Malformed) {
      throw;
    }
    trace.error = e.what();
  }
  trace.tries_used = trace.attempts.size();
  return trace;
}

RetrievalTrace retrieve_visual_evidence(std::string_view claim_text, const VisualFeatureBundle& claim_bundle,
                                        Providers p, const RetrievalConfig& cfg) {
  ERGraph claim;
  try {
    claim = build_graph(claim_text, p.llm);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::GraphBuildExhausted && e.code() != ErrorCode::ProviderUnavailable) throw;
    RetrievalTrace trace;
    trace.error = e.what();
    return trace;
  }
  return retrieve_visual_evidence(claim, claim_text, claim_bundle, p, cfg);
}

CrossEvidence gather_cross_evidence(const ERGraph& claim, std::string_view claim_text,
                                    const VisualFeatureBundle& claim_bundle, Providers p,
                                    const RetrievalConfig& cfg) {
  CrossEvidence out;
  try {
    SearchQuery q{SearchKind::ReverseImage, claim_bundle.image_id, cfg.allowlist, cfg.max_candidates};
    out.text_evidence = reverse_search(q, p.search);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ProviderUnavailable) throw;
    out.error = e.what();
  }
  out.trace = retrieve_visual_evidence(claim, claim_text, claim_bundle, p, cfg);
  if (out.trace->found) {
    out.visual_evidence.push_back(*out.trace->found);
  } else {
    std::vector<const CandidateResult*> all;
    std::vector<VisualScore> scores;
    for (const auto& a : out.trace->attempts) {
      for (const auto& c : a.candidates) {
        all.push_back(&c);
        scores.push_back(visual_score(c));
      }
    }
    if (auto i = select_best_visual(scores)) out.visual_evidence.push_back(all[*i]->item);
  }
  return out;
}

namespace {

std::vector<EvidenceItem> dataset_items(const json& arr, const std::filesystem::path& dir) {
  std::vector<EvidenceItem> out;
  for (const auto& j : arr) {
    auto copy = j;
    std::optional<VisualFeatureBundle> bundle;
    if (auto b = j.value("bundle", std::string()); !b.empty()) {
      bundle = load_bundle(dir / b);
      copy.erase("bundle");
    }
    if (!copy.contains("source_domain")) copy["source_domain"] = domain_of(copy.value("source_url", ""));
    if (bundle && !copy.contains("feature_bundle")) copy["feature_bundle"] = to_json(*bundle);
    out.push_back(evidence_item_from_json(copy));
  }
  return out;
}

}  // namespace

CrossEvidence load_dataset_evidence(const std::filesystem::path& dir) {
  const auto path = dir / "evidence.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ManifestNotFound, "no evidence file at " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Malformed, path.string() + ": " + e.what());
  }
  CrossEvidence out;
  try {
    out.text_evidence = dataset_items(j.value("text_evidence", json::array()), dir);
    out.visual_evidence = dataset_items(j.value("visual_evidence", json::array()), dir);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Malformed, path.string() + ": " + e.what());
  }
  return out;
}

json to_json(const RetrievalConfig& c) {
  return json{{"max_tries", c.max_tries},
              {"max_candidates", c.max_candidates},
              {"allowlist", c.allowlist},
              {"found_rule", std::string(to_string(c.found_rule))}};
}

RetrievalConfig retrieval_config_from_json(const json& j, RetrievalConfig base) {
  base.max_tries = j.value("max_tries", base.max_tries);
  base.max_candidates = j.value("max_candidates", base.max_candidates);
  if (j.contains("allowlist")) base.allowlist = j["allowlist"].get<std::vector<std::string>>();
  if (j.contains("found_rule")) {
    auto r = parse_found_rule(j["found_rule"].get<std::string>());
    if (!r) throw Error(ErrorCode::InvalidConfig, "found_rule must be \"both\" or \"image-only\"");
    base.found_rule = *r;
  }
  base.validate();
  return base;
}

json to_json(const CandidateResult& c) {
  json j{{"source_url", c.item.source_url},
         {"source_domain", c.item.source_domain},
         {"retrieved_at", c.item.retrieved_at},
         {"has_text", c.item.contextual_text.has_value()},
         {"has_bundle", c.item.feature_bundle.has_value()},
         {"passed", c.passed}};
  j["image_match"] = c.image ? to_json(*c.image) : json("ABSENT");
  j["graph_match"] = c.text ? to_json(*c.text) : json("ABSENT");
  if (c.error) j["error"] = *c.error;
  return j;
}

json to_json(const RetrievalTrace& t) {
  json attempts = json::array();
  for (const auto& a : t.attempts) {
    json cands = json::array();
    for (const auto& c : a.candidates) cands.push_back(to_json(c));
    attempts.push_back({{"query", a.query}, {"candidates", std::move(cands)}});
  }
  json j{{"attempts", std::move(attempts)},
         {"outcome", t.found ? "FOUND" : "EXHAUSTED"},
         {"tries_used", t.tries_used}};
  j["found"] = t.found ? json(t.found->source_url) : json(nullptr);
  if (t.error) j["error"] = *t.error;
  return j;
}

}  // namespace xcheck
