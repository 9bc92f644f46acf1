#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xcheck/graphbuild.hpp"
#include "xcheck/graphmatch.hpp"
#include "xcheck/imagematch.hpp"
#include "xcheck/llm.hpp"
#include "xcheck/search.hpp"
#include "xcheck/textembed.hpp"

namespace xcheck {

// Non-owning handles to the external services one claim needs.
struct Providers {
  LlmProvider& llm;
  EmbeddingProvider& embedder;
  SearchClient& search;
};

// What counts as FOUND: both image and contextual text must match, or the
// image alone.
enum class FoundRule { Both, ImageOnly };
std::string_view to_string(FoundRule r);
std::optional<FoundRule> parse_found_rule(std::string_view s);

struct RetrievalConfig {
  int max_tries = 5;
  std::size_t max_candidates = 10;
  MatchConfig match;
  ImageMatchConfig image;
  std::vector<std::string> allowlist;
  FoundRule found_rule = FoundRule::Both;

  void validate() const;
};

struct CandidateResult {
  EvidenceItem item;
  std::optional<ImageMatchResult> image;  // absent when the page has no bundle
  std::optional<MatchReport> text;        // absent when the page has no usable text
  std::optional<std::string> error;       // evidence graph could not be built
  bool passed = false;
};

struct RetrievalAttempt {
  std::string query;
  std::vector<CandidateResult> candidates;
};

struct RetrievalTrace {
  std::vector<RetrievalAttempt> attempts;
  std::optional<EvidenceItem> found;  // FOUND when set, EXHAUSTED otherwise
  std::size_t tries_used = 0;
  std::optional<std::string> error;  // why the loop stopped early, if it did

  bool is_found() const { return found.has_value(); }
};

// Ranking key for a visual-evidence candidate: text support first, then
// image channels passed, then mean channel score; URL breaks ties.
struct VisualScore {
  std::string url;
  double support_fraction = 0.0;
  int channels_passed = 0;
  double mean_score = 0.0;
};
// Index of the best candidate, nullopt for an empty list.
std::optional<std::size_t> select_best_visual(const std::vector<VisualScore>& candidates);
VisualScore visual_score(const CandidateResult& c);

// Entity names, PERSON then EVENT, LOCATION, DATE, then the remaining types,
// each group in claim order; duplicates dropped.
std::string initial_query(const ERGraph& claim);

// Evidence graph for a page's contextual text, conditioned on the claim
// topology when the claim has edges.
ERGraph evidence_graph(std::string_view text, const ERGraph& claim, LlmProvider& llm);

// Feedback-driven search for visual evidence: search, score every candidate
// on image and contextual text, refine the query from the best candidate's
// failures, repeat until FOUND or max_tries. Provider and graph-build failures
// end the loop as EXHAUSTED with `error` set instead of throwing.
RetrievalTrace retrieve_visual_evidence(const ERGraph& claim_graph, std::string_view claim_text,
                                        const VisualFeatureBundle& claim_bundle, Providers providers,
                                        const RetrievalConfig& cfg);
RetrievalTrace retrieve_visual_evidence(std::string_view claim_text, const VisualFeatureBundle& claim_bundle,
                                        Providers providers, const RetrievalConfig& cfg);

struct CrossEvidence {
  std::vector<EvidenceItem> text_evidence;    // pages carrying the claim image
  std::vector<EvidenceItem> visual_evidence;  // pages found by searching with the claim text
  std::optional<RetrievalTrace> trace;        // absent in dataset mode
  std::optional<std::string> error;           // reverse-search failure, if any
};

// Live/mock mode. Visual evidence is the FOUND page; when the loop is
// exhausted it is the best-ranked candidate examined, so the verifier can
// still tell an out-of-context image from missing evidence.
CrossEvidence gather_cross_evidence(const ERGraph& claim_graph, std::string_view claim_text,
                                    const VisualFeatureBundle& claim_bundle, Providers providers,
                                    const RetrievalConfig& cfg);

// Dataset mode: reads <dir>/evidence.json without touching any provider.
//   {"text_evidence": [item...], "visual_evidence": [item...]}
// Items are EvidenceItem objects; "bundle" may give a bundle path relative to <dir>.
CrossEvidence load_dataset_evidence(const std::filesystem::path& dir);

nlohmann::json to_json(const RetrievalConfig& c);
RetrievalConfig retrieval_config_from_json(const nlohmann::json& j, RetrievalConfig base = {});
nlohmann::json to_json(const CandidateResult& c);
nlohmann::json to_json(const RetrievalTrace& t);

}  // namespace xcheck
