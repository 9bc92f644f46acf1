#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xcheck/graphmatch.hpp"
#include "xcheck/imagematch.hpp"
#include "xcheck/llm.hpp"
#include "xcheck/search.hpp"

namespace xcheck {

enum class Code { XvSupports, XvOoc, XvNs, XtSupports, XtNs, XtConflicts };
std::string_view to_string(Code c);  // "XV_SUPPORTS", ...

enum class Label { Pristine, Fake };
std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);

struct VerifyConfig {
  MatchConfig match;
  ImageMatchConfig image;
  // Conflicts in the visual-evidence text also block verification.
  bool strict_vt_conflicts = false;
  // An out-of-context image keeps text support from verifying the claim.
  bool ooc_vetoes_xt = false;

  void validate() const;
};

// The four match signals the decision reads, plus the optional vt conflict flag.
struct Signals {
  bool m_vt = false;  // claim text matches visual-evidence text
  bool m_v = false;   // claim image matches the best visual evidence image
  bool m_t = false;   // claim text matches text evidence
  bool c_t = false;   // text evidence conflicts with the claim
  bool c_vt = false;  // visual-evidence text conflicts with the claim
};

struct Decision {
  bool verified = false;
  std::vector<Code> codes;
};

// The rule table. Pure; codes come out XV block, XT support block, XT conflict.
Decision decide(const Signals& s, const VerifyConfig& cfg = {});

struct Verdict {
  bool verified = false;
  Label label = Label::Fake;
  std::vector<Code> codes;
  Signals signals;
  std::optional<ImageMatchResult> image;  // absent without a visual evidence bundle
  std::optional<MatchReport> xv_text;     // absent when the claim graph failed
  std::optional<MatchReport> xt;
  std::optional<ERGraph> claim_graph;
  std::optional<std::string> best_visual_url;
  // "EVIDENCE_ERROR: ..." lines for graphs that could not be built.
  std::vector<std::string> annotations;
};

// Recomputes the decision from the stored reports.
Decision rederive(const Verdict& v, const VerifyConfig& cfg = {});

// Builds the claim graph (unless one is given), conditional graphs for every
// evidence text, matches, and applies the rule table. Evidence graphs that
// cannot be built are skipped and annotated; a claim graph that cannot be
// built yields FAKE with an EVIDENCE_ERROR annotation and no codes.
// ProviderUnavailable propagates.
Verdict verify_claim(std::string_view claim_text, const VisualFeatureBundle& claim_bundle,
                     const std::vector<EvidenceItem>& visual_evidence,
                     const std::vector<EvidenceItem>& text_evidence, LlmProvider& llm,
                     EmbeddingProvider& embedder, const VerifyConfig& cfg = {},
                     const ERGraph* claim_graph = nullptr);

nlohmann::json to_json(const VerifyConfig& c);
VerifyConfig verify_config_from_json(const nlohmann::json& j, VerifyConfig base = {});
nlohmann::json to_json(const Verdict& v);
std::string render_markdown(const Verdict& v);

}  // namespace xcheck
