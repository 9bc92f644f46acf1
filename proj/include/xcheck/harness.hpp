#pragma once

// Corpus loading, the Remiss-style filter, and batch evaluation.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xcheck/retrieval.hpp"
#include "xcheck/verify.hpp"

namespace xcheck {

struct ClaimRecord {
  std::string claim_id;
  std::string text;
  std::filesystem::path bundle_path;  // absolute after loading
  std::optional<Label> label;
  std::optional<std::filesystem::path> evidence_dir;
  std::optional<double> fakeness_score;
  std::optional<double> caption_alignment;
};

struct LoadIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadReport {
  std::vector<ClaimRecord> records;
  std::vector<LoadIssue> issues;
};

// JSON lines:
//   {"claim_id", "text", "bundle", "label"?, "evidence_dir"?, "fakeness_score"?, "caption_alignment"?}
// Relative paths resolve against the manifest directory. Bad lines, duplicate
// ids and missing bundle files are reported and skipped. Throws ManifestNotFound.
LoadReport load_corpus(const std::filesystem::path& manifest);
nlohmann::json to_json(const ClaimRecord& r);

enum class FilterStage { Multimodal, Alignment, Visual, Fakeness };
std::string_view to_string(FilterStage s);

struct FilterConfig {
  double alignment_threshold = 0.40;  // keep when strictly above
  std::vector<std::string> excluded_classes = {"website", "internet"};
  double fakeness_threshold = 0.45;  // keep when strictly above; absent scores pass

  void validate() const;
};

struct Rejection {
  ClaimRecord record;
  FilterStage stage = FilterStage::Multimodal;
  std::string reason;
};

struct FilterResult {
  std::vector<ClaimRecord> kept;
  std::vector<Rejection> rejected;
};

// Stages run in a fixed order: bundle present, caption alignment, image class,
// fakeness. A missing alignment is computed as the embedder cosine between the
// bundle caption and the claim text; with no embedder or caption the record is
// rejected at the alignment stage.
FilterResult filter_corpus(const std::vector<ClaimRecord>& records, const FilterConfig& cfg,
                           EmbeddingProvider* embedder = nullptr);
nlohmann::json to_json(const FilterResult& r);

// Providers for a batch run. Without a search client, records lacking an
// evidence directory are verified against no evidence.
struct Engine {
  LlmProvider& llm;
  EmbeddingProvider& embedder;
  SearchClient* search = nullptr;
};

struct EvalConfig {
  VerifyConfig verify;
  RetrievalConfig retrieval;
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> out_dir;  // per-claim verdicts and summary.json
  std::optional<std::filesystem::path> trace_dir;
};

struct ClaimOutcome {
  std::string claim_id;
  Label expected = Label::Fake;
  std::optional<Verdict> verdict;
  std::optional<std::string> error;
  std::optional<RetrievalTrace> trace;
  std::size_t edge_count = 0;
  bool correct = false;
};

struct Bucket {
  std::size_t total = 0;
  std::size_t correct = 0;
};

struct EvalSummary {
  std::size_t total = 0;
  std::size_t fake_total = 0;
  std::size_t pristine_total = 0;
  // confusion counts, actual_as_predicted
  std::size_t fake_as_fake = 0;
  std::size_t fake_as_pristine = 0;
  std::size_t pristine_as_pristine = 0;
  std::size_t pristine_as_fake = 0;
  std::size_t errors = 0;  // counted as incorrect
  double overall_acc = 0.0;
  std::optional<double> fake_acc;      // absent without FAKE records
  std::optional<double> pristine_acc;  // absent without PRISTINE records
  std::map<std::size_t, Bucket> by_edge_count;
};

struct EvalResult {
  EvalSummary summary;
  std::vector<ClaimOutcome> outcomes;  // ordered by claim_id
};

// Verifies each record (dataset evidence when evidence_dir is set, retrieval
// otherwise) with up to cfg.jobs workers and reduces in claim_id order.
// Throws EmptyCorpus for no records and Malformed for an unlabeled record.
EvalResult evaluate(const std::vector<ClaimRecord>& records, Engine engine, const EvalConfig& cfg);

// Accuracies from confusion counts alone.
EvalSummary summarize(const std::vector<ClaimOutcome>& outcomes);

nlohmann::json to_json(const EvalSummary& s);
nlohmann::json to_json(const ClaimOutcome& o);

}  // namespace xcheck
