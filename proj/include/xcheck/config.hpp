#pragma once

// Engine configuration: one JSON document, environment overrides for the live
// endpoints, and the provider set built from it.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "xcheck/graphmatch.hpp"
#include "xcheck/harness.hpp"
#include "xcheck/imagematch.hpp"
#include "xcheck/llm.hpp"
#include "xcheck/retrieval.hpp"
#include "xcheck/search.hpp"
#include "xcheck/textembed.hpp"
#include "xcheck/verify.hpp"

namespace xcheck {

struct LiveProviders {
  std::string llm_url;
  std::string llm_model = "gpt-3.5-turbo";
  std::string llm_key;
  std::string search_url;
  std::string search_key;
  std::string embed_url;
  int timeout_seconds = 30;
  std::size_t paragraphs = 3;
  std::string evidence_store;  // JSONL cache of search results; empty disables it
};

// Offline providers. Paths resolve against the config file's directory.
struct MockProviders {
  std::string llm_transcript;
  std::string search_index;
  std::size_t embedder_dim = 256;
  std::map<std::string, std::string> synonyms;  // alias -> canonical text
};

struct EngineConfig {
  MatchConfig match;
  ImageMatchConfig image;
  int llm_max_retries = 3;
  int max_tries = 5;
  std::size_t max_candidates = 10;
  bool use_remiss_allowlist = false;
  std::vector<std::string> allowlist;  // used as given when use_remiss_allowlist is false
  FoundRule found_rule = FoundRule::Both;
  bool strict_vt_conflicts = false;
  bool ooc_vetoes_xt = false;
  FilterConfig filter;
  LiveProviders live;
  MockProviders mock;
  std::filesystem::path base_dir = ".";

  RetrievalConfig retrieval() const;
  VerifyConfig verify() const;
  void validate() const;
};

nlohmann::json to_json(const EngineConfig& c);
// Unknown keys are rejected so that typos do not silently fall back to defaults.
EngineConfig engine_config_from_json(const nlohmann::json& j, std::filesystem::path base_dir = ".");
// Reads the file (or defaults when path is empty), then applies environment
// overrides: ENGINE_LLM_URL, ENGINE_LLM_MODEL, ENGINE_LLM_KEY, ENGINE_SEARCH_URL,
// ENGINE_SEARCH_KEY, ENGINE_EMBED_URL.
EngineConfig load_config(const std::filesystem::path& path);
void apply_env_overrides(EngineConfig& c);

enum class ProviderMode { Live, Mock };
std::optional<ProviderMode> parse_provider_mode(std::string_view s);

struct ProviderSet {
  std::unique_ptr<LlmProvider> llm;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<EvidenceStore> store;
  std::unique_ptr<SearchClient> uncached;
  std::unique_ptr<SearchClient> search;  // null when no index or endpoint is configured

  Engine engine() { return {*llm, *embedder, search.get()}; }
};

// Throws InvalidConfig when a live endpoint or mock file is missing.
ProviderSet make_providers(const EngineConfig& c, ProviderMode mode);

}  // namespace xcheck
