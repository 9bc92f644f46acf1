#include "xcheck/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "xcheck/error.hpp"
#include "xcheck/http.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

namespace fs = std::filesystem;
using nlohmann::json;

RetrievalConfig EngineConfig::retrieval() const {
  RetrievalConfig r;
  r.max_tries = max_tries;
  r.max_candidates = max_candidates;
  r.match = match;
  r.image = image;
  r.allowlist = use_remiss_allowlist ? remiss_domains() : allowlist;
  r.found_rule = found_rule;
  return r;
}

VerifyConfig EngineConfig::verify() const {
  VerifyConfig v;
  v.match = match;
  v.image = image;
  v.strict_vt_conflicts = strict_vt_conflicts;
  v.ooc_vetoes_xt = ooc_vetoes_xt;
  return v;
}

void EngineConfig::validate() const {
  if (llm_max_retries < 1) throw Error(ErrorCode::InvalidConfig, "llm.max_retries must be >= 1");
  if (live.timeout_seconds < 1) throw Error(ErrorCode::InvalidConfig, "live.timeout_seconds must be >= 1");
  if (mock.embedder_dim < 2) throw Error(ErrorCode::InvalidConfig, "mock.embedder_dim must be >= 2");
  retrieval().validate();
  verify().validate();
  filter.validate();
}

json to_json(const EngineConfig& c) {
  return json{
      {"graph_match", to_json(c.match)},
      {"image_match", to_json(c.image)},
      {"llm", {{"max_retries", c.llm_max_retries}}},
      {"retrieval",
       {{"max_tries", c.max_tries},
        {"max_candidates", c.max_candidates},
        {"use_remiss_allowlist", c.use_remiss_allowlist},
        {"allowlist", c.allowlist},
        {"found_rule", std::string(to_string(c.found_rule))}}},
      {"verify", {{"strict_vt_conflicts", c.strict_vt_conflicts}, {"ooc_vetoes_xt", c.ooc_vetoes_xt}}},
      {"filter",
       {{"alignment_threshold", c.filter.alignment_threshold},
        {"excluded_classes", c.filter.excluded_classes},
        {"fakeness_threshold", c.filter.fakeness_threshold}}},
      {"live",
       {{"llm_url", c.live.llm_url},
        {"llm_model", c.live.llm_model},
        {"search_url", c.live.search_url},
        {"embed_url", c.live.embed_url},
        {"timeout_seconds", c.live.timeout_seconds},
        {"paragraphs", c.live.paragraphs},
        {"evidence_store", c.live.evidence_store}}},
      {"mock",
       {{"llm_transcript", c.mock.llm_transcript},
        {"search_index", c.mock.search_index},
        {"embedder_dim", c.mock.embedder_dim},
        {"synonyms", c.mock.synonyms}}},
  };
}

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + (where.empty() ? k : where + "." + k) + "'");
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) ? j[key] : empty;
}

}  // namespace

EngineConfig engine_config_from_json(const json& j, fs::path base_dir) {
  EngineConfig c;
  c.base_dir = std::move(base_dir);
  try {
    check_keys(j, "", {"graph_match", "image_match", "llm", "retrieval", "verify", "filter", "live", "mock"});
    const auto& gm = section(j, "graph_match");
    check_keys(gm, "graph_match", {"node_threshold", "edge_threshold", "edge_support_threshold", "conflict_tolerance", "max_walk_length"});
    c.match = match_config_from_json(gm);
    const auto& im = section(j, "image_match");
    check_keys(im, "image_match", {"threshold", "required_channels", "include_caption"});
    c.image = image_match_config_from_json(im);

    const auto& llm = section(j, "llm");
    check_keys(llm, "llm", {"max_retries"});
    c.llm_max_retries = llm.value("max_retries", c.llm_max_retries);

    const auto& r = section(j, "retrieval");
    check_keys(r, "retrieval", {"max_tries", "max_candidates", "use_remiss_allowlist", "allowlist", "found_rule"});
    c.max_tries = r.value("max_tries", c.max_tries);
    c.max_candidates = r.value("max_candidates", c.max_candidates);
    c.use_remiss_allowlist = r.value("use_remiss_allowlist", c.use_remiss_allowlist);
    if (r.contains("allowlist")) c.allowlist = r["allowlist"].get<std::vector<std::string>>();
    if (r.contains("found_rule")) {
      auto fr = parse_found_rule(r["found_rule"].get<std::string>());
      if (!fr) throw Error(ErrorCode::InvalidConfig, "retrieval.found_rule must be \"both\" or \"image-only\"");
      c.found_rule = *fr;
    }

    const auto& v = section(j, "verify");
    check_keys(v, "verify", {"strict_vt_conflicts", "ooc_vetoes_xt"});
    c.strict_vt_conflicts = v.value("strict_vt_conflicts", c.strict_vt_conflicts);
    c.ooc_vetoes_xt = v.value("ooc_vetoes_xt", c.ooc_vetoes_xt);

    const auto& f = section(j, "filter");
    check_keys(f, "filter", {"alignment_threshold", "excluded_classes", "fakeness_threshold"});
    c.filter.alignment_threshold = f.value("alignment_threshold", c.filter.alignment_threshold);
    if (f.contains("excluded_classes")) c.filter.excluded_classes = f["excluded_classes"].get<std::vector<std::string>>();
    c.filter.fakeness_threshold = f.value("fakeness_threshold", c.filter.fakeness_threshold);

    const auto& l = section(j, "live");
    check_keys(l, "live", {"llm_url", "llm_model", "search_url", "embed_url", "timeout_seconds", "paragraphs", "evidence_store"});
    c.live.llm_url = l.value("llm_url", c.live.llm_url);
    c.live.llm_model = l.value("llm_model", c.live.llm_model);
    c.live.search_url = l.value("search_url", c.live.search_url);
    c.live.embed_url = l.value("embed_url", c.live.embed_url);
    c.live.timeout_seconds = l.value("timeout_seconds", c.live.timeout_seconds);
    c.live.paragraphs = l.value("paragraphs", c.live.paragraphs);
    c.live.evidence_store = l.value("evidence_store", c.live.evidence_store);

    const auto& m = section(j, "mock");
    check_keys(m, "mock", {"llm_transcript", "search_index", "embedder_dim", "synonyms"});
    c.mock.llm_transcript = m.value("llm_transcript", c.mock.llm_transcript);
    c.mock.search_index = m.value("search_index", c.mock.search_index);
    c.mock.embedder_dim = m.value("embedder_dim", c.mock.embedder_dim);
    if (m.contains("synonyms")) c.mock.synonyms = m["synonyms"].get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

void apply_env_overrides(EngineConfig& c) {
  auto env = [](const char* name, std::string& field) {
    if (const char* v = std::getenv(name); v && *v) field = v;
  };
  env("ENGINE_LLM_URL", c.live.llm_url);
  env("ENGINE_LLM_MODEL", c.live.llm_model);
  env("ENGINE_LLM_KEY", c.live.llm_key);
  env("ENGINE_SEARCH_URL", c.live.search_url);
  env("ENGINE_SEARCH_KEY", c.live.search_key);
  env("ENGINE_EMBED_URL", c.live.embed_url);
}

EngineConfig load_config(const fs::path& path) {
  EngineConfig c;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
    c = engine_config_from_json(j, path.parent_path());
  }
  apply_env_overrides(c);
  return c;
}

std::optional<ProviderMode> parse_provider_mode(std::string_view s) {
  if (str::iequals(s, "live")) return ProviderMode::Live;
  if (str::iequals(s, "mock")) return ProviderMode::Mock;
  return std::nullopt;
}

ProviderSet make_providers(const EngineConfig& c, ProviderMode mode) {
  ProviderSet p;
  if (mode == ProviderMode::Mock) {
    if (c.mock.llm_transcript.empty()) throw Error(ErrorCode::InvalidConfig, "mock.llm_transcript is not set");
    p.llm = ScriptedLlm::load(c.base_dir / c.mock.llm_transcript);
    auto stub = std::make_unique<StubEmbedder>(c.mock.embedder_dim);
    for (const auto& [alias, canonical] : c.mock.synonyms) stub->add_synonym(canonical, alias);
    p.embedder = std::move(stub);
    if (!c.mock.search_index.empty()) p.search = MockSearchIndex::load(c.base_dir / c.mock.search_index);
  } else {
    if (c.live.llm_url.empty()) throw Error(ErrorCode::InvalidConfig, "live.llm_url is not set (ENGINE_LLM_URL)");
    if (c.live.embed_url.empty()) throw Error(ErrorCode::InvalidConfig, "live.embed_url is not set (ENGINE_EMBED_URL)");
    p.llm = std::make_unique<HttpLlm>(c.live.llm_url, c.live.llm_model, HttpOptions{c.live.timeout_seconds, c.live.llm_key});
    p.embedder = std::make_unique<MemoEmbedder>(
        std::make_shared<HttpEmbedder>(c.live.embed_url, HttpOptions{c.live.timeout_seconds, ""}));
    if (!c.live.search_url.empty()) {
      auto client = std::make_unique<HttpSearchClient>(
          c.live.search_url, HttpOptions{c.live.timeout_seconds, c.live.search_key}, c.live.paragraphs);
      if (!c.live.evidence_store.empty()) {
        p.store = std::make_unique<EvidenceStore>(c.base_dir / c.live.evidence_store);
        p.uncached = std::move(client);
        p.search = std::make_unique<CachingSearchClient>(*p.uncached, *p.store);
      } else {
        p.search = std::move(client);
      }
    }
  }
  p.llm->set_max_retries(c.llm_max_retries);
  return p;
}

}  // namespace xcheck
