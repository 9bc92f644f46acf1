#include "xcheck/search.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "xcheck/ergraph.hpp"
#include "xcheck/error.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(SearchKind k) {
  return k == SearchKind::DirectText ? "DIRECT_TEXT" : "REVERSE_IMAGE";
}

void SearchQuery::validate() const {
  if (str::trim(payload).empty()) throw Error(ErrorCode::Malformed, "search query has an empty payload");
}

void EvidenceItem::validate() const {
  if (source_domain != domain_of(source_url)) {
    throw Error(ErrorCode::Malformed, "source_domain '" + source_domain + "' does not match " + source_url);
  }
  if (!contextual_text && !feature_bundle) {
    throw Error(ErrorCode::Malformed, "evidence item " + source_url + " has neither text nor bundle");
  }
}

std::string domain_of(std::string_view url) {
  auto s = str::trim(url);
  if (auto p = s.find("://"); p != std::string_view::npos) s.remove_prefix(p + 3);
  s = s.substr(0, s.find_first_of("/?#"));
  if (auto at = s.rfind('@'); at != std::string_view::npos) s.remove_prefix(at + 1);
  s = s.substr(0, s.find(':'));
  auto host = str::lower(s);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.rfind("www.", 0) == 0) host.erase(0, 4);
  return host;
}

bool domain_allowed(std::string_view domain, const std::vector<std::string>& allowlist) {
  if (allowlist.empty()) return true;
  const auto d = str::lower(domain);
  for (const auto& entry : allowlist) {
    const auto a = domain_of(entry);
    if (a.empty()) continue;
    if (d == a) return true;
    if (d.size() > a.size() && d.compare(d.size() - a.size(), a.size(), a) == 0 &&
        d[d.size() - a.size() - 1] == '.') {
      return true;
    }
  }
  return false;
}

const std::vector<std::string>& remiss_domains() {
  static const std::vector<std::string> domains = {
      "elpais.com",       "elmundo.es",        "abc.es",      "lavanguardia.com", "larazon.es",
      "naciodigital.cat", "marca.com",         "granadahoy.com", "ecuadoretxea.org", "eldiario.es",
      "diariocordoba.com", "publico.es",       "beteve.cat",  "radiosabadell.com", "elespanol.com"};
  return domains;
}

std::string excerpt(std::string_view title, std::string_view body, std::size_t paragraphs) {
  std::vector<std::string> parts;
  if (auto t = str::squash(title); !t.empty()) parts.push_back(t);
  std::size_t taken = 0;
  for (const auto& line : str::split(body, '\n')) {
    if (taken == paragraphs) break;
    auto p = str::squash(line);
    if (p.empty()) continue;
    parts.push_back(p);
    ++taken;
  }
  return str::join(parts, "\n");
}

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::vector<EvidenceItem> run_search(const SearchQuery& q, SearchClient& client, SearchKind expected) {
  if (q.kind != expected) {
    throw Error(ErrorCode::Malformed, "expected a " + std::string(to_string(expected)) + " query");
  }
  q.validate();
  std::vector<EvidenceItem> out;
  for (auto& item : client.search(q)) {
    if (!domain_allowed(item.source_domain, q.domain_allowlist)) continue;
    if (!item.contextual_text && !item.feature_bundle) continue;
    out.push_back(std::move(item));
    if (out.size() == q.max_results) break;
  }
  return out;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key)) {
    for (const auto& v : j[key]) out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<EvidenceItem> direct_search(const SearchQuery& q, SearchClient& client) {
  return run_search(q, client, SearchKind::DirectText);
}

std::vector<EvidenceItem> reverse_search(const SearchQuery& q, SearchClient& client) {
  return run_search(q, client, SearchKind::ReverseImage);
}

MockSearchIndex::MockSearchIndex(const json& index, fs::path base_dir) {
  if (!index.is_object() || !index.contains("pages")) {
    throw Error(ErrorCode::InvalidConfig, "mock index needs a \"pages\" array");
  }
  retrieved_at_ = index.value("retrieved_at", std::string("2024-01-01T00:00:00Z"));
  std::map<std::string, VisualFeatureBundle> bundles;
  for (const auto& p : index["pages"]) {
    Page page;
    page.url = p.at("url").get<std::string>();
    auto title = p.value("title", std::string());
    auto text = p.value("text", std::string());
    if (!title.empty() || !text.empty()) page.text = excerpt(title, text, 1000);
    if (auto b = p.value("bundle", std::string()); !b.empty()) {
      auto full = (base_dir / b).lexically_normal().string();
      if (!bundles.count(full)) bundles.emplace(full, load_bundle(full));
      page.bundle = bundles.at(full);
    }
    if (p.contains("image_ref")) page.image_ref = p["image_ref"].get<std::string>();
    page.match_terms = string_list(p, "match_terms");
    page.image_ids = string_list(p, "image_ids");
    pages_.push_back(std::move(page));
  }
}

std::unique_ptr<MockSearchIndex> MockSearchIndex::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open mock index " + path.string());
  try {
    return std::make_unique<MockSearchIndex>(json::parse(in), path.parent_path());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

std::vector<EvidenceItem> MockSearchIndex::search(const SearchQuery& q) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  std::vector<EvidenceItem> out;
  for (const auto& p : pages_) {
    bool hit = false;
    if (q.kind == SearchKind::DirectText) {
      hit = !p.match_terms.empty() &&
            std::all_of(p.match_terms.begin(), p.match_terms.end(),
                        [&](const std::string& t) { return str::icontains(q.payload, t); });
    } else {
      hit = std::find(p.image_ids.begin(), p.image_ids.end(), q.payload) != p.image_ids.end();
    }
    if (!hit) continue;
    EvidenceItem item;
    item.source_url = p.url;
    item.source_domain = domain_of(p.url);
    item.contextual_text = p.text;
    item.feature_bundle = p.bundle;
    item.image_ref = p.image_ref;
    item.retrieved_at = retrieved_at_;
    item.query_used = q;
    out.push_back(std::move(item));
  }
  return out;
}

std::size_t MockSearchIndex::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string query_digest(const SearchQuery& q) {
  return text_digest(std::string(to_string(q.kind)) + "\n" + q.payload);
}

namespace {
std::string record_id(const std::string& digest, std::string_view url) {
  return text_digest(digest + "\x1f" + std::string(url));
}
}  // namespace

EvidenceStore::EvidenceStore(fs::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path(), ec);
  {
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw Error(ErrorCode::StoreUnavailable, "cannot open evidence store " + path_.string());
  }
  std::ifstream in(path_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (str::trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      auto digest = j.at("query_digest").get<std::string>();
      auto item = evidence_item_from_json(j);
      auto id = record_id(digest, item.source_url);
      if (items_.emplace(id, std::move(item)).second) by_query_[digest].push_back(id);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::StoreUnavailable,
                  path_.string() + ":" + std::to_string(lineno) + ": corrupt record: " + e.what());
    }
  }
}

std::string EvidenceStore::put(const EvidenceItem& item) {
  const auto digest = query_digest(item.query_used);
  const auto id = record_id(digest, item.source_url);
  std::lock_guard lock(mu_);
  if (items_.count(id)) return id;
  auto j = to_json(item);
  j["query_digest"] = digest;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::StoreUnavailable, "cannot append to " + path_.string());
  out << j.dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorCode::StoreUnavailable, "write to " + path_.string() + " failed");
  items_.emplace(id, item);
  by_query_[digest].push_back(id);
  return id;
}

std::optional<EvidenceItem> EvidenceStore::get(const SearchQuery& q, std::string_view url) const {
  std::lock_guard lock(mu_);
  auto it = items_.find(record_id(query_digest(q), url));
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<EvidenceItem>> EvidenceStore::find(const SearchQuery& q) const {
  std::lock_guard lock(mu_);
  auto it = by_query_.find(query_digest(q));
  if (it == by_query_.end()) return std::nullopt;
  std::vector<EvidenceItem> out;
  for (const auto& id : it->second) out.push_back(items_.at(id));
  return out;
}

std::size_t EvidenceStore::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

std::vector<EvidenceItem> CachingSearchClient::search(const SearchQuery& q) {
  if (auto cached = store_.find(q)) return *cached;
  auto items = inner_.search(q);
  for (const auto& item : items) store_.put(item);
  return items;
}

json to_json(const SearchQuery& q) {
  return json{{"kind", std::string(to_string(q.kind))},
              {"payload", q.payload},
              {"domain_allowlist", q.domain_allowlist},
              {"max_results", q.max_results}};
}

SearchQuery search_query_from_json(const json& j) {
  SearchQuery q;
  const auto kind = j.value("kind", std::string("DIRECT_TEXT"));
  if (kind == "DIRECT_TEXT") {
    q.kind = SearchKind::DirectText;
  } else if (kind == "REVERSE_IMAGE") {
    q.kind = SearchKind::ReverseImage;
  } else {
    throw Error(ErrorCode::Malformed, "unknown search kind " + kind);
  }
  q.payload = j.value("payload", std::string());
  q.domain_allowlist = string_list(j, "domain_allowlist");
  q.max_results = j.value("max_results", q.max_results);
  return q;
}

json to_json(const EvidenceItem& e) {
  json j{{"source_url", e.source_url},
         {"source_domain", e.source_domain},
         {"retrieved_at", e.retrieved_at},
         {"query_used", to_json(e.query_used)}};
  j["contextual_text"] = e.contextual_text ? json(*e.contextual_text) : json(nullptr);
  j["feature_bundle"] = e.feature_bundle ? to_json(*e.feature_bundle) : json(nullptr);
  j["image_ref"] = e.image_ref ? json(*e.image_ref) : json(nullptr);
  return j;
}

EvidenceItem evidence_item_from_json(const json& j) {
  EvidenceItem e;
  e.source_url = j.at("source_url").get<std::string>();
  e.source_domain = j.value("source_domain", domain_of(e.source_url));
  if (j.contains("contextual_text") && j["contextual_text"].is_string()) {
    e.contextual_text = j["contextual_text"].get<std::string>();
  }
  if (j.contains("feature_bundle") && j["feature_bundle"].is_object()) {
    e.feature_bundle = bundle_from_json(j["feature_bundle"]);
  }
  if (j.contains("image_ref") && j["image_ref"].is_string()) e.image_ref = j["image_ref"].get<std::string>();
  e.retrieved_at = j.value("retrieved_at", std::string());
  if (j.contains("query_used")) e.query_used = search_query_from_json(j["query_used"]);
  e.validate();
  return e;
}

}  // namespace xcheck
