#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xcheck/imagematch.hpp"

namespace xcheck {

enum class SearchKind { DirectText, ReverseImage };
std::string_view to_string(SearchKind k);

struct SearchQuery {
  SearchKind kind = SearchKind::DirectText;
  std::string payload;  // search string, or an image reference for reverse search
  std::vector<std::string> domain_allowlist;  // empty = unrestricted
  std::size_t max_results = 10;

  void validate() const;
  bool operator==(const SearchQuery&) const = default;
};

struct EvidenceItem {
  std::string source_url;
  std::string source_domain;
  std::optional<std::string> contextual_text;
  std::optional<VisualFeatureBundle> feature_bundle;
  std::optional<std::string> image_ref;  // where the image can be fetched for feature extraction
  std::string retrieved_at;              // ISO-8601 UTC
  SearchQuery query_used;

  // Throws Malformed unless the domain matches the URL and text or bundle is present.
  void validate() const;
  bool operator==(const EvidenceItem&) const = default;
};

// Lower-cased host of a URL without a leading "www.". Empty if none.
std::string domain_of(std::string_view url);
// True when the allowlist is empty or `domain` equals or is a subdomain of an entry.
bool domain_allowed(std::string_view domain, const std::vector<std::string>& allowlist);

// The fifteen Spanish news outlets used as trusted sources for the Remiss corpus.
const std::vector<std::string>& remiss_domains();

// Title plus the first `paragraphs` non-empty paragraphs of a page.
std::string excerpt(std::string_view title, std::string_view body, std::size_t paragraphs = 3);

std::string now_iso8601();

class SearchClient {
 public:
  virtual ~SearchClient() = default;
  // Raw engine results in engine order. Throws Error{ProviderUnavailable}.
  virtual std::vector<EvidenceItem> search(const SearchQuery& q) = 0;
  virtual std::string provider_id() const = 0;
};

// Engine results filtered to the allowlist, order preserved. An empty list
// is a normal outcome.
std::vector<EvidenceItem> direct_search(const SearchQuery& q, SearchClient& client);
std::vector<EvidenceItem> reverse_search(const SearchQuery& q, SearchClient& client);

// Offline search engine backed by a JSON index file:
//   {"retrieved_at": "...",
//    "pages": [{"url", "title"?, "text"?, "bundle"?: path, "image_ref"?,
//               "match_terms": [...], "image_ids": [...]}]}
// A direct query returns pages whose match_terms all occur in the query
// (case-insensitive; pages without terms never match). A reverse query returns
// pages listing the payload in image_ids. Bundle paths resolve against the
// index file's directory.
class MockSearchIndex : public SearchClient {
 public:
  MockSearchIndex(const nlohmann::json& index, std::filesystem::path base_dir);
  static std::unique_ptr<MockSearchIndex> load(const std::filesystem::path& path);

  std::vector<EvidenceItem> search(const SearchQuery& q) override;
  std::string provider_id() const override { return "mock-index"; }
  std::size_t call_count() const;

 private:
  struct Page {
    std::string url;
    std::optional<std::string> text;
    std::optional<VisualFeatureBundle> bundle;
    std::optional<std::string> image_ref;
    std::vector<std::string> match_terms;
    std::vector<std::string> image_ids;
  };
  std::vector<Page> pages_;
  std::string retrieved_at_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

// Key for cached results: digest of the query kind and payload.
std::string query_digest(const SearchQuery& q);

// Append-only JSON-lines evidence cache keyed by (query digest, url). Each
// line is an EvidenceItem object with an extra "query_digest" field.
class EvidenceStore {
 public:
  // Creates the file (and parent directories) if missing. Throws StoreUnavailable.
  explicit EvidenceStore(std::filesystem::path path);

  // Idempotent: a second put of the same key writes nothing. Returns the record id.
  std::string put(const EvidenceItem& item);
  std::optional<EvidenceItem> get(const SearchQuery& q, std::string_view url) const;
  // Items stored for a query, in insertion order; nullopt if the query was never stored.
  std::optional<std::vector<EvidenceItem>> find(const SearchQuery& q) const;
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, EvidenceItem> items_;                  // record id -> item
  std::map<std::string, std::vector<std::string>> by_query_;  // digest -> record ids
};

// Serves repeat queries from the store instead of the wrapped engine.
class CachingSearchClient : public SearchClient {
 public:
  CachingSearchClient(SearchClient& inner, EvidenceStore& store) : inner_(inner), store_(store) {}
  std::vector<EvidenceItem> search(const SearchQuery& q) override;
  std::string provider_id() const override { return inner_.provider_id() + "+cache"; }

 private:
  SearchClient& inner_;
  EvidenceStore& store_;
};

nlohmann::json to_json(const SearchQuery& q);
SearchQuery search_query_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvidenceItem& e);
EvidenceItem evidence_item_from_json(const nlohmann::json& j);

}  // namespace xcheck
