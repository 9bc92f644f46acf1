#pragma once

// JSON-over-HTTP(S) clients for live mode. All failures (connect, timeout,
// non-2xx status, undecodable body) surface as Error{ProviderUnavailable}.

#include <string>
#include <string_view>

#include "xcheck/llm.hpp"
#include "xcheck/search.hpp"
#include "xcheck/textembed.hpp"

namespace xcheck {

struct HttpOptions {
  int timeout_seconds = 30;
  std::string bearer_token;  // sent as "Authorization: Bearer ..." when set
};

// "https://host:8443/v1/chat" -> {"https://host:8443", "/v1/chat"}.
struct HttpEndpoint {
  std::string base;
  std::string path;
};
HttpEndpoint split_url(std::string_view url);

// OpenAI-compatible chat completions endpoint, temperature 0.
class HttpLlm : public LlmProvider {
 public:
  HttpLlm(std::string url, std::string model, HttpOptions opts = {});
  std::string complete(const LlmRequest& req) override;
  std::string provider_id() const override { return "http-llm:" + model_; }

 private:
  HttpEndpoint ep_;
  std::string model_;
  HttpOptions opts_;
};

// POST {"kind", "query", "num"} -> {"results": [{"url", "title", "text", "image_ref"}]}.
class HttpSearchClient : public SearchClient {
 public:
  HttpSearchClient(std::string url, HttpOptions opts = {}, std::size_t paragraphs = 3);
  std::vector<EvidenceItem> search(const SearchQuery& q) override;
  std::string provider_id() const override { return "http-search"; }

 private:
  HttpEndpoint ep_;
  HttpOptions opts_;
  std::size_t paragraphs_;
};

// POST {"texts": [...]} -> {"embeddings": [[...], ...]}.
class HttpEmbedder : public EmbeddingProvider {
 public:
  explicit HttpEmbedder(std::string url, HttpOptions opts = {});
  Embedding embed(std::string_view text) override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) override;
  std::string provider_id() const override { return "http-embed"; }

 private:
  HttpEndpoint ep_;
  HttpOptions opts_;
};

}  // namespace xcheck
