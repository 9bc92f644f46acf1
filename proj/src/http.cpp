#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "xcheck/http.hpp"

#include "xcheck/error.hpp"
#include "xcheck/imagematch.hpp"
#include "xcheck/strings.hpp"

namespace xcheck {

using nlohmann::json;

HttpEndpoint split_url(std::string_view url) {
  auto u = str::trim(url);
  auto scheme = u.find("://");
  if (scheme == std::string_view::npos || (u.substr(0, scheme) != "http" && u.substr(0, scheme) != "https")) {
    throw Error(ErrorCode::InvalidConfig, "expected an http(s) URL, got '" + std::string(u) + "'");
  }
  auto slash = u.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(u), "/"};
  return {std::string(u.substr(0, slash)), std::string(u.substr(slash))};
}

namespace {

json post_json(const HttpEndpoint& ep, const HttpOptions& opts, const json& body) {
  httplib::Client cli(ep.base);
  cli.set_connection_timeout(opts.timeout_seconds, 0);
  cli.set_read_timeout(opts.timeout_seconds, 0);
  cli.set_write_timeout(opts.timeout_seconds, 0);
  httplib::Headers headers;
  if (!opts.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + opts.bearer_token);
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  const auto where = ep.base + ep.path;
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable, where + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::ProviderUnavailable, where + ": HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, where + ": undecodable response: " + e.what());
  }
}

// Runs a decoder over a response, turning shape errors into ProviderUnavailable.
template <typename F>
auto decode(const HttpEndpoint& ep, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, ep.base + ep.path + ": unexpected response shape: " + e.what());
  }
}

}  // namespace

HttpLlm::HttpLlm(std::string url, std::string model, HttpOptions opts)
    : ep_(split_url(url)), model_(std::move(model)), opts_(std::move(opts)) {}

std::string HttpLlm::complete(const LlmRequest& req) {
  json body{{"model", model_},
            {"temperature", 0},
            {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})}};
  auto res = post_json(ep_, opts_, body);
  return decode(ep_, [&] { return res.at("choices").at(0).at("message").at("content").get<std::string>(); });
}

HttpSearchClient::HttpSearchClient(std::string url, HttpOptions opts, std::size_t paragraphs)
    : ep_(split_url(url)), opts_(std::move(opts)), paragraphs_(paragraphs) {}

std::vector<EvidenceItem> HttpSearchClient::search(const SearchQuery& q) {
  json body{{"kind", q.kind == SearchKind::DirectText ? "direct_text" : "reverse_image"},
            {"query", q.payload},
            {"num", q.max_results}};
  auto res = post_json(ep_, opts_, body);
  const auto stamp = now_iso8601();
  return decode(ep_, [&] {
    std::vector<EvidenceItem> out;
    for (const auto& r : res.at("results")) {
      EvidenceItem item;
      item.source_url = r.at("url").get<std::string>();
      item.source_domain = domain_of(item.source_url);
      auto text = excerpt(r.value("title", std::string()), r.value("text", std::string()), paragraphs_);
      if (!text.empty()) item.contextual_text = std::move(text);
      if (r.contains("image_ref") && r["image_ref"].is_string()) item.image_ref = r["image_ref"].get<std::string>();
      // services that run feature extraction on the page image return it inline
      if (r.contains("feature_bundle") && r["feature_bundle"].is_object()) {
        try {
          item.feature_bundle = bundle_from_json(r["feature_bundle"]);
        } catch (const Error& e) {
          throw Error(ErrorCode::ProviderUnavailable, ep_.base + ep_.path + ": bad feature bundle for " +
                                                          item.source_url + ": " + e.detail());
        }
      }
      item.retrieved_at = stamp;
      item.query_used = q;
      out.push_back(std::move(item));
    }
    return out;
  });
}

HttpEmbedder::HttpEmbedder(std::string url, HttpOptions opts) : ep_(split_url(url)), opts_(std::move(opts)) {}

Embedding HttpEmbedder::embed(std::string_view text) {
  std::string t(text);
  return embed_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<Embedding> HttpEmbedder::embed_batch(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  auto res = post_json(ep_, opts_, json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}});
  return decode(ep_, [&] {
    const auto& rows = res.at("embeddings");
    if (rows.size() != texts.size()) {
      throw Error(ErrorCode::ProviderUnavailable, "embedding service returned " + std::to_string(rows.size()) +
                                                      " vectors for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<Embedding> out;
    for (const auto& r : rows) out.push_back({r.get<std::vector<double>>(), provider_id()});
    return out;
  });
}

}  // namespace xcheck
