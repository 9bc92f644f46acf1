#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xcheck/error.hpp"

namespace xcheck {

struct Embedding {
  std::vector<double> values;
  std::string provider_id;

  std::size_t dim() const { return values.size(); }
  bool operator==(const Embedding&) const = default;
};

// Cosine similarity in [-1, 1]. Throws DimMismatch or ZeroVector.
template <typename T>
double cosine_similarity(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch,
                "cannot compare vectors of dim " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of an all-zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline double cosine(const Embedding& a, const Embedding& b) {
  return cosine_similarity<double>(a.values, b.values);
}

// Text embedding service. Implementations must be deterministic for a given
// text within a session and safe for concurrent calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual Embedding embed(std::string_view text) = 0;
  virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
  }
  virtual std::string provider_id() const = 0;
};

// Offline test double. Each text maps to a hash-seeded unit vector. Texts in
// the synonym table share their canonical text's vector, and pinned texts
// return a caller-fixed vector (normalized).
class StubEmbedder final : public EmbeddingProvider {
 public:
  explicit StubEmbedder(std::size_t dim = 256);

  // Makes `alias` embed exactly like `canonical`.
  void add_synonym(std::string_view canonical, std::string_view alias);
  void pin(std::string_view text, std::vector<double> vector);

  Embedding embed(std::string_view text) override;
  std::string provider_id() const override { return "stub-" + std::to_string(dim_); }
  std::size_t dim() const { return dim_; }

 private:
  std::string canonical(std::string_view text) const;

  std::size_t dim_;
  std::map<std::string, std::string> synonyms_;
  std::map<std::string, std::vector<double>> pinned_;
};

Embedding stub_embed(std::string_view text, std::size_t dim);

// Memoizing decorator; the wrapped provider is called once per distinct text.
class MemoEmbedder final : public EmbeddingProvider {
 public:
  explicit MemoEmbedder(std::shared_ptr<EmbeddingProvider> inner) : inner_(std::move(inner)) {}

  Embedding embed(std::string_view text) override;
  std::string provider_id() const override { return inner_->provider_id(); }
  std::size_t cached() const;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Embedding> memo_;
};

}  // namespace xcheck
