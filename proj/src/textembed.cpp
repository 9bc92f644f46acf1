#include "xcheck/textembed.hpp"

#include <cstdint>

#include "xcheck/strings.hpp"

namespace xcheck {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void normalize_unit(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0) throw Error(ErrorCode::ZeroVector, "pinned stub vector is all zero");
  for (double& x : v) x /= n;
}

std::string key_of(std::string_view text) { return str::lower(str::squash(text)); }

}  // namespace

StubEmbedder::StubEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidConfig, "stub embedder dim must be positive");
}

void StubEmbedder::add_synonym(std::string_view canonical_text, std::string_view alias) {
  synonyms_[key_of(alias)] = canonical(canonical_text);
}

void StubEmbedder::pin(std::string_view text, std::vector<double> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::DimMismatch, "pinned vector has dim " + std::to_string(vector.size()) +
                                            ", embedder dim is " + std::to_string(dim_));
  }
  normalize_unit(vector);
  pinned_[key_of(text)] = std::move(vector);
}

std::string StubEmbedder::canonical(std::string_view text) const {
  auto key = key_of(text);
  auto it = synonyms_.find(key);
  return it == synonyms_.end() ? key : it->second;
}

Embedding StubEmbedder::embed(std::string_view text) {
  auto key = canonical(text);
  if (auto it = pinned_.find(key); it != pinned_.end()) return {it->second, provider_id()};

  std::uint64_t state = fnv1a(key) ^ (0x51ed270b27a3c9e5ULL * (dim_ + 1));
  std::vector<double> v(dim_);
  for (auto& x : v) {
    // 53 random mantissa bits mapped to [-1, 1)
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    x = 2.0 * u - 1.0;
  }
  normalize_unit(v);
  return {std::move(v), provider_id()};
}

Embedding stub_embed(std::string_view text, std::size_t dim) { return StubEmbedder(dim).embed(text); }

Embedding MemoEmbedder::embed(std::string_view text) {
  std::string key(text);
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  auto e = inner_->embed(text);
  std::lock_guard lock(mu_);
  return memo_.emplace(std::move(key), std::move(e)).first->second;
}

std::size_t MemoEmbedder::cached() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

}  // namespace xcheck
