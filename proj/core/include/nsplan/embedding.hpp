#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nsplan/http_transport.hpp"

namespace nsplan {

struct Vector {
  std::vector<double> components;

  Vector() = default;
  explicit Vector(std::vector<double> c) : components(std::move(c)) {}
  static Vector zeros(std::size_t dim) { return Vector(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const noexcept { return components.size(); }
  double norm() const noexcept;
  bool is_zero() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;
};

/// Scales to unit L2 norm; zero vectors are returned unchanged.
Vector l2_normalized(Vector v);

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]; 0 when either side is zero.
/// Throws ContractError when dimensions differ.
double cosine(const Vector& a, const Vector& b);

double euclidean_distance(const Vector& a, const Vector& b);

struct EmbeddingLookup {
  Vector vector;
  /// Set when a table provider missed and answered from its hash fallback.
  bool fallback = false;
};

/// Text encoder interface. Implementations are deterministic (or memoized)
/// and safe for concurrent calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string_view kind() const noexcept = 0;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingLookup lookup(std::string_view text) const = 0;

  Vector embed(std::string_view text) const { return lookup(text).vector; }
  virtual std::vector<Vector> embed_batch(std::span<const std::string> texts) const;
};

struct HashEmbeddingOptions {
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  /// Unigram-only mode drops the word-order-sensitive bigram features.
  bool bigrams = true;
};

/// Feature hashing of lowercase word unigrams and bigrams.
///
/// Each feature string (a word, or two adjacent words joined by one space)
/// lands in bucket splitmix64(fnv1a64(feature) ^ seed) % dim with weight +1;
/// the count vector is then L2-normalized. Text without words maps to the
/// zero vector.
class HashEmbedding final : public EmbeddingProvider {
 public:
  explicit HashEmbedding(HashEmbeddingOptions options = {});

  std::string_view kind() const noexcept override { return "hash"; }
  std::size_t dim() const override { return options_.dim; }
  EmbeddingLookup lookup(std::string_view text) const override;

  const HashEmbeddingOptions& options() const noexcept { return options_; }

 private:
  HashEmbeddingOptions options_;
};

/// splitmix64 finalizer, exposed for reproducibility checks.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Exact-text lookup table read from JSONL rows {"text": ..., "vector": [...]}.
/// Rows are normalized on load. Misses fall back to a hash embedding of the
/// same dimension and are flagged.
class TableEmbedding final : public EmbeddingProvider {
 public:
  static TableEmbedding parse(std::istream& in, std::uint64_t fallback_seed = 0);
  static TableEmbedding load(const std::filesystem::path& path, std::uint64_t fallback_seed = 0);

  std::string_view kind() const noexcept override { return "table"; }
  std::size_t dim() const override { return dim_; }
  EmbeddingLookup lookup(std::string_view text) const override;

  std::size_t size() const noexcept { return rows_.size(); }

 private:
  TableEmbedding(std::size_t dim, std::uint64_t fallback_seed);

  std::size_t dim_;
  std::unordered_map<std::string, Vector> rows_;
  HashEmbedding fallback_;
};

struct RemoteEmbeddingOptions {
  HttpOptions http;
  std::string model;
  /// Expected dimension; 0 accepts whatever the service returns first.
  std::size_t dim = 0;
  /// Texts per request in embed_batch.
  std::size_t batch_size = 64;
};

/// Embedding service client. Request: {"input": [strings]} (plus "model"
/// when set). Response: {"data": [{"embedding": [numbers]}, ...]} in input
/// order. Results are memoized by exact text.
class RemoteEmbedding final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedding(RemoteEmbeddingOptions options);

  std::string_view kind() const noexcept override { return "remote"; }
  std::size_t dim() const override;
  EmbeddingLookup lookup(std::string_view text) const override;
  std::vector<Vector> embed_batch(std::span<const std::string> texts) const override;

  std::size_t cache_size() const;

 private:
  std::vector<Vector> fetch(std::span<const std::string> texts) const;

  RemoteEmbeddingOptions options_;
  JsonHttpClient client_;
  mutable std::mutex mutex_;
  mutable std::size_t dim_;
  mutable std::unordered_map<std::string, Vector> cache_;
};

}  // namespace nsplan
