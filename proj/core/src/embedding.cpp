#include "nsplan/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

double Vector::norm() const noexcept {
  double sum = 0.0;
  for (double c : components) sum += c * c;
  return std::sqrt(sum);
}

bool Vector::is_zero() const noexcept {
  return std::all_of(components.begin(), components.end(), [](double c) { return c == 0.0; });
}

Vector l2_normalized(Vector v) {
  double n = v.norm();
  if (n == 0.0) return v;
  for (double& c : v.components) c /= n;
  return v;
}

double cosine(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) {
    throw ContractError("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()) + ")");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.components[i] * b.components[i];
    na += a.components[i] * a.components[i];
    nb += b.components[i] * b.components[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double euclidean_distance(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw ContractError("euclidean_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double d = a.components[i] - b.components[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<Vector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

HashEmbedding::HashEmbedding(HashEmbeddingOptions options) : options_(options) {
  if (options_.dim == 0) throw ContractError("hash embedding dim must be positive");
}

EmbeddingLookup HashEmbedding::lookup(std::string_view text) const {
  auto v = Vector::zeros(options_.dim);
  auto bump = [&](std::string_view feature) {
    auto bucket = splitmix64(fnv1a64(feature) ^ options_.seed) % options_.dim;
    v.components[bucket] += 1.0;
  };
  auto words = word_tokens(text);
  for (const auto& w : words) bump(w);
  if (options_.bigrams) {
    for (std::size_t i = 1; i < words.size(); ++i) bump(words[i - 1] + " " + words[i]);
  }
  return {l2_normalized(std::move(v)), false};
}

TableEmbedding::TableEmbedding(std::size_t dim, std::uint64_t fallback_seed)
    : dim_(dim), fallback_(HashEmbeddingOptions{dim, fallback_seed, true}) {}

TableEmbedding TableEmbedding::parse(std::istream& in, std::uint64_t fallback_seed) {
  std::unordered_map<std::string, Vector> rows;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no, 0);
    }
    if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string() || !obj.contains("vector") ||
        !obj["vector"].is_array()) {
      throw ParseError("expected {\"text\": string, \"vector\": [numbers]}", line_no, 0);
    }
    std::vector<double> components;
    for (const auto& c : obj["vector"]) {
      if (!c.is_number()) throw ParseError("vector entries must be numbers", line_no, 0);
      components.push_back(c.get<double>());
    }
    if (components.empty()) throw ParseError("empty vector", line_no, 0);
    if (dim == 0) dim = components.size();
    if (components.size() != dim) {
      throw ParseError("vector has dim " + std::to_string(components.size()) + ", table dim is " +
                           std::to_string(dim),
                       line_no, 0);
    }
    rows[obj["text"].get<std::string>()] = l2_normalized(Vector(std::move(components)));
  }
  if (dim == 0) throw ParseError("embedding table is empty", 0, 0);
  TableEmbedding table(dim, fallback_seed);
  table.rows_ = std::move(rows);
  return table;
}

TableEmbedding TableEmbedding::load(const std::filesystem::path& path, std::uint64_t fallback_seed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding table " + path.string());
  return parse(in, fallback_seed);
}

EmbeddingLookup TableEmbedding::lookup(std::string_view text) const {
  auto it = rows_.find(std::string(text));
  if (it != rows_.end()) return {it->second, false};
  auto result = fallback_.lookup(text);
  result.fallback = true;
  return result;
}

RemoteEmbedding::RemoteEmbedding(RemoteEmbeddingOptions options)
    : options_(std::move(options)), client_(options_.http), dim_(options_.dim) {
  if (options_.batch_size == 0) options_.batch_size = 1;
}

std::size_t RemoteEmbedding::dim() const {
  std::lock_guard lock(mutex_);
  return dim_;
}

std::size_t RemoteEmbedding::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::vector<Vector> RemoteEmbedding::fetch(std::span<const std::string> texts) const {
  nlohmann::json body{{"input", std::vector<std::string>(texts.begin(), texts.end())}};
  if (!options_.model.empty()) body["model"] = options_.model;
  auto response = client_.post(body);

  auto protocol_error = [&](const std::string& what) {
    return TransportError(client_.url(), 200, "malformed embedding response: " + what);
  };
  if (!response.is_object() || !response.contains("data") || !response["data"].is_array()) {
    throw protocol_error("missing \"data\" array");
  }
  const auto& data = response["data"];
  if (data.size() != texts.size()) throw protocol_error("expected " + std::to_string(texts.size()) + " rows");
  std::vector<Vector> out;
  for (const auto& row : data) {
    if (!row.is_object() || !row.contains("embedding") || !row["embedding"].is_array()) {
      throw protocol_error("row without \"embedding\" array");
    }
    std::vector<double> components;
    for (const auto& c : row["embedding"]) {
      if (!c.is_number()) throw protocol_error("non-numeric embedding entry");
      components.push_back(c.get<double>());
    }
    out.push_back(l2_normalized(Vector(std::move(components))));
  }
  std::lock_guard lock(mutex_);
  for (const auto& v : out) {
    if (dim_ == 0) dim_ = v.dim();
    if (v.dim() != dim_) throw protocol_error("dimension " + std::to_string(v.dim()) + " != " + std::to_string(dim_));
  }
  return out;
}

EmbeddingLookup RemoteEmbedding::lookup(std::string_view text) const {
  std::string key(text);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return {it->second, false};
  }
  auto vectors = fetch(std::span<const std::string>(&key, 1));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(vectors.front()));
  return {it->second, false};
}

std::vector<Vector> RemoteEmbedding::embed_batch(std::span<const std::string> texts) const {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mutex_);
    for (const auto& t : texts) {
      if (!cache_.contains(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    }
  }
  for (std::size_t start = 0; start < missing.size(); start += options_.batch_size) {
    auto count = std::min(options_.batch_size, missing.size() - start);
    auto chunk = std::span<const std::string>(missing).subspan(start, count);
    auto vectors = fetch(chunk);
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < count; ++i) cache_.emplace(chunk[i], std::move(vectors[i]));
  }
  std::vector<Vector> out;
  out.reserve(texts.size());
  std::lock_guard lock(mutex_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

}  // namespace nsplan
