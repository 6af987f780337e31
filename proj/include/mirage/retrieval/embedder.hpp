#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirage/core/errors.hpp"
#include "mirage/core/types.hpp"
#include "mirage/provider/http_provider.hpp"

namespace mirage::retrieval {

class EmbedderError : public Error {
 public:
  EmbedderError(std::string item_id, const std::string& detail)
      : Error("embedding failed for '" + item_id + "': " + detail), item_id_(std::move(item_id)) {}
  const std::string& item_id() const noexcept { return item_id_; }

 private:
  std::string item_id_;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("embedding dimension " + std::to_string(got) + " != expected " + std::to_string(expected)) {}
};

/// Text embedding service. Implementations must be thread-safe.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<float> embed(std::string_view text) const = 0;
};

/// Deterministic offline embedder: signed feature hashing of the normalized
/// tokens into `dim` buckets, L2-normalized. Identical texts map to identical
/// vectors; texts sharing tokens have positive similarity.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 64);
  std::vector<float> embed(std::string_view text) const override;
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
};

/// Embeddings endpoint client: POSTs {"model", "input"} and reads
/// data[0].embedding. Shares the chat gateway's credential and retry rules.
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(provider::ProviderConfig cfg, provider::HttpPost post = provider::httplib_post);
  std::vector<float> embed(std::string_view text) const override;

 private:
  provider::ProviderConfig cfg_;
  provider::HttpPost post_;
};

/// The text embedded for a passage: title and body joined by one newline.
std::string passage_embedding_text(const Passage& p);

/// Returns v / |v|. Throws PreconditionError on a zero or non-finite vector.
std::vector<float> l2_normalize(std::span<const float> v);

/// Dot product accumulated in double, in index order.
double dot(std::span<const float> a, std::span<const float> b);

}  // namespace mirage::retrieval
