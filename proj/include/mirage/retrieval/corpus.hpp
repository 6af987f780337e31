#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mirage/core/types.hpp"
#include "mirage/retrieval/embedder.hpp"

namespace mirage::retrieval {

/// Passages with aligned unit-norm vectors. Immutable after construction.
class Corpus {
 public:
  /// Embeds every passage once (see passage_embedding_text) and normalizes.
  /// Throws PreconditionError on an empty list or duplicate doc_id,
  /// EmbedderError (carrying the passage id) when the embedder fails and
  /// DimensionMismatch when dimensions disagree.
  static Corpus ingest(std::vector<Passage> passages, const Embedder& embedder);

  /// Builds a corpus from precomputed vectors (normalized on the way in).
  static Corpus from_vectors(std::vector<Passage> passages, std::vector<std::vector<float>> vectors);

  std::size_t size() const noexcept { return passages_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return passages_.empty(); }

  const Passage& passage(std::size_t i) const { return passages_.at(i); }
  const std::vector<Passage>& passages() const noexcept { return passages_; }
  std::span<const float> vector(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::optional<std::size_t> find(std::string_view doc_id) const;

 private:
  Corpus() = default;
  void index_ids();

  std::vector<Passage> passages_;
  std::vector<float> data_;  // row-major size() x dim()
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Reads newline-delimited {doc_id, title, text} records.
std::vector<Passage> load_passages(const std::filesystem::path& path);

/// Sidecar vector file: u32 count, u32 dim, then count*dim little-endian
/// float32 values in row-major order.
struct VectorFile {
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;

  std::vector<std::vector<float>> rows() const;
};

VectorFile read_vector_file(const std::filesystem::path& path);
void write_vector_file(const std::filesystem::path& path, const Corpus& corpus);

/// Loads passages and, when `vectors` names an existing sidecar whose count
/// matches, uses it instead of re-embedding.
Corpus load_corpus(const std::filesystem::path& passages, const Embedder& embedder,
                   const std::optional<std::filesystem::path>& vectors = std::nullopt);

}  // namespace mirage::retrieval
