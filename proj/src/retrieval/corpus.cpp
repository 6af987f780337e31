#include "mirage/retrieval/corpus.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "mirage/core/errors.hpp"
#include "mirage/core/io.hpp"

namespace mirage::retrieval {

namespace fs = std::filesystem;

void Corpus::index_ids() {
  by_id_.clear();
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    if (!by_id_.emplace(passages_[i].doc_id, i).second) {
      throw PreconditionError("duplicate doc_id '" + passages_[i].doc_id + "' in corpus");
    }
  }
}

Corpus Corpus::ingest(std::vector<Passage> passages, const Embedder& embedder) {
  if (passages.empty()) throw PreconditionError("cannot ingest an empty passage list");
  std::vector<std::vector<float>> vectors;
  vectors.reserve(passages.size());
  for (const auto& p : passages) {
    try {
      vectors.push_back(embedder.embed(passage_embedding_text(p)));
    } catch (const DimensionMismatch&) {
      throw;
    } catch (const std::exception& e) {
      throw EmbedderError(p.doc_id, e.what());
    }
  }
  return from_vectors(std::move(passages), std::move(vectors));
}

Corpus Corpus::from_vectors(std::vector<Passage> passages, std::vector<std::vector<float>> vectors) {
  if (passages.empty()) throw PreconditionError("cannot build an empty corpus");
  if (passages.size() != vectors.size()) {
    throw PreconditionError("passage count " + std::to_string(passages.size()) + " != vector count " +
                            std::to_string(vectors.size()));
  }
  Corpus c;
  c.dim_ = vectors.front().size();
  if (c.dim_ == 0) throw PreconditionError("embedding dimension must be positive");
  c.data_.reserve(c.dim_ * vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != c.dim_) throw DimensionMismatch(c.dim_, vectors[i].size());
    std::vector<float> unit;
    try {
      unit = l2_normalize(vectors[i]);
    } catch (const PreconditionError& e) {
      throw EmbedderError(passages[i].doc_id, e.what());
    }
    c.data_.insert(c.data_.end(), unit.begin(), unit.end());
  }
  c.passages_ = std::move(passages);
  c.index_ids();
  return c;
}

std::optional<std::size_t> Corpus::find(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<Passage> load_passages(const fs::path& path) {
  std::vector<Passage> out;
  for (const auto& r : read_jsonl(path)) {
    if (!r.is_object()) throw SchemaError("<passage>", "expected an object");
    Passage p;
    for (const char* key : {"doc_id", "title", "text"}) {
      if (!r.contains(key) || !r[key].is_string()) throw SchemaError(key, "missing or not a string");
    }
    p.doc_id = r["doc_id"].get<std::string>();
    p.title = r["title"].get<std::string>();
    p.text = r["text"].get<std::string>();
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

static_assert(std::endian::native == std::endian::little, "vector files assume a little-endian host");

template <typename T>
void read_raw(std::ifstream& in, T* dst, std::size_t n, const fs::path& path) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw IoError("truncated vector file '" + path.string() + "'");
}

}  // namespace

std::vector<std::vector<float>> VectorFile::rows() const {
  std::vector<std::vector<float>> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].assign(values.begin() + static_cast<std::ptrdiff_t>(i * dim),
                  values.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
  }
  return out;
}

VectorFile read_vector_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  VectorFile vf;
  read_raw(in, &vf.count, 1, path);
  read_raw(in, &vf.dim, 1, path);
  vf.values.resize(static_cast<std::size_t>(vf.count) * vf.dim);
  if (!vf.values.empty()) read_raw(in, vf.values.data(), vf.values.size(), path);
  return vf;
}

void write_vector_file(const fs::path& path, const Corpus& corpus) {
  std::string buf;
  const auto count = static_cast<std::uint32_t>(corpus.size());
  const auto dim = static_cast<std::uint32_t>(corpus.dim());
  buf.append(reinterpret_cast<const char*>(&count), sizeof count);
  buf.append(reinterpret_cast<const char*>(&dim), sizeof dim);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto row = corpus.vector(i);
    buf.append(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
  write_file_atomic(path, buf);
}

Corpus load_corpus(const fs::path& passages_path, const Embedder& embedder,
                   const std::optional<fs::path>& vectors) {
  auto passages = load_passages(passages_path);
  if (vectors && fs::exists(*vectors)) {
    auto vf = read_vector_file(*vectors);
    if (vf.count == passages.size()) return Corpus::from_vectors(std::move(passages), vf.rows());
  }
  return Corpus::ingest(std::move(passages), embedder);
}

}  // namespace mirage::retrieval
