#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "mirage/core/types.hpp"
#include "mirage/provider/scripted.hpp"
#include "mirage/retrieval/corpus.hpp"
#include "mirage/retrieval/embedder.hpp"
#include "mirage/retrieval/search.hpp"

namespace testsupport {

inline const std::filesystem::path kSourceDir = MIRAGE_SOURCE_DIR;

inline mirage::provider::LlmClient client(std::shared_ptr<mirage::provider::Provider> p, std::string model = "m") {
  mirage::provider::ProviderConfig cfg;
  cfg.model_name = std::move(model);
  return {std::move(p), cfg};
}

/// A two-reading instance that passes validation.
inline mirage::MirageInstance valid_instance(std::string id = "q1") {
  mirage::MirageInstance inst;
  inst.question = {id, "Who played the Joker in the Batman film?", 2};
  inst.type = mirage::AmbiguityType::Semantic;
  inst.clarified = {{id, inst.type, "Who played the Joker in the 1989 Batman film?", 1},
                    {id, inst.type, "Who played the Joker in The Dark Knight?", 2}};
  inst.short_answers = {{1, "Jack Nicholson", "p1"}, {2, "Heath Ledger", "p2"}};
  inst.evidence = {{"p1", "Batman (1989 film)", "Jack Nicholson played the Joker."},
                   {"p2", "The Dark Knight", "Heath Ledger played the Joker."}};
  inst.long_answer = "Jack Nicholson played the Joker in 1989 and Heath Ledger in The Dark Knight.";
  return inst;
}

inline std::vector<mirage::Passage> topic_passages() {
  return {
      {"p0", "River delta", "A river delta forms where a river meets the sea."},
      {"p1", "Mountain pass", "A mountain pass is a route through a mountain range."},
      {"p2", "City council", "The city council votes on the city budget."},
      {"p3", "Film director", "The film director chose the cast of the film."},
      {"p4", "Ship captain", "The ship captain steered the ship through the storm."},
      {"p5", "Chemical element", "Mercury is a chemical element that is liquid metal."},
      {"p6", "Football final", "France won the football final against Brazil."},
      {"p7", "Painting museum", "The museum shows a famous painting by Leonardo."},
  };
}

struct TopicRetriever {
  std::shared_ptr<mirage::retrieval::HashEmbedder> embedder = std::make_shared<mirage::retrieval::HashEmbedder>(64);
  std::shared_ptr<const mirage::retrieval::Corpus> corpus = std::make_shared<const mirage::retrieval::Corpus>(
      mirage::retrieval::Corpus::ingest(topic_passages(), *embedder));
  mirage::retrieval::CorpusRetriever retriever{corpus, embedder};
};

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("mirage-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testsupport
