#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirage/provider/provider.hpp"
#include "mirage/retrieval/embedder.hpp"

namespace mirage::cli {

/// One model entry in the config: how to reach it and how to call it.
struct ModelSpec {
  enum class Kind { Remote, Scripted };
  Kind kind = Kind::Remote;
  provider::ProviderConfig cfg;
  nlohmann::json script;  // rule list for scripted models
};

struct RunConfig {
  std::vector<ModelSpec> detectors;
  std::optional<ModelSpec> generator;
  std::vector<ModelSpec> judges;
  std::optional<ModelSpec> agent;
  std::optional<ModelSpec> planner;     // falls back to agent
  std::optional<ModelSpec> eval_judge;  // falls back to judges[0]
  std::optional<ModelSpec> scorer;
  std::optional<ModelSpec> embedder_model;

  std::size_t top_k = 10;
  std::string embedder = "stub";  // stub | remote
  std::size_t stub_dim = 64;

  int max_iterations = 5;
  int max_searches = 5;
  std::size_t diva_interpretations = 3;
  std::size_t workers = 4;

  std::optional<std::filesystem::path> prompts_dir;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> vectors;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> questions;
  std::optional<std::filesystem::path> out;
};

ModelSpec model_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                               const std::string& field);

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Credentials are never read from the document, only from the environment
/// variable each model names.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

RunConfig load_run_config(const std::filesystem::path& path);

/// Builds clients for model specs. Remote models share one HTTP gateway
/// whose in-flight cap is the worker count.
class ModelFactory {
 public:
  explicit ModelFactory(std::size_t workers);
  provider::LlmClient make(const ModelSpec& spec);

 private:
  std::size_t workers_;
  std::shared_ptr<provider::Provider> http_;
};

std::shared_ptr<const retrieval::Embedder> make_embedder(const RunConfig& cfg);

}  // namespace mirage::cli
