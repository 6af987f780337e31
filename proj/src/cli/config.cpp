#include "mirage/cli/config.hpp"

#include <algorithm>

#include "mirage/core/errors.hpp"
#include "mirage/core/io.hpp"
#include "mirage/provider/http_provider.hpp"
#include "mirage/provider/scripted.hpp"

namespace mirage::cli {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<fs::path> path_field(const nlohmann::json& obj, const char* key, const fs::path& base,
                                   const std::string& prefix) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string()) throw SchemaError(prefix + key, "expected a path string");
  return resolve(base, obj[key].get<std::string>());
}

template <typename T>
T number_field(const nlohmann::json& obj, const char* key, T fallback, const std::string& prefix, T min_value) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw SchemaError(prefix + key, "expected an integer");
  const auto v = obj[key].get<long long>();
  if (v < static_cast<long long>(min_value)) {
    throw SchemaError(prefix + key, "must be at least " + std::to_string(min_value));
  }
  return static_cast<T>(v);
}

}  // namespace

ModelSpec model_spec_from_json(const nlohmann::json& j, const fs::path& base_dir, const std::string& field) {
  if (!j.is_object()) throw SchemaError(field, "expected a model object");
  ModelSpec spec;
  const auto kind = j.value("kind", std::string("remote"));
  if (kind == "remote") {
    spec.kind = ModelSpec::Kind::Remote;
  } else if (kind == "scripted") {
    spec.kind = ModelSpec::Kind::Scripted;
  } else {
    throw SchemaError(field + ".kind", "expected 'remote' or 'scripted', got '" + kind + "'");
  }
  try {
    spec.cfg = provider::provider_config_from_json(j);
  } catch (const SchemaError& e) {
    auto sub = e.field();
    if (sub.rfind("provider", 0) == 0) sub = sub.substr(8);
    const std::string what = e.what();
    const auto cut = what.find("': ");
    throw SchemaError(field + sub, cut == std::string::npos ? what : what.substr(cut + 3));
  }
  if (spec.cfg.model_name.empty()) throw SchemaError(field + ".model", "model name is required");
  if (spec.kind == ModelSpec::Kind::Remote && spec.cfg.endpoint.empty()) {
    throw SchemaError(field + ".endpoint", "remote models need an endpoint");
  }
  if (spec.kind == ModelSpec::Kind::Scripted) {
    if (j.contains("script")) {
      spec.script = j["script"];
    } else if (j.contains("script_file")) {
      // One file or a list whose rule lists are concatenated in order.
      std::vector<std::string> files;
      const auto& sf = j["script_file"];
      if (sf.is_string()) {
        files.push_back(sf.get<std::string>());
      } else if (sf.is_array() && std::all_of(sf.begin(), sf.end(), [](const auto& x) { return x.is_string(); })) {
        for (const auto& x : sf) files.push_back(x.get<std::string>());
      } else {
        throw SchemaError(field + ".script_file", "expected a path string or a list of them");
      }
      spec.script = nlohmann::json::array();
      for (const auto& f : files) {
        const auto path = resolve(base_dir, f);
        nlohmann::json rules;
        try {
          rules = nlohmann::json::parse(read_text_file(path));
        } catch (const nlohmann::json::parse_error& e) {
          throw SchemaError(field + ".script_file", path.string() + ": " + e.what());
        }
        if (!rules.is_array()) throw SchemaError(field + ".script_file", path.string() + " is not a rule list");
        for (auto& r : rules) spec.script.push_back(std::move(r));
      }
    } else {
      throw SchemaError(field + ".script", "scripted models need 'script' or 'script_file'");
    }
    if (!spec.script.is_array()) throw SchemaError(field + ".script", "expected a rule list");
  }
  return spec;
}

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw SchemaError("<config>", "expected an object");
  RunConfig cfg;
  if (j.contains("models")) {
    const auto& m = j["models"];
    if (!m.is_object()) throw SchemaError("models", "expected an object");
    auto list = [&](const char* key, std::vector<ModelSpec>& out) {
      if (!m.contains(key)) return;
      if (!m[key].is_array()) throw SchemaError(std::string("models.") + key, "expected a list");
      for (std::size_t i = 0; i < m[key].size(); ++i) {
        out.push_back(model_spec_from_json(m[key][i], base_dir, std::string("models.") + key + "[" + std::to_string(i) + "]"));
      }
    };
    auto one = [&](const char* key, std::optional<ModelSpec>& out) {
      if (m.contains(key) && !m[key].is_null()) out = model_spec_from_json(m[key], base_dir, std::string("models.") + key);
    };
    list("detectors", cfg.detectors);
    list("judges", cfg.judges);
    one("generator", cfg.generator);
    one("agent", cfg.agent);
    one("planner", cfg.planner);
    one("eval_judge", cfg.eval_judge);
    one("scorer", cfg.scorer);
    one("embedder", cfg.embedder_model);
  }
  if (j.contains("retrieval")) {
    const auto& r = j["retrieval"];
    if (!r.is_object()) throw SchemaError("retrieval", "expected an object");
    cfg.top_k = number_field<std::size_t>(r, "top_k", cfg.top_k, "retrieval.", 1);
    cfg.stub_dim = number_field<std::size_t>(r, "stub_dim", cfg.stub_dim, "retrieval.", 1);
    if (r.contains("embedder")) {
      if (!r["embedder"].is_string()) throw SchemaError("retrieval.embedder", "expected 'stub' or 'remote'");
      cfg.embedder = r["embedder"].get<std::string>();
      if (cfg.embedder != "stub" && cfg.embedder != "remote") {
        throw SchemaError("retrieval.embedder", "expected 'stub' or 'remote', got '" + cfg.embedder + "'");
      }
    }
  }
  if (j.contains("agent")) {
    const auto& a = j["agent"];
    if (!a.is_object()) throw SchemaError("agent", "expected an object");
    cfg.max_iterations = number_field<int>(a, "max_iterations", cfg.max_iterations, "agent.", 1);
    cfg.max_searches = number_field<int>(a, "max_searches", cfg.max_searches, "agent.", 0);
  }
  if (j.contains("diva")) {
    cfg.diva_interpretations = number_field<std::size_t>(j["diva"], "interpretations", cfg.diva_interpretations, "diva.", 1);
  }
  cfg.workers = number_field<std::size_t>(j, "workers", cfg.workers, "", 1);
  cfg.prompts_dir = path_field(j, "prompts_dir", base_dir, "");
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    if (!p.is_object()) throw SchemaError("paths", "expected an object");
    cfg.corpus = path_field(p, "corpus", base_dir, "paths.");
    cfg.vectors = path_field(p, "vectors", base_dir, "paths.");
    cfg.dataset = path_field(p, "dataset", base_dir, "paths.");
    cfg.questions = path_field(p, "questions", base_dir, "paths.");
    cfg.out = path_field(p, "out", base_dir, "paths.");
  }
  if (cfg.embedder == "remote" && !cfg.embedder_model) {
    throw SchemaError("models.embedder", "remote retrieval needs an embedder model");
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("<config>", path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

ModelFactory::ModelFactory(std::size_t workers) : workers_(workers) {}

provider::LlmClient ModelFactory::make(const ModelSpec& spec) {
  if (spec.kind == ModelSpec::Kind::Scripted) {
    return provider::LlmClient(provider::ScriptedProvider::from_json(spec.script), spec.cfg);
  }
  if (!http_) http_ = std::make_shared<provider::HttpProvider>(static_cast<int>(workers_));
  return provider::LlmClient(http_, spec.cfg);
}

std::shared_ptr<const retrieval::Embedder> make_embedder(const RunConfig& cfg) {
  if (cfg.embedder == "remote") {
    return std::make_shared<retrieval::RemoteEmbedder>(cfg.embedder_model->cfg, provider::httplib_post);
  }
  return std::make_shared<retrieval::HashEmbedder>(cfg.stub_dim);
}

}  // namespace mirage::cli
