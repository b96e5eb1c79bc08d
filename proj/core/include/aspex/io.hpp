#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "aspex/embeddings.hpp"
#include "aspex/eval.hpp"
#include "aspex/model.hpp"
#include "aspex/stats.hpp"
#include "aspex/train.hpp"

namespace aspex {

using json = nlohmann::ordered_json;

json to_json(const ModelConfig& c);
/// Reads the model keys of a flat config object; "variant" is required.
ModelConfig model_config_from_json(const json& j);

/// Experiment config file: one flat object holding model and training keys.
/// Unknown keys are rejected so every cell of an experiment grid is fully
/// spelled out.
struct ExperimentConfig {
  ModelConfig model;
  TrainSpec train;
  std::size_t embedding_dim = 300;
};

ExperimentConfig experiment_config_from_json(const json& j);
ExperimentConfig load_experiment_config(const std::string& path);
json to_json(const ExperimentConfig& c);

json to_json(const EvalReport& r);
json to_json(const CoverageReport& r);
/// Wall-clock time is left out so records of identical runs serialize
/// identically.
json to_json(const RunRecord& r);
json to_json(const TrainAggregate& a);

struct StatsSummary {
  FriedmanResult friedman;
  double cd = 0.0;
  double alpha = 0.05;
  std::vector<std::pair<std::size_t, std::size_t>> groups;
};

json to_json(const ResultGrid& grid, const StatsSummary& s);

// ---------------------------------------------------------------------------
// Checkpoints: one line of JSON header, then every parameter array as raw
// little-endian float64 in the order the header lists them.

void save_checkpoint(const std::string& path, Model& model, const json& extra = json::object());

struct Checkpoint {
  json header;
  ModelConfig config;
  CharVocab chars;
  ModelParams params;
  std::size_t word_dim = 0;

  /// Binds the stored parameters to an embedding table of matching name
  /// and dimension.
  Model attach(const EmbeddingTable& table) const;
};

/// Throws ValidationError on a missing, truncated or inconsistent file.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aspex
