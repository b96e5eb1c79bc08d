#include "aspex/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "aspex/common.hpp"

namespace aspex {

namespace {

constexpr std::string_view kCheckpointFormat = "aspex-checkpoint";
constexpr int kCheckpointVersion = 1;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xFF) << (8 * (7 - i));
    return r;
  }
  return x;
}

}  // namespace

json to_json(const ModelConfig& c) {
  return json{{"variant", c.variant()},
              {"embedding", c.embedding},
              {"hidden", c.hidden},
              {"max_length", c.max_length},
              {"dropout", c.dropout},
              {"seed", c.seed},
              {"char_dim", c.char_dims.char_dim},
              {"char_hidden", c.char_dims.hidden},
              {"char_output", c.char_dims.output},
              {"constrained_decoding", c.constrained_decoding}};
}

ModelConfig model_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("variant")) throw ConfigError("config is missing 'variant'");
  ModelConfig c = ModelConfig::from_variant(get_or<std::string>(j, "variant", ""));
  c.embedding = get_or<std::string>(j, "embedding", c.embedding);
  c.hidden = get_or<Eigen::Index>(j, "hidden", c.hidden);
  c.max_length = get_or<std::size_t>(j, "max_length", c.max_length);
  c.dropout = get_or<double>(j, "dropout", c.dropout);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.char_dims.char_dim = get_or<Eigen::Index>(j, "char_dim", c.char_dims.char_dim);
  c.char_dims.hidden = get_or<Eigen::Index>(j, "char_hidden", c.char_dims.hidden);
  c.char_dims.output = get_or<Eigen::Index>(j, "char_output", c.char_dims.output);
  c.constrained_decoding = get_or<bool>(j, "constrained_decoding", c.constrained_decoding);
  return c;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "variant",    "embedding",   "embedding_dim",   "hidden",     "max_length",
      "dropout",    "seed",        "char_dim",        "char_hidden", "char_output",
      "constrained_decoding",      "batch_size",      "max_epochs", "patience",
      "runs",       "monitor",     "monitor_fraction", "clip_norm", "learning_rate",
      "beta1",      "beta2",       "epsilon"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  ExperimentConfig c;
  c.model = model_config_from_json(j);
  c.embedding_dim = get_or<std::size_t>(j, "embedding_dim", c.embedding_dim);
  auto& t = c.train;
  t.batch_size = get_or<std::size_t>(j, "batch_size", t.batch_size);
  t.max_epochs = get_or<std::size_t>(j, "max_epochs", t.max_epochs);
  t.patience = get_or<std::size_t>(j, "patience", t.patience);
  t.runs = get_or<std::size_t>(j, "runs", t.runs);
  t.seed = c.model.seed;
  t.monitor = parse_monitor(get_or<std::string>(j, "monitor", "heldout"));
  t.monitor_fraction = get_or<double>(j, "monitor_fraction", t.monitor_fraction);
  t.clip_norm = get_or<double>(j, "clip_norm", t.clip_norm);
  t.adam.lr = get_or<double>(j, "learning_rate", t.adam.lr);
  t.adam.beta1 = get_or<double>(j, "beta1", t.adam.beta1);
  t.adam.beta2 = get_or<double>(j, "beta2", t.adam.beta2);
  t.adam.eps = get_or<double>(j, "epsilon", t.adam.eps);
  t.validate();
  if (c.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

json to_json(const ExperimentConfig& c) {
  json j = to_json(c.model);
  const auto& t = c.train;
  j["embedding_dim"] = c.embedding_dim;
  j["batch_size"] = t.batch_size;
  j["max_epochs"] = t.max_epochs;
  j["patience"] = t.patience;
  j["runs"] = t.runs;
  j["monitor"] = std::string(monitor_name(t.monitor));
  j["monitor_fraction"] = t.monitor_fraction;
  j["clip_norm"] = t.clip_norm;
  j["learning_rate"] = t.adam.lr;
  j["beta1"] = t.adam.beta1;
  j["beta2"] = t.adam.beta2;
  j["epsilon"] = t.adam.eps;
  return j;
}

json to_json(const EvalReport& r) {
  return json{{"tp", r.tp},         {"fp", r.fp},     {"fn", r.fn},
              {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

json to_json(const CoverageReport& r) {
  return json{{"dataset", r.dataset},
              {"embedding", r.embedding},
              {"case", std::string(case_mode_name(r.mode))},
              {"covered", r.covered},
              {"total", r.total},
              {"ratio", r.ratio}};
}

json to_json(const RunRecord& r) {
  json j{{"run_id", r.run_id},
         {"seed", r.seed},
         {"monitor", r.monitor},
         {"epochs", r.epochs},
         {"best_epoch", r.best_epoch},
         {"epoch_loss", r.epoch_loss},
         {"monitor_f1", r.monitor_f1},
         {"failed", r.failed}};
  if (r.failed) {
    j["failure"] = r.failure;
  } else {
    j["test"] = to_json(r.test);
    if (r.test_constrained) j["test_constrained"] = to_json(*r.test_constrained);
    if (r.test_unconstrained) j["test_unconstrained"] = to_json(*r.test_unconstrained);
  }
  return j;
}

json to_json(const TrainAggregate& a) {
  json records = json::array();
  for (const auto& r : a.records) records.push_back(to_json(r));
  return json{{"variant", a.variant},       {"runs", a.runs},
              {"failed_runs", a.failed_runs}, {"mean_f1", a.mean_f1},
              {"std_f1", a.std_f1},         {"records", std::move(records)}};
}

json to_json(const ResultGrid& grid, const StatsSummary& s) {
  json ranks = json::object();
  for (std::size_t j = 0; j < grid.treatments.size(); ++j) {
    ranks[grid.treatments[j]] = s.friedman.mean_ranks(static_cast<Eigen::Index>(j));
  }
  json groups = json::array();
  for (const auto& [a, b] : s.groups) {
    if (a < b) groups.push_back(json::array({grid.treatments[a], grid.treatments[b]}));
  }
  return json{{"treatments", grid.treatments},
              {"blocks", grid.blocks},
              {"mean_ranks", std::move(ranks)},
              {"statistic", s.friedman.statistic},
              {"alpha", s.alpha},
              {"cd", s.cd},
              {"groups", std::move(groups)}};
}

void save_checkpoint(const std::string& path, Model& model, const json& extra) {
  auto views = model.params.views();
  json groups = json::array();
  for (const auto& v : views) groups.push_back(json{{"name", v.name}, {"size", v.data.size()}});
  json chars = json::array();
  for (char32_t c : model.chars.chars()) chars.push_back(utf8::encode(c));

  json header{{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"dtype", "float64-le"},
              {"toolkit_version", kToolkitVersion},
              {"tokenizer_version", kTokenizerVersion},
              {"config", to_json(model.config)},
              {"seed", model.config.seed},
              {"word_dim", model.table ? model.table->dim() : 0},
              {"char_vocab", std::move(chars)},
              {"groups", std::move(groups)},
              {"meta", extra}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint: " + path);
  out << header.dump() << '\n';
  for (const auto& v : views) {
    for (double x : v.data) {
      std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(x));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw ValidationError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty checkpoint: " + path);

  Checkpoint ck;
  try {
    ck.header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError("checkpoint header is not JSON: " + std::string(e.what()));
  }
  if (ck.header.value("format", "") != kCheckpointFormat ||
      ck.header.value("version", 0) != kCheckpointVersion) {
    throw ValidationError("not an aspex checkpoint (or unsupported version): " + path);
  }
  ck.config = model_config_from_json(ck.header.at("config"));
  ck.word_dim = ck.header.at("word_dim").get<std::size_t>();
  std::vector<char32_t> chars;
  for (const auto& c : ck.header.at("char_vocab")) {
    const auto cps = utf8::decode(c.get<std::string>());
    if (cps.size() != 1) throw ValidationError("checkpoint char_vocab entry is not one character");
    chars.push_back(cps[0]);
  }
  ck.chars = CharVocab(std::move(chars));
  ck.params = zero_params(ck.config, static_cast<Eigen::Index>(ck.word_dim), ck.chars.size());

  auto views = ck.params.views();
  const auto& groups = ck.header.at("groups");
  if (groups.size() != views.size()) {
    throw ValidationError("checkpoint group count does not match its config");
  }
  for (std::size_t g = 0; g < views.size(); ++g) {
    if (groups[g].at("name").get<std::string>() != views[g].name ||
        groups[g].at("size").get<std::size_t>() != views[g].data.size()) {
      throw ValidationError("checkpoint group " + std::to_string(g) + " (" +
                            groups[g].at("name").get<std::string>() +
                            ") does not match the expected layout");
    }
    for (double& x : views[g].data) {
      std::uint64_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw ValidationError("checkpoint truncated in group " + views[g].name);
      }
      x = std::bit_cast<double>(to_le(bits));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ValidationError("checkpoint has trailing bytes: " + path);
  }
  return ck;
}

Model Checkpoint::attach(const EmbeddingTable& table) const {
  if (table.dim() != word_dim) {
    throw ConfigError("checkpoint expects " + std::to_string(word_dim) +
                      "-dim word vectors, table has " + std::to_string(table.dim()));
  }
  if (table.name() != config.embedding) {
    throw ConfigError("checkpoint was trained with embedding '" + config.embedding +
                      "', got '" + table.name() + "'");
  }
  Model m;
  m.config = config;
  m.chars = chars;
  m.params = params;
  m.table = &table;
  return m;
}

}  // namespace aspex
