#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "aspex/corpus.hpp"
#include "aspex/embeddings.hpp"
#include "aspex/eval.hpp"
#include "aspex/io.hpp"
#include "aspex/stats.hpp"
#include "aspex/train.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;

namespace aspex::cli {

namespace {

constexpr std::uint64_t kEmbeddingSeedStream = 0x656d62;  // "emb"

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json issues_json(const std::vector<ValidationIssue>& v) {
  json a = json::array();
  for (const auto& i : v) a.push_back(json{{"sentence_id", i.sentence_id}, {"message", i.message}});
  return a;
}

LoadedTable load_for(const std::string& path, const std::string& name, std::size_t dim,
                     std::uint64_t seed, const std::vector<TaggedSentence>& data,
                     bool fold = false) {
  const auto filter = lookup_filter(data);
  LoadOptions lo;
  lo.name = name;
  lo.expected_dim = dim;
  lo.seed = seed;
  lo.filter = &filter;
  lo.fold_filter = fold;
  auto loaded = load_text_vectors(path, lo);
  const auto& r = loaded.report;
  std::cerr << "embeddings: " << r.loaded << " vectors kept from " << r.lines << " lines ("
            << r.malformed << " malformed, " << r.duplicates << " duplicate)\n";
  return loaded;
}

}  // namespace

std::string resolve_embeddings(const std::string& path) {
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("ASPEX_EMBEDDINGS_DIR"); dir && fs::path(path).is_relative()) {
    const auto alt = fs::path(dir) / path;
    if (fs::exists(alt)) return alt.string();
  }
  throw ValidationError("embeddings file not found: " + path);
}

int cmd_prepare(const PrepareOptions& o) {
  const auto doc = parse_semeval(read_file(o.xml));
  std::vector<ValidationIssue> warnings;
  const auto tagged = to_tagged(doc.sentences, &warnings);

  std::size_t aspects = 0;
  std::size_t multiword = 0;
  for (const auto& s : tagged) {
    for (const auto& c : decode_chunks(s.tags)) {
      ++aspects;
      if (c.last > c.first) ++multiword;
    }
  }
  RunManifest m{"prepare", json::object(), {}, {{"xml", o.xml}}};
  const json report{{"manifest", m.to_json()},
                    {"sentences", tagged.size()},
                    {"aspects", aspects},
                    {"multiword_aspects", multiword},
                    {"errors", issues_json(doc.errors)},
                    {"warnings", issues_json(warnings)}};
  write_json(o.report.empty() ? o.out + ".report.json" : o.report, report);

  for (const auto& w : warnings) std::cerr << "warning: " << w.sentence_id << ": " << w.message << '\n';
  if (!doc.errors.empty()) {
    for (const auto& e : doc.errors) std::cerr << "error: " << e.sentence_id << ": " << e.message << '\n';
    return kExitInvalid;
  }
  if (tagged.empty()) {
    std::cerr << "error: " << o.xml << " contains no sentences\n";
    return kExitInvalid;
  }
  std::ofstream out(o.out);
  if (!out) throw ValidationError("cannot write " + o.out);
  write_conll(out, tagged);
  std::cerr << tagged.size() << " sentences, " << aspects << " aspects -> " << o.out << '\n';
  return kExitOk;
}

int cmd_train(const TrainOptions& o) {
  auto cfg = load_experiment_config(o.config);
  if (o.runs) cfg.train.runs = *o.runs;
  if (o.seed) cfg.train.seed = *o.seed;
  cfg.train.validate();
  cfg.model.seed = cfg.train.seed;

  const auto train = load_tagged(o.train);
  const auto test = load_tagged(o.test);
  if (train.empty() || test.empty()) throw ValidationError("train and test sets must be non-empty");

  const auto emb_path = resolve_embeddings(o.embeddings);
  const std::uint64_t emb_seed = mix_seed(cfg.train.seed, kEmbeddingSeedStream);
  std::vector<TaggedSentence> all = train;
  all.insert(all.end(), test.begin(), test.end());
  const auto loaded = load_for(emb_path, cfg.model.embedding, cfg.embedding_dim, emb_seed, all);

  fs::create_directories(o.out_dir);
  if (!o.quiet) {
    cfg.train.on_epoch = [](const EpochLog& l) {
      std::cerr << "run " << l.run_id << " epoch " << l.epoch << " loss " << l.loss
                << " monitor_f1 " << l.monitor_f1 << '\n';
    };
  }

  json timing = json::array();
  const auto on_run = [&](const RunRecord& r, const Model& model) {
    const json meta{{"run_id", r.run_id},
                    {"embeddings", emb_path},
                    {"embedding_seed", emb_seed},
                    {"test", to_json(r.test)}};
    Model copy = model;
    save_checkpoint((fs::path(o.out_dir) / ("run_" + std::to_string(r.run_id) + ".ckpt")).string(),
                    copy, meta);
  };
  auto agg = train_many(cfg.model, cfg.train, loaded.table, train, test, on_run);
  for (const auto& r : agg.records) {
    timing.push_back(json{{"run_id", r.run_id}, {"wall_seconds", r.wall_seconds}});
  }

  RunManifest m{"train", to_json(cfg), {}, {{"config", o.config}, {"embeddings", emb_path},
                                             {"train", o.train}, {"test", o.test}}};
  for (std::size_t r = 0; r < cfg.train.runs; ++r) m.seeds.push_back(run_seed(cfg.train.seed, r));
  write_json((fs::path(o.out_dir) / "aggregate.json").string(),
             json{{"manifest", m.to_json()}, {"aggregate", to_json(agg)}});
  write_json((fs::path(o.out_dir) / "timing.json").string(), json{{"runs", timing}});

  std::cerr << agg.variant << ": F1 " << agg.mean_f1 << " +/- " << agg.std_f1 << " over "
            << agg.runs - agg.failed_runs << " runs\n";
  return agg.failed_runs == 0 ? kExitOk : kExitRuntime;
}

int cmd_eval(const EvalOptions& o) {
  const auto gold = load_tagged(o.test);
  std::vector<std::vector<IobTag>> g;
  std::vector<std::vector<IobTag>> p;
  RunManifest m{"eval", json::object(), {}, {{"test", o.test}}};

  if (!o.pred.empty()) {
    const auto pred = load_tagged(o.pred);
    if (pred.size() != gold.size()) {
      throw ValidationError("prediction file has " + std::to_string(pred.size()) +
                            " sentences, gold has " + std::to_string(gold.size()));
    }
    for (std::size_t s = 0; s < gold.size(); ++s) {
      if (pred[s].tags.size() != gold[s].tags.size()) {
        throw ValidationError("sentence " + std::to_string(s + 1) + ": token count differs");
      }
      g.push_back(gold[s].tags);
      p.push_back(pred[s].tags);
    }
    m.inputs.push_back({"pred", o.pred});
  } else {
    if (!fs::exists(o.checkpoint)) throw ValidationError("checkpoint not found: " + o.checkpoint);
    const auto ck = load_checkpoint(o.checkpoint);
    const auto& meta = ck.header.at("meta");
    const std::string emb = resolve_embeddings(
        o.embeddings.empty() ? meta.value("embeddings", std::string()) : o.embeddings);
    const auto loaded = load_for(emb, ck.config.embedding, ck.word_dim,
                                 meta.value("embedding_seed", std::uint64_t{0}), gold);
    const Model model = ck.attach(loaded.table);
    for (const auto& s : gold) {
      g.push_back(s.tags);
      p.push_back(predict(model, words_of(s)));
    }
    m.config = to_json(ck.config);
    m.seeds.push_back(ck.config.seed);
    m.inputs.push_back({"checkpoint", o.checkpoint});
    m.inputs.push_back({"embeddings", emb});
  }
  write_json(o.out, json{{"manifest", m.to_json()}, {"report", to_json(exact_f1_tags(g, p))}});
  return kExitOk;
}

int cmd_compare(const CompareOptions& o) {
  std::ifstream in(o.grid);
  if (!in) throw ValidationError("cannot open grid " + o.grid);
  auto grid = read_grid_csv(in);
  if (o.transpose) grid = grid.transposed();
  grid.validate();

  StatsSummary s;
  s.friedman = friedman_ranks(grid);
  s.cd = nemenyi_cd(static_cast<int>(grid.treatments.size()), static_cast<int>(grid.blocks.size()),
                    s.alpha);
  s.groups = significance_groups(s.friedman.mean_ranks, s.cd);

  RunManifest m{"compare", json{{"transpose", o.transpose}}, {}, {{"grid", o.grid}}};
  json out = to_json(grid, s);
  out["manifest"] = m.to_json();
  write_json(o.out, out);

  if (!o.plot.empty()) {
    std::ofstream plot(o.plot);
    if (!plot) throw ValidationError("cannot write " + o.plot);
    plot << "treatment\tmean_rank\n";
    for (std::size_t j = 0; j < grid.treatments.size(); ++j) {
      plot << grid.treatments[j] << '\t' << s.friedman.mean_ranks(static_cast<Eigen::Index>(j)) << '\n';
    }
    plot << "# cd\t" << s.cd << '\n';
  }
  return kExitOk;
}

int cmd_coverage(const CoverageOptions& o) {
  RunManifest m{"coverage", json{{"name", o.name}, {"dim", o.dim}}, {}, {}};
  std::vector<std::pair<std::string, std::vector<TaggedSentence>>> sets;
  std::vector<TaggedSentence> all;
  for (const auto& path : o.vocab_from) {
    auto data = load_tagged(path);
    all.insert(all.end(), data.begin(), data.end());
    sets.emplace_back(fs::path(path).stem().string(), std::move(data));
    m.inputs.push_back({"vocab", path});
  }
  const auto emb = resolve_embeddings(o.embeddings);
  m.inputs.push_back({"embeddings", emb});
  const auto loaded = load_for(emb, o.name.empty() ? fs::path(emb).stem().string() : o.name, o.dim,
                               0, all, true);
  json reports = json::array();
  for (const auto& [name, data] : sets) {
    for (auto mode : {CaseMode::Insensitive, CaseMode::Sensitive}) {
      reports.push_back(to_json(coverage(build_vocab(data, mode), loaded.table, mode, name)));
    }
  }
  write_json(o.out, json{{"manifest", m.to_json()}, {"coverage", std::move(reports)}});
  return kExitOk;
}

}  // namespace aspex::cli
