#include "aspex/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace aspex {

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;
constexpr std::uint64_t kSplitStream = 3;

}  // namespace

std::string_view monitor_name(MonitorSplit m) {
  return m == MonitorSplit::HeldOut ? "heldout" : "test";
}

MonitorSplit parse_monitor(std::string_view s) {
  if (s == "heldout") return MonitorSplit::HeldOut;
  if (s == "test") return MonitorSplit::Test;
  throw ConfigError("monitor must be 'heldout' or 'test', got '" + std::string(s) + "'");
}

void TrainSpec::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (patience == 0) throw ConfigError("patience must be >= 1");
  if (runs == 0) throw ConfigError("runs must be >= 1");
  if (!(monitor_fraction > 0.0 && monitor_fraction < 1.0)) {
    throw ConfigError("monitor_fraction must be in (0, 1)");
  }
}

bool EarlyStopping::update(double monitor_f1) {
  ++epoch_;
  if (monitor_f1 > best_) {
    best_ = monitor_f1;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

EvalReport evaluate(const Model& model, const std::vector<TaggedSentence>& sentences) {
  std::vector<std::vector<IobTag>> gold;
  std::vector<std::vector<IobTag>> pred;
  gold.reserve(sentences.size());
  pred.reserve(sentences.size());
  for (const auto& s : sentences) {
    gold.push_back(s.tags);
    pred.push_back(predict(model, words_of(s)));
  }
  return exact_f1_tags(gold, pred);
}

std::pair<std::vector<TaggedSentence>, std::vector<TaggedSentence>> split_heldout(
    const std::vector<TaggedSentence>& train, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, kSplitStream));
  rng.shuffle(order);
  auto n_held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
  if (train.size() >= 2) n_held = std::clamp<std::size_t>(n_held, 1, train.size() - 1);
  std::vector<bool> held(train.size(), false);
  for (std::size_t k = 0; k < n_held; ++k) held[order[k]] = true;

  std::pair<std::vector<TaggedSentence>, std::vector<TaggedSentence>> out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    (held[i] ? out.second : out.first).push_back(train[i]);
  }
  return out;
}

RunRecord train_once(const ModelConfig& config, const TrainSpec& spec,
                     const EmbeddingTable& table, const std::vector<TaggedSentence>& train,
                     const std::vector<TaggedSentence>& monitor,
                     const std::vector<TaggedSentence>& test, std::uint64_t seed,
                     std::size_t run_id, Model* best_model) {
  spec.validate();
  if (train.empty() || monitor.empty() || test.empty()) {
    throw ValidationError("train_once: train, monitor and test splits must be non-empty");
  }
  const auto t0 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.run_id = run_id;
  rec.seed = seed;
  rec.monitor = std::string(monitor_name(spec.monitor));

  ModelConfig cfg = config;
  cfg.seed = seed;
  Model model = build(cfg, table, CharVocab::build(train));
  ModelParams best = model.params;

  Rng shuffle_rng(mix_seed(seed, kShuffleStream));
  Rng dropout_rng(mix_seed(seed, kDropoutStream));
  AdamState adam{spec.adam, 0, {}, {}};
  EarlyStopping stopper(spec.patience);

  std::vector<const TaggedSentence*> order;
  order.reserve(train.size());
  for (const auto& s : train) {
    if (!s.tokens.empty()) order.push_back(&s);
  }

  try {
    for (std::size_t epoch = 1; epoch <= spec.max_epochs; ++epoch) {
      shuffle_rng.shuffle(order);
      double loss_sum = 0.0;
      std::size_t batches = 0;
      for (std::size_t b = 0; b < order.size(); b += spec.batch_size) {
        const std::size_t e = std::min(order.size(), b + spec.batch_size);
        const auto batch = make_batch(std::span(order).subspan(b, e - b), cfg.max_length);
        auto res = loss(model, batch, Mode::Train, dropout_rng);
        if (!std::isfinite(res.loss)) throw NumericError("non-finite training loss");
        auto grads = res.grad.views();
        auto params = model.params.views();
        clip_global_norm(grads, spec.clip_norm);
        adam_update(params, grads, adam);
        loss_sum += res.loss;
        ++batches;
      }
      const double epoch_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
      const double f1 = evaluate(model, monitor).f1;
      rec.epoch_loss.push_back(epoch_loss);
      rec.monitor_f1.push_back(f1);
      rec.epochs = epoch;
      if (stopper.update(f1)) best = model.params;
      if (spec.on_epoch) spec.on_epoch({run_id, epoch, epoch_loss, f1});
      if (stopper.should_stop()) break;
    }
  } catch (const NumericError& e) {
    rec.failed = true;
    rec.failure = "epoch " + std::to_string(rec.epochs + 1) + ": " + e.what();
  }

  if (!rec.failed) {
    rec.best_epoch = stopper.best_epoch();
    model.params = std::move(best);
    rec.test = evaluate(model, test);
    if (model.params.crf) {
      const bool configured = model.config.constrained_decoding;
      model.config.constrained_decoding = !configured;
      const auto other = evaluate(model, test);
      model.config.constrained_decoding = configured;
      rec.test_constrained = configured ? rec.test : other;
      rec.test_unconstrained = configured ? other : rec.test;
    }
    if (best_model) *best_model = std::move(model);
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

TrainAggregate aggregate_runs(std::string variant, std::vector<RunRecord> records) {
  TrainAggregate agg;
  agg.variant = std::move(variant);
  agg.runs = records.size();
  std::vector<double> f1s;
  for (const auto& r : records) {
    if (r.failed) {
      ++agg.failed_runs;
    } else {
      f1s.push_back(100.0 * r.test.f1);
    }
  }
  agg.records = std::move(records);
  if (f1s.empty()) throw NumericError("all " + std::to_string(agg.runs) + " runs failed");
  const double n = static_cast<double>(f1s.size());
  agg.mean_f1 = std::accumulate(f1s.begin(), f1s.end(), 0.0) / n;
  double var = 0.0;
  for (double f : f1s) var += (f - agg.mean_f1) * (f - agg.mean_f1);
  agg.std_f1 = std::sqrt(var / n);
  return agg;
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t run_id) { return mix_seed(seed, run_id); }

TrainAggregate train_many(const ModelConfig& config, const TrainSpec& spec,
                          const EmbeddingTable& table, const std::vector<TaggedSentence>& train,
                          const std::vector<TaggedSentence>& test, const RunCallback& on_run) {
  spec.validate();
  std::vector<RunRecord> records;
  for (std::size_t r = 0; r < spec.runs; ++r) {
    const std::uint64_t seed = run_seed(spec.seed, r);
    Model best;
    RunRecord rec;
    if (spec.monitor == MonitorSplit::Test) {
      rec = train_once(config, spec, table, train, test, test, seed, r, &best);
    } else {
      const auto [fit, held] = split_heldout(train, spec.monitor_fraction, seed);
      rec = train_once(config, spec, table, fit, held, test, seed, r, &best);
    }
    if (on_run && !rec.failed) on_run(rec, best);
    records.push_back(std::move(rec));
  }
  return aggregate_runs(config.variant(), std::move(records));
}

}  // namespace aspex
