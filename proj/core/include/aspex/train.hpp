#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aspex/eval.hpp"
#include "aspex/model.hpp"

namespace aspex {

enum class MonitorSplit { HeldOut, Test };

std::string_view monitor_name(MonitorSplit m);
/// "heldout" or "test"; throws ConfigError otherwise.
MonitorSplit parse_monitor(std::string_view s);

struct EpochLog {
  std::size_t run_id = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  double monitor_f1 = 0.0;
};

struct TrainSpec {
  std::size_t batch_size = 10;
  std::size_t max_epochs = 25;
  std::size_t patience = 2;
  std::size_t runs = 6;
  std::uint64_t seed = 0;
  MonitorSplit monitor = MonitorSplit::HeldOut;
  double monitor_fraction = 0.1;
  double clip_norm = 5.0;
  AdamConfig adam;
  std::function<void(const EpochLog&)> on_epoch;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

struct RunRecord {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  std::string monitor;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch completed
  std::vector<double> epoch_loss;
  std::vector<double> monitor_f1;
  EvalReport test;  // decoded as configured
  /// CRF heads only: test scored under the other decoding mode as well.
  std::optional<EvalReport> test_constrained;
  std::optional<EvalReport> test_unconstrained;
  bool failed = false;
  std::string failure;
  double wall_seconds = 0.0;
};

/// Stops after `patience` consecutive epochs without a strictly higher
/// monitor F1.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when the value is a new best.
  bool update(double monitor_f1);
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_ = -1.0;
};

/// Predicts every sentence and scores exact-match chunks (invalid IOB is
/// repaired before scoring).
EvalReport evaluate(const Model& model, const std::vector<TaggedSentence>& sentences);

/// Deterministic split of `train` into (fit, held-out) parts.
std::pair<std::vector<TaggedSentence>, std::vector<TaggedSentence>> split_heldout(
    const std::vector<TaggedSentence>& train, double fraction, std::uint64_t seed);

/// One training run. The model restored to the best monitor epoch is
/// written to `best_model` when given. Numeric divergence marks the record
/// failed instead of throwing.
RunRecord train_once(const ModelConfig& config, const TrainSpec& spec,
                     const EmbeddingTable& table, const std::vector<TaggedSentence>& train,
                     const std::vector<TaggedSentence>& monitor,
                     const std::vector<TaggedSentence>& test, std::uint64_t seed,
                     std::size_t run_id = 0, Model* best_model = nullptr);

struct TrainAggregate {
  std::string variant;
  std::size_t runs = 0;
  std::size_t failed_runs = 0;
  double mean_f1 = 0.0;  // percent
  double std_f1 = 0.0;   // population standard deviation, percent
  std::vector<RunRecord> records;
};

/// Mean and population std of test F1 (percent) over non-failed runs.
/// Throws NumericError when every run failed.
TrainAggregate aggregate_runs(std::string variant, std::vector<RunRecord> records);

/// Seed of run r is mix_seed(spec.seed, r).
std::uint64_t run_seed(std::uint64_t seed, std::size_t run_id);

using RunCallback = std::function<void(const RunRecord&, const Model&)>;

TrainAggregate train_many(const ModelConfig& config, const TrainSpec& spec,
                          const EmbeddingTable& table, const std::vector<TaggedSentence>& train,
                          const std::vector<TaggedSentence>& test,
                          const RunCallback& on_run = {});

}  // namespace aspex
