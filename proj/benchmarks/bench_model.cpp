#include <benchmark/benchmark.h>

#include "aspex/model.hpp"
#include "fixtures.hpp"

using namespace aspex;

namespace {

// Built in place: the model keeps a pointer to the table.
struct Setup {
  explicit Setup(const std::string& variant)
      : corpus(fixture::make_planted_corpus(spec())),
        table(fixture::stub_table(corpus.vocabulary, 300, 1)) {
    auto cfg = ModelConfig::from_variant(variant);
    cfg.embedding = "stub";
    model = build(cfg, table, CharVocab::build(corpus.train));
    std::vector<const TaggedSentence*> ptrs;
    for (const auto& t : corpus.train) ptrs.push_back(&t);
    batch = make_batch(ptrs, cfg.max_length);
  }
  Setup(const Setup&) = delete;

  static fixture::PlantedSpec spec() {
    fixture::PlantedSpec ps;
    ps.train_sentences = 10;
    ps.test_sentences = 0;
    return ps;
  }

  fixture::PlantedCorpus corpus;
  EmbeddingTable table;
  Model model;
  SequenceBatch batch;
};

}  // namespace

// One mini-batch (10 sentences) forward + backward, full-size model.
static void BM_BatchLoss(benchmark::State& state, const char* variant) {
  const Setup s(variant);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(loss(s.model, s.batch, Mode::Train, rng).loss);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.batch.size()));
}
BENCHMARK_CAPTURE(BM_BatchLoss, wo_lstm, "Wo-LSTM")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BatchLoss, woch_bilstm_crf, "WoCh-BiLSTM-CRF")->Unit(benchmark::kMillisecond);

static void BM_Predict(benchmark::State& state) {
  const Setup s("WoCh-BiLSTM-CRF");
  const auto words = words_of(s.corpus.train.front());
  for (auto _ : state) benchmark::DoNotOptimize(predict(s.model, words));
}
BENCHMARK(BM_Predict);

BENCHMARK_MAIN();
