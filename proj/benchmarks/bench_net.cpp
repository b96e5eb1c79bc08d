#include <benchmark/benchmark.h>

#include "aspex/charcomp.hpp"
#include "aspex/net.hpp"

using namespace aspex;

// Word vectors 300 + char vectors 50, hidden 100: full-size encoder input.
static void BM_LstmForward(benchmark::State& state) {
  const Eigen::Index L = state.range(0);
  Rng rng(1);
  auto p = LstmParams::zeros(350, 100);
  p.init(rng);
  const Mat seq = Mat::Random(350, L);
  for (auto _ : state) benchmark::DoNotOptimize(lstm_forward(seq, p));
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_LstmForward)->Arg(10)->Arg(30);

static void BM_LstmBackward(benchmark::State& state) {
  const Eigen::Index L = state.range(0);
  Rng rng(1);
  auto p = LstmParams::zeros(350, 100);
  p.init(rng);
  auto g = LstmParams::zeros(350, 100);
  const Mat seq = Mat::Random(350, L);
  const auto tr = lstm_forward(seq, p);
  const Mat dh = Mat::Ones(100, L);
  for (auto _ : state) benchmark::DoNotOptimize(lstm_backward(seq, tr, dh, p, g));
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_LstmBackward)->Arg(10)->Arg(30);

static void BM_ComposeWord(benchmark::State& state) {
  std::vector<char32_t> alphabet;
  for (char32_t c = 'a'; c <= 'z'; ++c) alphabet.push_back(c);
  const CharVocab vocab(alphabet);
  Rng rng(2);
  auto p = CharComposerParams::zeros(vocab.size());
  p.init(rng);
  const std::string word = "battery";
  for (auto _ : state) benchmark::DoNotOptimize(compose_word(word, vocab, p, Mode::Infer, rng));
}
BENCHMARK(BM_ComposeWord);
