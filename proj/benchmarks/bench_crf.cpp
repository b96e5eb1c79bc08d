#include <benchmark/benchmark.h>

#include "aspex/corpus.hpp"
#include "aspex/crf.hpp"

using namespace aspex;

namespace {

struct Instance {
  Mat em;
  CrfParams p;
};

Instance random_instance(Eigen::Index L) {
  Rng rng(3);
  Instance in{Mat(kNumTags, L), CrfParams::zeros(kNumTags)};
  for (Eigen::Index i = 0; i < in.em.size(); ++i) in.em.data()[i] = rng.uniform(-2, 2);
  for (Eigen::Index i = 0; i < in.p.transitions.size(); ++i) in.p.transitions.data()[i] = rng.uniform(-1, 1);
  return in;
}

}  // namespace

static void BM_Viterbi(benchmark::State& state) {
  const auto in = random_instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(in.em, in.p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(10)->Arg(30)->Arg(200);

static void BM_ViterbiConstrained(benchmark::State& state) {
  const auto in = random_instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(in.em, in.p, true));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ViterbiConstrained)->Arg(30);

static void BM_LogPartition(benchmark::State& state) {
  const auto in = random_instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(log_partition(in.em, in.p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogPartition)->Arg(10)->Arg(30)->Arg(200);

static void BM_CrfNll(benchmark::State& state) {
  const auto in = random_instance(state.range(0));
  std::vector<int> gold(static_cast<std::size_t>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(crf_nll(in.em, gold, in.p));
}
BENCHMARK(BM_CrfNll)->Arg(30);
