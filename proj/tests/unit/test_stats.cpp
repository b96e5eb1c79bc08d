#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aspex/common.hpp"
#include "aspex/stats.hpp"

using namespace aspex;

namespace {

ResultGrid grid(std::vector<std::vector<double>> rows) {
  ResultGrid g;
  const auto N = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(rows[0].size());
  g.scores.resize(N, k);
  for (Eigen::Index b = 0; b < N; ++b) {
    g.blocks.push_back("b" + std::to_string(b));
    for (Eigen::Index j = 0; j < k; ++j) g.scores(b, j) = rows[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
  }
  for (Eigen::Index j = 0; j < k; ++j) g.treatments.push_back("t" + std::to_string(j));
  return g;
}

// Restaurants: methods (columns) over embeddings (rows).
const char* kRestaurantsCsv =
    "embedding,Wo-LSTM,WoCh-LSTM,Wo-LSTM-CRF,WoCh-LSTM-CRF,Wo-BiLSTM,WoCh-BiLSTM,Wo-BiLSTM-CRF,"
    "WoCh-BiLSTM-CRF\n"
    "fastText,80.8,79.91,85.46,85.25,83.17,83.27,85.28,85.69\n"
    "Amazon Reviews,48.78,65.81,52.09,72.84,50.49,69.53,50.63,73.5\n"
    "numberbatch,76.26,76.11,82.19,82.92,78.57,80.89,82.31,82.85\n"
    "Glove 840B,80.91,81.26,85.02,84.91,83.56,83.55,84.96,85.2\n"
    "word2vec,77.73,78.15,82.49,84.12,80.16,81.39,82.94,83.61\n";

}  // namespace

TEST_CASE("identical treatments share the middle rank") {
  const auto r = friedman_ranks(grid({{1, 1, 1, 1}, {2, 2, 2, 2}, {0.5, 0.5, 0.5, 0.5}}));
  CHECK(r.mean_ranks.isApproxToConstant(2.5));
  CHECK(r.statistic == 0.0);
}

TEST_CASE("two treatments, one always better") {
  const auto r = friedman_ranks(grid({{0.9, 0.1}, {0.7, 0.6}, {0.5, 0.4}}));
  CHECK(r.mean_ranks(0) == 1.0);
  CHECK(r.mean_ranks(1) == 2.0);
}

TEST_CASE("3x3 grid against hand-computed ranks") {
  const auto r = friedman_ranks(grid({{0.9, 0.8, 0.7}, {0.5, 0.6, 0.6}, {0.2, 0.9, 0.1}}));
  Mat want(3, 3);
  want << 1, 2, 3, 3, 1.5, 1.5, 2, 1, 3;
  CHECK(r.ranks == want);
  CHECK(r.mean_ranks(0) == doctest::Approx(2.0));
  CHECK(r.mean_ranks(1) == doctest::Approx(1.5));
  CHECK(r.mean_ranks(2) == doctest::Approx(2.5));
  CHECK(r.statistic == doctest::Approx(1.5));
}

TEST_CASE("rank properties on random grids") {
  Rng rng(1);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t N = 2 + rng.below(6);
    const std::size_t k = 2 + rng.below(8);
    std::vector<std::vector<double>> rows(N, std::vector<double>(k));
    for (auto& row : rows) {
      for (auto& x : row) x = std::round(rng.uniform(0, 10));  // coarse values force ties
    }
    auto g = grid(rows);
    const auto r = friedman_ranks(g);
    const double kk = static_cast<double>(k);
    for (Eigen::Index b = 0; b < r.ranks.rows(); ++b) {
      CHECK(r.ranks.row(b).sum() == doctest::Approx(kk * (kk + 1) / 2));
    }
    // Strictly monotone transform per block keeps the ranks.
    for (Eigen::Index b = 0; b < g.scores.rows(); ++b) {
      const double a = 0.5 + rng.uniform();
      g.scores.row(b) = (g.scores.row(b).array() * a).exp().matrix();
    }
    CHECK(friedman_ranks(g).ranks == r.ranks);
  }
}

TEST_CASE("Nemenyi critical distance") {
  CHECK(nemenyi_q(2) == 1.960);
  CHECK(nemenyi_q(10) == 3.164);
  CHECK(nemenyi_cd(2, 9) == doctest::Approx(1.960 / 3.0).epsilon(1e-12));
  CHECK(std::abs(nemenyi_cd(8, 5) - 4.695) < 1e-3);
  CHECK(nemenyi_cd(8, 5) == doctest::Approx(3.031 * std::sqrt(2.4)).epsilon(1e-12));
  CHECK(nemenyi_cd(5, 1000000) < 0.01);
  CHECK_THROWS_AS(nemenyi_cd(11, 5), ConfigError);
  CHECK_THROWS_AS(nemenyi_cd(1, 5), ConfigError);
  CHECK_THROWS_AS(nemenyi_cd(4, 5, 0.1), ConfigError);
}

TEST_CASE("significance groups") {
  Vec ranks(4);
  ranks << 1.0, 1.5, 3.0, 3.0;
  const auto all = significance_groups(ranks, 10.0);
  CHECK(all.size() == 12);
  const auto ties = significance_groups(ranks, 0.0);
  CHECK(ties == std::vector<std::pair<std::size_t, std::size_t>>{{2, 3}, {3, 2}});
  const auto some = significance_groups(ranks, 1.0);
  for (const auto& [i, j] : some) {
    CHECK(std::find(some.begin(), some.end(), std::pair{j, i}) != some.end());
  }
  CHECK(some.size() == 4);
}

TEST_CASE("grid CSV parsing") {
  std::istringstream in(kRestaurantsCsv);
  const auto g = read_grid_csv(in);
  CHECK(g.treatments.size() == 8);
  CHECK(g.blocks == std::vector<std::string>{"fastText", "Amazon Reviews", "numberbatch",
                                             "Glove 840B", "word2vec"});
  CHECK(g.scores(1, 7) == 73.5);
  CHECK(g.transposed().scores.rows() == 8);

  std::istringstream unlabelled("a,b\n1,2\n3,4\n");
  const auto u = read_grid_csv(unlabelled);
  CHECK(u.treatments == std::vector<std::string>{"a", "b"});
  CHECK(u.blocks.size() == 2);

  std::istringstream quoted("\"x, y\",b\n1,2\n3,4\n");
  CHECK(read_grid_csv(quoted).treatments[0] == "x, y");

  std::istringstream missing("a,b\n1,\n3,4\n");
  CHECK_THROWS_AS(read_grid_csv(missing), ValidationError);
  std::istringstream ragged("a,b\n1,2,3\n3,4\n");
  CHECK_THROWS_AS(read_grid_csv(ragged), ValidationError);
}

TEST_CASE("restaurant results: CRF variants outrank their counterparts") {
  std::istringstream in(kRestaurantsCsv);
  const auto g = read_grid_csv(in);
  const auto r = friedman_ranks(g);
  for (Eigen::Index j : {0, 1, 4, 5}) {
    CHECK_MESSAGE(r.mean_ranks(j + 2) < r.mean_ranks(j), g.treatments[static_cast<std::size_t>(j)]);
  }
  CHECK(r.statistic > 0.0);
  // k = 8 methods over N = 5 embeddings.
  CHECK(std::abs(nemenyi_cd(8, 5) - 4.695) < 1e-3);
}
