#include "aspex/stats.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

#include "aspex/common.hpp"

namespace aspex {

namespace {

// q_0.05 for k = 2..10.
constexpr std::array<double, 9> kQ05 = {1.960, 2.343, 2.569, 2.728, 2.850,
                                        2.949, 3.031, 3.102, 3.164};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

void ResultGrid::validate() const {
  const auto N = scores.rows();
  const auto k = scores.cols();
  if (N < 2 || k < 2) {
    throw ValidationError("result grid needs at least 2 blocks and 2 treatments (got " +
                          std::to_string(N) + " x " + std::to_string(k) + ")");
  }
  if (static_cast<Eigen::Index>(treatments.size()) != k ||
      static_cast<Eigen::Index>(blocks.size()) != N) {
    throw ValidationError("result grid labels do not match its shape");
  }
  if (!scores.allFinite()) throw ValidationError("result grid has non-finite cells");
}

ResultGrid ResultGrid::transposed() const {
  return {blocks, treatments, scores.transpose()};
}

ResultGrid read_grid_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.size() < 2) throw ValidationError("grid CSV needs a header and at least one row");

  bool labelled = true;
  double tmp = 0.0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (parse_double(rows[r][0], tmp)) labelled = false;
  }
  const std::size_t skip = labelled ? 1 : 0;

  ResultGrid g;
  g.treatments.assign(rows[0].begin() + static_cast<std::ptrdiff_t>(skip), rows[0].end());
  const auto k = static_cast<Eigen::Index>(g.treatments.size());
  g.scores.resize(static_cast<Eigen::Index>(rows.size() - 1), k);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size() - skip) != k) {
      throw ValidationError("grid CSV row " + std::to_string(r + 1) + " has " +
                            std::to_string(rows[r].size()) + " cells, expected " +
                            std::to_string(k + static_cast<Eigen::Index>(skip)));
    }
    g.blocks.push_back(labelled ? rows[r][0] : "block" + std::to_string(r));
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& cell = rows[r][static_cast<std::size_t>(j) + skip];
      if (!parse_double(cell, g.scores(static_cast<Eigen::Index>(r - 1), j))) {
        throw ValidationError("grid CSV row " + std::to_string(r + 1) + ": '" + cell +
                              "' is not a number");
      }
    }
  }
  return g;
}

FriedmanResult friedman_ranks(const ResultGrid& grid) {
  grid.validate();
  const auto N = grid.scores.rows();
  const auto k = grid.scores.cols();
  FriedmanResult res;
  res.ranks.resize(N, k);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index b = 0; b < N; ++b) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto row = grid.scores.row(b);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return row(x) > row(y); });
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && row(order[j + 1]) == row(order[i])) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) res.ranks(b, order[t]) = avg;
      i = j + 1;
    }
  }
  res.mean_ranks = res.ranks.colwise().mean().transpose();

  const double dk = static_cast<double>(k);
  const double dn = static_cast<double>(N);
  res.statistic = 12.0 * dn / (dk * (dk + 1.0)) *
                  (res.mean_ranks.squaredNorm() - dk * (dk + 1.0) * (dk + 1.0) / 4.0);
  if (std::abs(res.statistic) < 1e-12) res.statistic = 0.0;
  return res;
}

double nemenyi_q(int k) {
  if (k < kNemenyiMinK || k > kNemenyiMaxK) {
    throw ConfigError("nemenyi: k=" + std::to_string(k) + " outside supported range [" +
                      std::to_string(kNemenyiMinK) + ", " + std::to_string(kNemenyiMaxK) + "]");
  }
  return kQ05[static_cast<std::size_t>(k - kNemenyiMinK)];
}

double nemenyi_cd(int k, int n, double alpha) {
  if (alpha != 0.05) throw ConfigError("nemenyi: only alpha = 0.05 is tabulated");
  if (n < 2) throw ConfigError("nemenyi: need at least 2 blocks");
  const double dk = static_cast<double>(k);
  return nemenyi_q(k) * std::sqrt(dk * (dk + 1.0) / (6.0 * static_cast<double>(n)));
}

std::vector<std::pair<std::size_t, std::size_t>> significance_groups(const Vec& mean_ranks,
                                                                     double cd) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto k = static_cast<std::size_t>(mean_ranks.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double gap = std::abs(mean_ranks(static_cast<Eigen::Index>(i)) -
                                  mean_ranks(static_cast<Eigen::Index>(j)));
      if (gap < cd || gap == 0.0) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace aspex
