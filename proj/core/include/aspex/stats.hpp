#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "aspex/net.hpp"

namespace aspex {

/// Scores of k treatments (columns) over N blocks (rows). Higher is better.
struct ResultGrid {
  std::vector<std::string> treatments;
  std::vector<std::string> blocks;
  Mat scores;  // N x k

  /// Throws ValidationError unless N >= 2, k >= 2 and every cell is finite.
  void validate() const;
  ResultGrid transposed() const;
};

/// Header row names the treatments; each further row is one block. A first
/// column whose cells are not numeric is taken as block labels. Empty cells
/// are rejected.
ResultGrid read_grid_csv(std::istream& in);

struct FriedmanResult {
  Mat ranks;       // N x k, rank 1 = best in block, ties averaged
  Vec mean_ranks;  // k
  double statistic = 0.0;
};

/// chi2_F = 12N / (k(k+1)) * (sum_j R_j^2 - k(k+1)^2 / 4).
FriedmanResult friedman_ranks(const ResultGrid& grid);

inline constexpr int kNemenyiMinK = 2;
inline constexpr int kNemenyiMaxK = 10;

/// Two-tailed Nemenyi q value at alpha = 0.05 (studentized range / sqrt 2).
double nemenyi_q(int k);

/// CD = q(k) * sqrt(k(k+1) / (6N)). Only alpha = 0.05 is tabulated; other
/// alphas or k outside [2, 10] throw ConfigError.
double nemenyi_cd(int k, int n, double alpha = 0.05);

/// Ordered pairs (i, j), i != j, whose mean ranks differ by less than cd.
std::vector<std::pair<std::size_t, std::size_t>> significance_groups(const Vec& mean_ranks,
                                                                     double cd);

}  // namespace aspex
