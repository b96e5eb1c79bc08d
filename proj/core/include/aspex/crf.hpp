#pragma once

#include <span>
#include <vector>

#include "aspex/net.hpp"

namespace aspex {

/// Linear-chain CRF scores. transitions(i, j) scores moving from tag i to
/// tag j; start/end score the first and last tag of a path.
struct CrfParams {
  Mat transitions;  // K x K
  Vec start;        // K
  Vec end;          // K

  static CrfParams zeros(Eigen::Index num_tags);
  Eigen::Index num_tags() const { return start.size(); }
  void set_zero();
  void append_views(const std::string& prefix, std::vector<ParamView>& out);
};

/// Emissions are K x L (column per position).
double path_score(const Mat& emissions, std::span<const int> tags, const CrfParams& p);

/// log of the sum over all K^L paths of exp(path_score); forward recursion
/// in log space.
double log_partition(const Mat& emissions, const CrfParams& p);

struct CrfMarginals {
  double log_z = 0.0;
  Mat node;  // K x L, P(y_t = k)
  Mat edge;  // K x K, sum over t of P(y_t = i, y_{t+1} = j)
};

CrfMarginals crf_marginals(const Mat& emissions, const CrfParams& p);

struct CrfNllResult {
  double loss = 0.0;
  Mat d_emissions;
  CrfParams d_params;
};

/// loss = log_partition - path_score(gold); gradients are expected minus
/// observed feature counts.
CrfNllResult crf_nll(const Mat& emissions, std::span<const int> gold, const CrfParams& p);

struct ViterbiResult {
  std::vector<int> tags;
  double score = 0.0;
};

/// Highest-scoring path. Ties resolve to the lowest tag id at every
/// backpointer and at the final position. With `constrained`, the
/// O -> I-aspect transition and a leading I-aspect are forbidden
/// (requires the IOB tag ids O=0, B=1, I=2).
ViterbiResult viterbi(const Mat& emissions, const CrfParams& p, bool constrained = false);

}  // namespace aspex
