#include "aspex/crf.hpp"

#include <cmath>
#include <limits>

#include "aspex/corpus.hpp"

namespace aspex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_emissions(const Mat& em, const CrfParams& p) {
  if (em.cols() == 0) throw ValidationError("crf: empty emission matrix");
  if (em.rows() != p.num_tags()) throw ValidationError("crf: emission/tag count mismatch");
}

// alpha(:, t) = log-sum of all prefixes ending in each tag at t.
Mat forward_scores(const Mat& em, const CrfParams& p) {
  const Eigen::Index K = em.rows();
  const Eigen::Index L = em.cols();
  Mat alpha(K, L);
  alpha.col(0) = p.start + em.col(0);
  Vec tmp(K);
  for (Eigen::Index t = 1; t < L; ++t) {
    for (Eigen::Index j = 0; j < K; ++j) {
      tmp = alpha.col(t - 1) + p.transitions.col(j);
      alpha(j, t) = em(j, t) + log_sum_exp(tmp);
    }
  }
  return alpha;
}

Mat backward_scores(const Mat& em, const CrfParams& p) {
  const Eigen::Index K = em.rows();
  const Eigen::Index L = em.cols();
  Mat beta(K, L);
  beta.col(L - 1) = p.end;
  Vec tmp(K);
  for (Eigen::Index t = L - 2; t >= 0; --t) {
    const Vec next = em.col(t + 1) + beta.col(t + 1);
    for (Eigen::Index i = 0; i < K; ++i) {
      tmp = p.transitions.row(i).transpose() + next;
      beta(i, t) = log_sum_exp(tmp);
    }
  }
  return beta;
}

}  // namespace

CrfParams CrfParams::zeros(Eigen::Index num_tags) {
  return {Mat::Zero(num_tags, num_tags), Vec::Zero(num_tags), Vec::Zero(num_tags)};
}

void CrfParams::set_zero() {
  transitions.setZero();
  start.setZero();
  end.setZero();
}

void CrfParams::append_views(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back(view_of(prefix + ".transitions", transitions));
  out.push_back(view_of(prefix + ".start", start));
  out.push_back(view_of(prefix + ".end", end));
}

double path_score(const Mat& em, std::span<const int> tags, const CrfParams& p) {
  check_emissions(em, p);
  if (tags.size() != static_cast<std::size_t>(em.cols())) {
    throw ValidationError("path_score: tag count does not match sequence length");
  }
  double s = p.start(tags[0]) + p.end(tags.back());
  for (std::size_t t = 0; t < tags.size(); ++t) {
    s += em(tags[t], static_cast<Eigen::Index>(t));
    if (t + 1 < tags.size()) s += p.transitions(tags[t], tags[t + 1]);
  }
  return s;
}

double log_partition(const Mat& em, const CrfParams& p) {
  check_emissions(em, p);
  const Mat alpha = forward_scores(em, p);
  return log_sum_exp(alpha.col(em.cols() - 1) + p.end);
}

CrfMarginals crf_marginals(const Mat& em, const CrfParams& p) {
  check_emissions(em, p);
  const Eigen::Index K = em.rows();
  const Eigen::Index L = em.cols();
  const Mat alpha = forward_scores(em, p);
  const Mat beta = backward_scores(em, p);

  CrfMarginals m;
  m.log_z = log_sum_exp(alpha.col(L - 1) + p.end);
  m.node = (alpha + beta).array() - m.log_z;
  m.node = m.node.array().exp();
  m.edge = Mat::Zero(K, K);
  for (Eigen::Index t = 0; t + 1 < L; ++t) {
    for (Eigen::Index i = 0; i < K; ++i) {
      for (Eigen::Index j = 0; j < K; ++j) {
        m.edge(i, j) += std::exp(alpha(i, t) + p.transitions(i, j) + em(j, t + 1) +
                                 beta(j, t + 1) - m.log_z);
      }
    }
  }
  return m;
}

CrfNllResult crf_nll(const Mat& em, std::span<const int> gold, const CrfParams& p) {
  const auto marg = crf_marginals(em, p);
  const Eigen::Index L = em.cols();

  CrfNllResult r;
  r.loss = marg.log_z - path_score(em, gold, p);
  r.d_emissions = marg.node;
  r.d_params = CrfParams::zeros(p.num_tags());
  r.d_params.transitions = marg.edge;
  r.d_params.start = marg.node.col(0);
  r.d_params.end = marg.node.col(L - 1);

  for (Eigen::Index t = 0; t < L; ++t) {
    r.d_emissions(gold[static_cast<std::size_t>(t)], t) -= 1.0;
    if (t + 1 < L) {
      r.d_params.transitions(gold[static_cast<std::size_t>(t)],
                             gold[static_cast<std::size_t>(t + 1)]) -= 1.0;
    }
  }
  r.d_params.start(gold.front()) -= 1.0;
  r.d_params.end(gold.back()) -= 1.0;
  return r;
}

ViterbiResult viterbi(const Mat& em, const CrfParams& p, bool constrained) {
  check_emissions(em, p);
  const Eigen::Index K = em.rows();
  const Eigen::Index L = em.cols();

  Mat trans = p.transitions;
  Vec start = p.start;
  if (constrained) {
    const int o = static_cast<int>(IobTag::O);
    const int i = static_cast<int>(IobTag::I);
    trans(o, i) = kNegInf;
    start(i) = kNegInf;
  }

  Vec score = start + em.col(0);
  Vec next(K);
  std::vector<int> back(static_cast<std::size_t>((L - 1) * K));
  for (Eigen::Index t = 1; t < L; ++t) {
    for (Eigen::Index j = 0; j < K; ++j) {
      double best = kNegInf;
      int best_i = 0;
      for (Eigen::Index i = 0; i < K; ++i) {
        const double s = score(i) + trans(i, j);
        if (s > best) {
          best = s;
          best_i = static_cast<int>(i);
        }
      }
      next(j) = best + em(j, t);
      back[static_cast<std::size_t>((t - 1) * K + j)] = best_i;
    }
    std::swap(score, next);
  }
  score += p.end;

  ViterbiResult r;
  int last = 0;
  double best = score(0);
  for (Eigen::Index k = 1; k < K; ++k) {
    if (score(k) > best) {
      best = score(k);
      last = static_cast<int>(k);
    }
  }
  r.score = best;
  r.tags.resize(static_cast<std::size_t>(L));
  r.tags.back() = last;
  for (Eigen::Index t = L - 2; t >= 0; --t) {
    r.tags[static_cast<std::size_t>(t)] =
        back[static_cast<std::size_t>(t * K + r.tags[static_cast<std::size_t>(t + 1)])];
  }
  return r;
}

}  // namespace aspex
