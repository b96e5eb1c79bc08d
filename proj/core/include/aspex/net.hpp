#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aspex/common.hpp"

// Layout convention: sequences are stored column-per-position, i.e. a
// sequence of L vectors of width D is a D x L matrix. Emission/score
// matrices are K x L.

namespace aspex {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Mode { Train, Infer };

/// Named, contiguous view of one parameter (or gradient) array.
struct ParamView {
  std::string name;
  std::span<double> data;
};

inline ParamView view_of(std::string name, Mat& m) {
  return {std::move(name), {m.data(), static_cast<std::size_t>(m.size())}};
}
inline ParamView view_of(std::string name, Vec& v) {
  return {std::move(name), {v.data(), static_cast<std::size_t>(v.size())}};
}

// ---------------------------------------------------------------------------
// Dense

struct DenseParams {
  Mat W;  // out x in
  Vec b;  // out

  static DenseParams zeros(Eigen::Index in, Eigen::Index out);
  void glorot(Rng& rng);
  void set_zero();
  void append_views(const std::string& prefix, std::vector<ParamView>& out);
};

/// y = W x + b for every column of x.
Mat dense_forward(const Mat& x, const DenseParams& p);
/// Accumulates into grad; returns dL/dx.
Mat dense_backward(const Mat& x, const Mat& dy, const DenseParams& p, DenseParams& grad);

// ---------------------------------------------------------------------------
// LSTM

/// Gate blocks are stacked in the order input, forget, cell candidate,
/// output: rows [0,H) are the input gate, [H,2H) forget, [2H,3H) candidate,
/// [3H,4H) output.
struct LstmParams {
  Mat W;  // 4H x D
  Mat U;  // 4H x H
  Vec b;  // 4H

  static LstmParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim);
  Eigen::Index input_dim() const { return W.cols(); }
  Eigen::Index hidden_dim() const { return U.cols(); }
  /// Glorot-uniform per gate block, zero biases, forget-gate bias 1.
  void init(Rng& rng);
  void set_zero();
  void append_views(const std::string& prefix, std::vector<ParamView>& out);
};

struct LstmStep {
  Vec gates;  // activated i, f, g, o stacked (4H)
  Vec c;
  Vec h;
};

/// One recurrence step. Throws NumericError on non-finite input.
LstmStep lstm_step(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p);

/// Activations of a full scan. Column t always refers to input position t,
/// also for a reversed scan (which consumes positions L-1 .. 0).
struct LstmTrace {
  bool reverse = false;
  Mat gates;  // 4H x L
  Mat c;      // H x L
  Mat h;      // H x L
};

LstmTrace lstm_forward(const Mat& seq, const LstmParams& p, bool reverse = false);

/// Backpropagation through time. `dh` holds dL/dh per position (H x L).
/// Parameter gradients are accumulated into `grad`; returns dL/dseq.
Mat lstm_backward(const Mat& seq, const LstmTrace& trace, const Mat& dh, const LstmParams& p,
                  LstmParams& grad);

/// Forward and backward hidden states concatenated per position (2H x L).
/// Throws ValidationError on an empty sequence.
Mat run_bilstm(const Mat& seq, const LstmParams& fwd, const LstmParams& bwd);

/// h after a forward scan from zero state.
Vec run_lstm_last_state(const Mat& seq, const LstmParams& p);

// ---------------------------------------------------------------------------
// Dropout

/// Inverted dropout. Returns the multiplicative mask (0 or 1/(1-rate)); in
/// Infer mode or with rate 0 the mask is all ones.
Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Mode mode, Rng& rng);

Mat dropout(const Mat& x, double rate, Mode mode, Rng& rng);

// ---------------------------------------------------------------------------
// Softmax cross-entropy

struct XentResult {
  double loss = 0.0;
  Mat grad;  // K x N, dL/dscores
  std::size_t count = 0;
};

/// Mean of -log softmax(scores[:,n])[gold[n]] over positions with mask 1.
/// The gradient is (softmax - onehot) / count on unmasked columns and zero
/// on masked ones.
XentResult softmax_xent(const Mat& scores, std::span<const int> gold,
                        std::span<const std::uint8_t> mask);

/// Column-wise log-sum-exp.
double log_sum_exp(const Eigen::Ref<const Vec>& v);

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam step over parallel parameter/gradient views.
/// Throws NumericError naming the group when a gradient is non-finite; in
/// that case no parameter is modified.
void adam_update(std::vector<ParamView>& params, const std::vector<ParamView>& grads,
                 AdamState& state);

/// Scales gradients in place so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_global_norm(std::vector<ParamView>& grads, double max_norm);

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t samples_per_group = 200;
  std::uint64_t seed = 17;
};

struct GradCheckGroup {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
};

struct GradCheckResult {
  std::vector<GradCheckGroup> groups;
  double max_rel_error = 0.0;
};

/// Central differences on a sampled subset of coordinates of every group
/// (all coordinates when a group is smaller than samples_per_group).
/// `loss` must read the parameters through `params` and be deterministic.
/// Relative error is |a - n| / max(1e-8, |a| + |n|).
GradCheckResult grad_check(const std::function<double()>& loss, std::vector<ParamView> params,
                           const std::vector<ParamView>& analytic,
                           const GradCheckOptions& opts = {});

}  // namespace aspex
