#include "aspex/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aspex {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void glorot_block(Eigen::Block<Mat> block, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(block.rows() + block.cols()));
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = rng.uniform(-limit, limit);
  }
}

// Activates a pre-activation column in place: sigmoid on i, f, o and tanh
// on the candidate block.
void activate_gates(Eigen::Ref<Vec> a, Eigen::Index H) {
  for (Eigen::Index k = 0; k < 4 * H; ++k) {
    a(k) = (k >= 2 * H && k < 3 * H) ? std::tanh(a(k)) : sigmoid(a(k));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense

DenseParams DenseParams::zeros(Eigen::Index in, Eigen::Index out) {
  return {Mat::Zero(out, in), Vec::Zero(out)};
}

void DenseParams::glorot(Rng& rng) {
  glorot_block(W.block(0, 0, W.rows(), W.cols()), rng);
  b.setZero();
}

void DenseParams::set_zero() {
  W.setZero();
  b.setZero();
}

void DenseParams::append_views(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back(view_of(prefix + ".W", W));
  out.push_back(view_of(prefix + ".b", b));
}

Mat dense_forward(const Mat& x, const DenseParams& p) {
  Mat y = p.W * x;
  y.colwise() += p.b;
  return y;
}

Mat dense_backward(const Mat& x, const Mat& dy, const DenseParams& p, DenseParams& grad) {
  grad.W.noalias() += dy * x.transpose();
  grad.b += dy.rowwise().sum();
  return p.W.transpose() * dy;
}

// ---------------------------------------------------------------------------
// LSTM

LstmParams LstmParams::zeros(Eigen::Index input_dim, Eigen::Index hidden_dim) {
  return {Mat::Zero(4 * hidden_dim, input_dim), Mat::Zero(4 * hidden_dim, hidden_dim),
          Vec::Zero(4 * hidden_dim)};
}

void LstmParams::init(Rng& rng) {
  const Eigen::Index H = hidden_dim();
  for (int g = 0; g < 4; ++g) {
    glorot_block(W.block(g * H, 0, H, W.cols()), rng);
    glorot_block(U.block(g * H, 0, H, H), rng);
  }
  b.setZero();
  b.segment(H, H).setOnes();
}

void LstmParams::set_zero() {
  W.setZero();
  U.setZero();
  b.setZero();
}

void LstmParams::append_views(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back(view_of(prefix + ".W", W));
  out.push_back(view_of(prefix + ".U", U));
  out.push_back(view_of(prefix + ".b", b));
}

LstmStep lstm_step(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p) {
  if (!x.allFinite() || !h_prev.allFinite() || !c_prev.allFinite()) {
    throw NumericError("lstm_step: non-finite input");
  }
  const Eigen::Index H = p.hidden_dim();
  LstmStep s;
  s.gates = p.W * x + p.U * h_prev + p.b;
  activate_gates(s.gates, H);
  s.c = s.gates.segment(H, H).cwiseProduct(c_prev) +
        s.gates.segment(0, H).cwiseProduct(s.gates.segment(2 * H, H));
  s.h = s.gates.segment(3 * H, H).cwiseProduct(s.c.array().tanh().matrix());
  return s;
}

LstmTrace lstm_forward(const Mat& seq, const LstmParams& p, bool reverse) {
  const Eigen::Index L = seq.cols();
  const Eigen::Index H = p.hidden_dim();
  if (!seq.allFinite()) throw NumericError("lstm_forward: non-finite input");

  LstmTrace tr;
  tr.reverse = reverse;
  tr.gates = p.W * seq;
  tr.gates.colwise() += p.b;
  tr.c.resize(H, L);
  tr.h.resize(H, L);

  Vec h_prev = Vec::Zero(H);
  Vec c_prev = Vec::Zero(H);
  for (Eigen::Index s = 0; s < L; ++s) {
    const Eigen::Index t = reverse ? L - 1 - s : s;
    auto a = tr.gates.col(t);
    a.noalias() += p.U * h_prev;
    activate_gates(a, H);
    tr.c.col(t) = a.segment(H, H).cwiseProduct(c_prev) +
                  a.segment(0, H).cwiseProduct(a.segment(2 * H, H));
    tr.h.col(t) = a.segment(3 * H, H).cwiseProduct(tr.c.col(t).array().tanh().matrix());
    h_prev = tr.h.col(t);
    c_prev = tr.c.col(t);
  }
  return tr;
}

Mat lstm_backward(const Mat& seq, const LstmTrace& tr, const Mat& dh, const LstmParams& p,
                  LstmParams& grad) {
  const Eigen::Index L = seq.cols();
  const Eigen::Index H = p.hidden_dim();

  Mat da(4 * H, L);
  Mat h_prev_all = Mat::Zero(H, L);
  Vec dh_next = Vec::Zero(H);
  Vec dc_next = Vec::Zero(H);

  for (Eigen::Index s = L - 1; s >= 0; --s) {
    const Eigen::Index t = tr.reverse ? L - 1 - s : s;
    const bool has_prev = s > 0;
    const Eigen::Index tp = tr.reverse ? t + 1 : t - 1;

    const auto a = tr.gates.col(t);
    const auto i = a.segment(0, H).array();
    const auto f = a.segment(H, H).array();
    const auto g = a.segment(2 * H, H).array();
    const auto o = a.segment(3 * H, H).array();
    const Eigen::ArrayXd tanh_c = tr.c.col(t).array().tanh();
    const Eigen::ArrayXd c_prev =
        has_prev ? Eigen::ArrayXd(tr.c.col(tp).array()) : Eigen::ArrayXd::Zero(H);

    const Eigen::ArrayXd dh_total = dh.col(t).array() + dh_next.array();
    const Eigen::ArrayXd d_o = dh_total * tanh_c;
    const Eigen::ArrayXd dc = dc_next.array() + dh_total * o * (1.0 - tanh_c.square());

    auto dcol = da.col(t);
    dcol.segment(0, H) = (dc * g * i * (1.0 - i)).matrix();
    dcol.segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
    dcol.segment(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
    dcol.segment(3 * H, H) = (d_o * o * (1.0 - o)).matrix();

    dc_next = (dc * f).matrix();
    dh_next.noalias() = p.U.transpose() * dcol;
    if (has_prev) h_prev_all.col(t) = tr.h.col(tp);
  }

  grad.W.noalias() += da * seq.transpose();
  grad.U.noalias() += da * h_prev_all.transpose();
  grad.b += da.rowwise().sum();
  return p.W.transpose() * da;
}

Mat run_bilstm(const Mat& seq, const LstmParams& fwd, const LstmParams& bwd) {
  if (seq.cols() == 0) throw ValidationError("run_bilstm: empty sequence");
  const auto f = lstm_forward(seq, fwd, false);
  const auto b = lstm_forward(seq, bwd, true);
  Mat out(f.h.rows() + b.h.rows(), seq.cols());
  out << f.h, b.h;
  return out;
}

Vec run_lstm_last_state(const Mat& seq, const LstmParams& p) {
  if (seq.cols() == 0) throw ValidationError("run_lstm_last_state: empty sequence");
  const auto tr = lstm_forward(seq, p, false);
  return tr.h.col(seq.cols() - 1);
}

// ---------------------------------------------------------------------------
// Dropout

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
  if (mode == Mode::Infer || rate == 0.0) return Mat::Ones(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform() < rate ? 0.0 : keep;
  }
  return m;
}

Mat dropout(const Mat& x, double rate, Mode mode, Rng& rng) {
  if (mode == Mode::Infer || rate == 0.0) return x;
  return x.cwiseProduct(dropout_mask(x.rows(), x.cols(), rate, mode, rng));
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy

double log_sum_exp(const Eigen::Ref<const Vec>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

XentResult softmax_xent(const Mat& scores, std::span<const int> gold,
                        std::span<const std::uint8_t> mask) {
  const Eigen::Index N = scores.cols();
  if (gold.size() != static_cast<std::size_t>(N) || mask.size() != gold.size()) {
    throw ValidationError("softmax_xent: gold/mask length mismatch");
  }
  XentResult res;
  res.grad = Mat::Zero(scores.rows(), N);
  for (Eigen::Index n = 0; n < N; ++n) {
    if (!mask[n]) continue;
    ++res.count;
    const double lse = log_sum_exp(scores.col(n));
    res.loss += lse - scores(gold[n], n);
    res.grad.col(n) = (scores.col(n).array() - lse).exp().matrix();
    res.grad(gold[n], n) -= 1.0;
  }
  if (res.count > 0) {
    const double inv = 1.0 / static_cast<double>(res.count);
    res.loss *= inv;
    res.grad *= inv;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Adam

void adam_update(std::vector<ParamView>& params, const std::vector<ParamView>& grads,
                 AdamState& st) {
  if (params.size() != grads.size()) throw ValidationError("adam_update: group count mismatch");
  for (std::size_t g = 0; g < grads.size(); ++g) {
    if (params[g].data.size() != grads[g].data.size()) {
      throw ValidationError("adam_update: shape mismatch in " + params[g].name);
    }
    for (double x : grads[g].data) {
      if (!std::isfinite(x)) throw NumericError("non-finite gradient in " + grads[g].name);
    }
  }
  if (st.m.empty()) {
    for (const auto& p : params) {
      st.m.emplace_back(p.data.size(), 0.0);
      st.v.emplace_back(p.data.size(), 0.0);
    }
  }
  const auto& c = st.config;
  ++st.t;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.t));
  for (std::size_t g = 0; g < params.size(); ++g) {
    auto& m = st.m[g];
    auto& v = st.v[g];
    auto theta = params[g].data;
    const auto grad = grads[g].data;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * grad[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      theta[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

double clip_global_norm(std::vector<ParamView>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.data) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& g : grads) {
      for (double& x : g.data) x *= scale;
    }
  }
  return norm;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult grad_check(const std::function<double()>& loss, std::vector<ParamView> params,
                           const std::vector<ParamView>& analytic, const GradCheckOptions& opts) {
  if (params.size() != analytic.size()) {
    throw ValidationError("grad_check: group count mismatch");
  }
  Rng rng(opts.seed);
  GradCheckResult res;
  for (std::size_t g = 0; g < params.size(); ++g) {
    auto data = params[g].data;
    const auto an = analytic[g].data;
    std::vector<std::size_t> coords(data.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > opts.samples_per_group) {
      rng.shuffle(coords);
      coords.resize(opts.samples_per_group);
    }
    GradCheckGroup grp{params[g].name, coords.size(), 0.0};
    for (std::size_t k : coords) {
      const double saved = data[k];
      data[k] = saved + opts.eps;
      const double up = loss();
      data[k] = saved - opts.eps;
      const double down = loss();
      data[k] = saved;
      const double numeric = (up - down) / (2.0 * opts.eps);
      const double rel =
          std::abs(an[k] - numeric) / std::max(1e-8, std::abs(an[k]) + std::abs(numeric));
      grp.max_rel_error = std::max(grp.max_rel_error, rel);
    }
    res.max_rel_error = std::max(res.max_rel_error, grp.max_rel_error);
    res.groups.push_back(std::move(grp));
  }
  return res;
}

}  // namespace aspex
