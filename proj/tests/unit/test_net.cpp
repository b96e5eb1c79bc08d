#include <doctest.h>

#include <cmath>

#include "aspex/net.hpp"
#include "oracles.hpp"

using namespace aspex;

namespace {

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

LstmParams random_lstm(Rng& rng, Eigen::Index D, Eigen::Index H) {
  auto p = LstmParams::zeros(D, H);
  p.init(rng);
  for (Eigen::Index i = 0; i < p.b.size(); ++i) p.b(i) += rng.uniform(-0.5, 0.5);
  return p;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("LSTM step closed forms") {
  const Eigen::Index H = 4;
  auto p = LstmParams::zeros(3, H);
  const Vec x = Vec::Ones(3);
  const Vec zero = Vec::Zero(H);

  SUBCASE("all-zero parameters keep a zero state") {
    const auto s = lstm_step(x, zero, zero, p);
    CHECK(s.h.isZero());
    CHECK(s.c.isZero());
    CHECK(s.gates.segment(0, H).isApproxToConstant(0.5));
  }
  SUBCASE("candidate bias only") {
    const double z = 0.8;
    p.b.segment(2 * H, H).setConstant(z);
    const auto s = lstm_step(x, zero, zero, p);
    const double c = 0.5 * std::tanh(z);
    for (Eigen::Index k = 0; k < H; ++k) {
      CHECK(s.c(k) == doctest::Approx(c).epsilon(1e-14));
      CHECK(s.h(k) == doctest::Approx(0.5 * std::tanh(c)).epsilon(1e-14));
    }
  }
  SUBCASE("forget gate carries the previous cell") {
    p.b.segment(H, H).setConstant(50.0);      // f ~ 1
    p.b.segment(0, H).setConstant(-50.0);     // i ~ 0
    const Vec c_prev = Vec::Constant(H, 0.3);
    const auto s = lstm_step(x, zero, c_prev, p);
    CHECK((s.c - c_prev).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("non-finite input is rejected") {
    Vec bad = x;
    bad(1) = std::nan("");
    CHECK_THROWS_AS(lstm_step(bad, zero, zero, p), NumericError);
  }
}

TEST_CASE("LSTM step agrees with the scalar oracle") {
  Rng rng(1);
  for (int iter = 0; iter < 50; ++iter) {
    const Eigen::Index D = 1 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index H = 1 + static_cast<Eigen::Index>(rng.below(6));
    const auto p = random_lstm(rng, D, H);
    const Vec x = random_mat(rng, D, 1, 3.0);
    const Vec h0 = random_mat(rng, H, 1);
    const Vec c0 = random_mat(rng, H, 1, 2.0);
    const auto s = lstm_step(x, h0, c0, p);
    std::vector<double> h;
    std::vector<double> c;
    oracle::lstm_step(to_std(x), to_std(h0), to_std(c0), p.W, p.U, p.b, h, c);
    for (Eigen::Index k = 0; k < H; ++k) {
      CHECK(std::abs(s.h(k) - h[static_cast<std::size_t>(k)]) < 1e-12);
      CHECK(std::abs(s.c(k) - c[static_cast<std::size_t>(k)]) < 1e-12);
      CHECK(std::abs(s.h(k)) < 1.0);
    }
  }
}

TEST_CASE("BiLSTM structural properties") {
  Rng rng(2);
  const Eigen::Index D = 5;
  const Eigen::Index H = 3;
  const auto fwd = random_lstm(rng, D, H);
  const auto bwd = random_lstm(rng, D, H);

  SUBCASE("length one: each half is a single step from zero state") {
    const Mat x = random_mat(rng, D, 1);
    const Mat out = run_bilstm(x, fwd, bwd);
    REQUIRE(out.rows() == 2 * H);
    const Vec z = Vec::Zero(H);
    CHECK(out.col(0).head(H).isApprox(lstm_step(x.col(0), z, z, fwd).h, 1e-14));
    CHECK(out.col(0).tail(H).isApprox(lstm_step(x.col(0), z, z, bwd).h, 1e-14));
  }
  SUBCASE("palindrome with shared weights mirrors the two halves") {
    Mat x = random_mat(rng, D, 5);
    for (int t = 0; t < 2; ++t) x.col(4 - t) = x.col(t);
    const Mat out = run_bilstm(x, fwd, fwd);
    for (int t = 0; t < 5; ++t) {
      CHECK((out.col(t).head(H) - out.col(4 - t).tail(H)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("reverse scan equals forward scan of the reversed input") {
    const Mat x = random_mat(rng, D, 6);
    const auto r = lstm_forward(x, bwd, true);
    const auto f = lstm_forward(x.rowwise().reverse(), bwd, false);
    CHECK((r.h - f.h.rowwise().reverse()).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("last state") {
    const Mat x = random_mat(rng, D, 4);
    CHECK(run_lstm_last_state(x, fwd).isApprox(lstm_forward(x, fwd).h.col(3), 1e-14));
  }
  CHECK_THROWS_AS(run_bilstm(Mat(D, 0), fwd, bwd), ValidationError);
}

TEST_CASE("LSTM BPTT matches finite differences") {
  Rng rng(3);
  const Eigen::Index D = 4;
  const Eigen::Index H = 3;
  for (bool reverse : {false, true}) {
    auto p = random_lstm(rng, D, H);
    Mat x = random_mat(rng, D, 5);
    const Mat w = random_mat(rng, H, 5);  // loss = sum(w .* h)
    auto f = [&] { return (lstm_forward(x, p, reverse).h.array() * w.array()).sum(); };
    const auto tr = lstm_forward(x, p, reverse);
    auto grad = LstmParams::zeros(D, H);
    Mat dx = lstm_backward(x, tr, w, p, grad);

    std::vector<ParamView> params;
    std::vector<ParamView> grads;
    p.append_views("lstm", params);
    grad.append_views("lstm", grads);
    params.push_back(view_of("x", x));
    grads.push_back(view_of("x", dx));
    const auto gc = grad_check(f, params, grads);
    CHECK(gc.max_rel_error < 1e-6);
  }
}

TEST_CASE("dense layer gradient") {
  Rng rng(4);
  auto p = DenseParams::zeros(4, 3);
  p.glorot(rng);
  Mat x = random_mat(rng, 4, 2);
  const Mat w = random_mat(rng, 3, 2);
  auto grad = DenseParams::zeros(4, 3);
  Mat dx = dense_backward(x, w, p, grad);
  std::vector<ParamView> params;
  std::vector<ParamView> grads;
  p.append_views("d", params);
  grad.append_views("d", grads);
  params.push_back(view_of("x", x));
  grads.push_back(view_of("x", dx));
  const auto gc = grad_check([&] { return (dense_forward(x, p).array() * w.array()).sum(); },
                             params, grads);
  CHECK(gc.max_rel_error < 1e-8);
}

TEST_CASE("dropout") {
  Rng rng(5);
  const Mat mask = dropout_mask(1000, 100, 0.5, Mode::Train, rng);
  const double zeros = static_cast<double>((mask.array() == 0.0).count()) / 1e5;
  CHECK(zeros > 0.49);
  CHECK(zeros < 0.51);
  CHECK(((mask.array() == 0.0) || (mask.array() == 2.0)).all());
  CHECK(std::abs(mask.mean() - 1.0) < 0.02);

  CHECK(dropout_mask(5, 5, 0.5, Mode::Infer, rng).isOnes());
  CHECK(dropout_mask(5, 5, 0.0, Mode::Train, rng).isOnes());
  const Mat x = random_mat(rng, 3, 3);
  CHECK(dropout(x, 0.5, Mode::Infer, rng) == x);
}

TEST_CASE("softmax cross-entropy") {
  const Mat scores = Mat::Zero(3, 4);
  const std::vector<int> gold = {0, 1, 2, 0};
  const std::vector<std::uint8_t> all = {1, 1, 1, 1};
  const auto r = softmax_xent(scores, gold, all);
  CHECK(r.loss == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(r.count == 4);

  const std::vector<std::uint8_t> some = {1, 0, 1, 0};
  const auto m = softmax_xent(scores, gold, some);
  CHECK(m.count == 2);
  CHECK(m.grad.col(1).isZero());
  CHECK(m.grad(0, 0) == doctest::Approx((1.0 / 3.0 - 1.0) / 2.0));

  Rng rng(6);
  Mat s = random_mat(rng, 3, 6, 4.0);
  const std::vector<int> g = {2, 0, 1, 1, 0, 2};
  const std::vector<std::uint8_t> mk = {1, 1, 0, 1, 1, 0};
  Mat d = softmax_xent(s, g, mk).grad;
  const auto gc = grad_check([&] { return softmax_xent(s, g, mk).loss; }, {view_of("s", s)},
                             {view_of("s", d)});
  CHECK(gc.max_rel_error < 1e-7);

  Vec big(3);
  big << 1000.0, 1000.0, 1000.0;
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(3.0)));
}

TEST_CASE("Adam") {
  SUBCASE("first step moves each coordinate by lr against the gradient sign") {
    Vec w(3);
    w << 1.0, -2.0, 0.5;
    Vec g(3);
    g << 0.3, -4.0, 1e-3;
    const Vec w0 = w;
    AdamState st;
    std::vector<ParamView> params{view_of("w", w)};
    adam_update(params, {view_of("w", g)}, st);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double step = 1e-3 * g(k) / (std::abs(g(k)) + 1e-8);
      CHECK(w(k) == doctest::Approx(w0(k) - step).epsilon(1e-12));
    }
    CHECK(st.t == 1);
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    Vec w = Vec::Constant(4, 0.7);
    Vec g = Vec::Zero(4);
    AdamState st;
    std::vector<ParamView> params{view_of("w", w)};
    adam_update(params, {view_of("w", g)}, st);
    CHECK(w.isApproxToConstant(0.7, 0.0));
  }
  SUBCASE("two steps against a scalar recurrence") {
    Vec w(1);
    w << 0.25;
    AdamState st;
    st.config.lr = 0.1;
    double x = 0.25, m = 0.0, v = 0.0;
    for (int t = 1; t <= 2; ++t) {
      Vec g(1);
      g << 2.0 * w(0) - 1.0;
      std::vector<ParamView> params{view_of("w", w)};
      adam_update(params, {view_of("w", g)}, st);

      const double gs = 2.0 * x - 1.0;
      m = 0.9 * m + 0.1 * gs;
      v = 0.999 * v + 0.001 * gs * gs;
      const double mh = m / (1.0 - std::pow(0.9, t));
      const double vh = v / (1.0 - std::pow(0.999, t));
      x -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(w(0) == doctest::Approx(x).epsilon(1e-14));
    }
  }
  SUBCASE("non-finite gradient throws and leaves parameters untouched") {
    Vec a = Vec::Ones(2);
    Vec b = Vec::Ones(2);
    Vec ga = Vec::Ones(2);
    Vec gb = Vec::Ones(2);
    gb(1) = std::numeric_limits<double>::infinity();
    AdamState st;
    std::vector<ParamView> params{view_of("a", a), view_of("b", b)};
    CHECK_THROWS_AS(adam_update(params, {view_of("a", ga), view_of("b", gb)}, st),
                    NumericError);
    CHECK(a.isOnes());
    CHECK(b.isOnes());
  }
}

TEST_CASE("global norm clipping") {
  Vec a(2);
  a << 3.0, 0.0;
  Vec b(1);
  b << 4.0;
  std::vector<ParamView> g{view_of("a", a), view_of("b", b)};
  CHECK(clip_global_norm(g, 10.0) == doctest::Approx(5.0));
  CHECK(a(0) == 3.0);
  CHECK(clip_global_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(std::sqrt(a.squaredNorm() + b.squaredNorm()) == doctest::Approx(1.0));
}

TEST_CASE("grad_check detects a corrupted gradient") {
  Rng rng(7);
  Vec x = random_mat(rng, 300, 1);
  const Vec a = random_mat(rng, 300, 1).array().abs() + 0.5;
  auto f = [&] { return (a.array() * x.array().square()).sum(); };
  Vec g = 2.0 * a.cwiseProduct(x);
  auto ok = grad_check(f, {view_of("x", x)}, {view_of("x", g)});
  CHECK(ok.max_rel_error < 1e-6);
  REQUIRE(ok.groups.size() == 1);
  CHECK(ok.groups[0].checked == 200);

  g *= 1.1;
  auto bad = grad_check(f, {view_of("x", x)}, {view_of("x", g)}, {1e-5, 300, 1});
  CHECK(bad.max_rel_error > 1e-2);
}
