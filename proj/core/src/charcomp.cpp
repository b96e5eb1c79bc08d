#include "aspex/charcomp.hpp"

namespace aspex {

CharComposerParams CharComposerParams::zeros(std::size_t vocab_size, const CharComposerDims& d) {
  CharComposerParams p;
  p.embeddings = Mat::Zero(d.char_dim, static_cast<Eigen::Index>(vocab_size));
  p.fwd = LstmParams::zeros(d.char_dim, d.hidden);
  p.bwd = LstmParams::zeros(d.char_dim, d.hidden);
  p.proj = DenseParams::zeros(2 * d.hidden, d.output);
  return p;
}

void CharComposerParams::init(Rng& rng) {
  for (Eigen::Index j = 0; j < embeddings.cols(); ++j) {
    for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
      embeddings(i, j) = rng.uniform(-0.25, 0.25);
    }
  }
  fwd.init(rng);
  bwd.init(rng);
  proj.glorot(rng);
}

void CharComposerParams::set_zero() {
  embeddings.setZero();
  fwd.set_zero();
  bwd.set_zero();
  proj.set_zero();
}

void CharComposerParams::append_views(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back(view_of(prefix + ".embeddings", embeddings));
  fwd.append_views(prefix + ".fwd", out);
  bwd.append_views(prefix + ".bwd", out);
  proj.append_views(prefix + ".proj", out);
}

ComposeTrace compose_trace(const std::vector<std::size_t>& char_ids, const CharComposerParams& p,
                           Mode mode, double dropout_rate, Rng& rng) {
  if (char_ids.empty()) throw ValidationError("compose_word: empty word");
  const auto n = static_cast<Eigen::Index>(char_ids.size());
  const Eigen::Index H = p.fwd.hidden_dim();

  ComposeTrace tr;
  tr.ids = char_ids;
  tr.chars.resize(p.embeddings.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto id = static_cast<Eigen::Index>(char_ids[static_cast<std::size_t>(k)]);
    tr.chars.col(k) = p.embeddings.col(id < p.embeddings.cols() ? id : 0);
  }
  tr.fwd = lstm_forward(tr.chars, p.fwd, false);
  tr.bwd = lstm_forward(tr.chars, p.bwd, true);
  tr.states.resize(2 * H);
  tr.states << tr.fwd.h.col(n - 1), tr.bwd.h.col(0);
  tr.out = (p.proj.W * tr.states + p.proj.b).array().tanh().matrix();
  tr.mask = dropout_mask(tr.out.size(), 1, dropout_rate, mode, rng);
  tr.result = tr.out.cwiseProduct(tr.mask);
  return tr;
}

void compose_backward(const ComposeTrace& tr, const Vec& d_result, const CharComposerParams& p,
                      CharComposerParams& grad) {
  const auto n = tr.chars.cols();
  const Eigen::Index H = p.fwd.hidden_dim();
  const Vec d_pre = d_result.cwiseProduct(tr.mask).cwiseProduct(
      (1.0 - tr.out.array().square()).matrix());
  grad.proj.W.noalias() += d_pre * tr.states.transpose();
  grad.proj.b += d_pre;
  const Vec d_states = p.proj.W.transpose() * d_pre;

  Mat dh_f = Mat::Zero(H, n);
  dh_f.col(n - 1) = d_states.head(H);
  Mat dh_b = Mat::Zero(H, n);
  dh_b.col(0) = d_states.tail(H);
  Mat d_chars = lstm_backward(tr.chars, tr.fwd, dh_f, p.fwd, grad.fwd);
  d_chars += lstm_backward(tr.chars, tr.bwd, dh_b, p.bwd, grad.bwd);

  for (Eigen::Index k = 0; k < n; ++k) {
    auto id = static_cast<Eigen::Index>(tr.ids[static_cast<std::size_t>(k)]);
    if (id >= p.embeddings.cols()) id = 0;
    grad.embeddings.col(id) += d_chars.col(k);
  }
}

Vec compose_word(std::string_view word, const CharVocab& vocab, const CharComposerParams& p,
                 Mode mode, Rng& rng, double dropout_rate) {
  return compose_trace(vocab.encode(word), p, mode, dropout_rate, rng).result;
}

Vec word_representation(std::string_view word, const EmbeddingTable& table,
                        const CharComposerParams* composer, const CharVocab& vocab, Mode mode,
                        Rng& rng, double dropout_rate) {
  const auto w = table.lookup(word);
  const Eigen::Map<const Vec> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  if (!composer) return wv;
  const Vec c = compose_word(word, vocab, *composer, mode, rng, dropout_rate);
  Vec out(wv.size() + c.size());
  out << wv, c;
  return out;
}

}  // namespace aspex
