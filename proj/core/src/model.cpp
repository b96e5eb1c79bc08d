#include "aspex/model.hpp"

#include <algorithm>

namespace aspex {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;  // "init"

struct VariantBits {
  bool use_char;
  bool bidirectional;
  bool use_crf;
};

std::string variant_name(VariantBits v) {
  std::string s = v.use_char ? "WoCh-" : "Wo-";
  s += v.bidirectional ? "BiLSTM" : "LSTM";
  if (v.use_crf) s += "-CRF";
  return s;
}

Eigen::Index encoder_width(const ModelConfig& c) {
  return c.bidirectional ? 2 * c.hidden : c.hidden;
}

}  // namespace

std::string ModelConfig::variant() const {
  return variant_name({use_char, bidirectional, use_crf});
}

const std::vector<std::string>& all_variants() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (bool bi : {false, true}) {
      for (bool crf : {false, true}) {
        for (bool ch : {false, true}) out.push_back(variant_name({ch, bi, crf}));
      }
    }
    return out;
  }();
  return names;
}

ModelConfig ModelConfig::from_variant(std::string_view name) {
  for (bool ch : {false, true}) {
    for (bool bi : {false, true}) {
      for (bool crf : {false, true}) {
        if (variant_name({ch, bi, crf}) == name) {
          ModelConfig c;
          c.use_char = ch;
          c.bidirectional = bi;
          c.use_crf = crf;
          return c;
        }
      }
    }
  }
  std::string known;
  for (const auto& v : all_variants()) known += (known.empty() ? "" : ", ") + v;
  throw ConfigError("unknown model variant '" + std::string(name) + "' (expected one of " +
                    known + ")");
}

std::vector<ParamView> ModelParams::views() {
  std::vector<ParamView> out;
  if (chars) chars->append_views("chars", out);
  encoder_fwd.append_views("encoder.fwd", out);
  if (encoder_bwd) encoder_bwd->append_views("encoder.bwd", out);
  projection.append_views("projection", out);
  if (crf) crf->append_views("crf", out);
  return out;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  if (z.chars) z.chars->set_zero();
  z.encoder_fwd.set_zero();
  if (z.encoder_bwd) z.encoder_bwd->set_zero();
  z.projection.set_zero();
  if (z.crf) z.crf->set_zero();
  return z;
}

std::size_t ModelParams::parameter_count() const {
  auto lstm = [](const LstmParams& l) {
    return static_cast<std::size_t>(l.W.size() + l.U.size() + l.b.size());
  };
  std::size_t n = lstm(encoder_fwd) +
                  static_cast<std::size_t>(projection.W.size() + projection.b.size());
  if (encoder_bwd) n += lstm(*encoder_bwd);
  if (chars) {
    n += static_cast<std::size_t>(chars->embeddings.size() + chars->proj.W.size() +
                                  chars->proj.b.size()) +
         lstm(chars->fwd) + lstm(chars->bwd);
  }
  if (crf) n += static_cast<std::size_t>(crf->transitions.size() + crf->start.size() + crf->end.size());
  return n;
}

Eigen::Index Model::input_dim() const {
  const auto w = static_cast<Eigen::Index>(table->dim());
  return config.use_char ? w + config.char_dims.output : w;
}

ModelParams zero_params(const ModelConfig& config, Eigen::Index word_dim,
                        std::size_t char_vocab_size) {
  const Eigen::Index input =
      config.use_char ? word_dim + config.char_dims.output : word_dim;
  ModelParams p;
  if (config.use_char) p.chars = CharComposerParams::zeros(char_vocab_size, config.char_dims);
  p.encoder_fwd = LstmParams::zeros(input, config.hidden);
  if (config.bidirectional) p.encoder_bwd = LstmParams::zeros(input, config.hidden);
  p.projection = DenseParams::zeros(encoder_width(config), kNumTags);
  if (config.use_crf) p.crf = CrfParams::zeros(kNumTags);
  return p;
}

Model build(const ModelConfig& config, const EmbeddingTable& table, CharVocab chars) {
  if (config.embedding != table.name()) {
    throw ConfigError("model config names embedding '" + config.embedding +
                      "' but the loaded table is '" + table.name() + "'");
  }
  if (config.hidden <= 0) throw ConfigError("hidden size must be positive");
  if (config.max_length == 0) throw ConfigError("max_length must be positive");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) {
    throw ConfigError("dropout must be in [0, 1)");
  }

  Model m;
  m.config = config;
  m.chars = std::move(chars);
  m.table = &table;
  m.params = zero_params(config, static_cast<Eigen::Index>(table.dim()), m.chars.size());

  Rng rng(mix_seed(config.seed, kInitStream));
  if (m.params.chars) m.params.chars->init(rng);
  m.params.encoder_fwd.init(rng);
  if (m.params.encoder_bwd) m.params.encoder_bwd->init(rng);
  m.params.projection.glorot(rng);
  return m;
}

SequenceBatch make_batch(std::span<const TaggedSentence* const> sentences,
                         std::size_t max_length) {
  SequenceBatch b;
  for (const auto* s : sentences) {
    b.length = std::max(b.length, std::min(s->tokens.size(), max_length));
  }
  for (const auto* s : sentences) {
    const std::size_t n = std::min(s->tokens.size(), max_length);
    std::vector<std::string> w;
    std::vector<int> g(b.length, 0);
    std::vector<std::uint8_t> m(b.length, 0);
    for (std::size_t k = 0; k < n; ++k) {
      w.push_back(s->tokens[k].text);
      g[k] = static_cast<int>(s->tags[k]);
      m[k] = 1;
    }
    b.words.push_back(std::move(w));
    b.gold.push_back(std::move(g));
    b.mask.push_back(std::move(m));
  }
  return b;
}

SentenceTrace forward_trace(const Model& model, std::span<const std::string> words, Mode mode,
                            Rng& rng) {
  if (words.empty()) throw ValidationError("forward: empty sentence");
  const auto& cfg = model.config;
  const auto& p = model.params;
  const auto L = static_cast<Eigen::Index>(words.size());
  const auto Dw = static_cast<Eigen::Index>(model.table->dim());

  SentenceTrace tr;
  tr.word_inputs.resize(Dw, L);
  for (Eigen::Index t = 0; t < L; ++t) {
    const auto v = model.table->lookup(words[static_cast<std::size_t>(t)]);
    tr.word_inputs.col(t) = Eigen::Map<const Vec>(v.data(), Dw);
  }
  tr.word_mask = dropout_mask(Dw, L, cfg.dropout, mode, rng);
  tr.word_inputs = tr.word_inputs.cwiseProduct(tr.word_mask);

  tr.inputs.resize(model.input_dim(), L);
  tr.inputs.topRows(Dw) = tr.word_inputs;
  if (cfg.use_char) {
    const Eigen::Index Dc = p.chars->output_dim();
    tr.chars.reserve(words.size());
    for (Eigen::Index t = 0; t < L; ++t) {
      tr.chars.push_back(compose_trace(model.chars.encode(words[static_cast<std::size_t>(t)]),
                                       *p.chars, mode, cfg.dropout, rng));
      tr.inputs.col(t).tail(Dc) = tr.chars.back().result;
    }
  }

  tr.fwd = lstm_forward(tr.inputs, p.encoder_fwd, false);
  if (cfg.bidirectional) {
    tr.bwd = lstm_forward(tr.inputs, *p.encoder_bwd, true);
    tr.encoded.resize(2 * cfg.hidden, L);
    tr.encoded << tr.fwd.h, tr.bwd->h;
  } else {
    tr.encoded = tr.fwd.h;
  }
  tr.encoded_mask = dropout_mask(tr.encoded.rows(), L, cfg.dropout, mode, rng);
  tr.encoded_dropped = tr.encoded.cwiseProduct(tr.encoded_mask);
  tr.emissions = dense_forward(tr.encoded_dropped, p.projection);
  if (!tr.emissions.allFinite()) throw NumericError("forward: non-finite emissions");
  return tr;
}

void backward(const Model& model, const SentenceTrace& tr, const Mat& d_emissions,
              ModelParams& grad) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const Eigen::Index H = cfg.hidden;
  const Eigen::Index L = tr.inputs.cols();

  const Mat d_encoded =
      dense_backward(tr.encoded_dropped, d_emissions, p.projection, grad.projection)
          .cwiseProduct(tr.encoded_mask);

  Mat d_inputs = lstm_backward(tr.inputs, tr.fwd, d_encoded.topRows(H), p.encoder_fwd,
                               grad.encoder_fwd);
  if (cfg.bidirectional) {
    d_inputs += lstm_backward(tr.inputs, *tr.bwd, d_encoded.bottomRows(H), *p.encoder_bwd,
                              *grad.encoder_bwd);
  }

  if (cfg.use_char) {
    const Eigen::Index Dc = p.chars->output_dim();
    for (Eigen::Index t = 0; t < L; ++t) {
      const Vec d_char = d_inputs.col(t).tail(Dc);
      compose_backward(tr.chars[static_cast<std::size_t>(t)], d_char, *p.chars, *grad.chars);
    }
  }
  // Word vectors are frozen; their rows of d_inputs are discarded.
}

Mat forward(const Model& model, std::span<const std::string> words, Mode mode, Rng& rng) {
  const std::size_t n = std::min(words.size(), model.config.max_length);
  return forward_trace(model, words.first(n), mode, rng).emissions;
}

LossResult loss(const Model& model, const SequenceBatch& batch, Mode mode, Rng& rng) {
  LossResult res;
  res.grad = model.params.zeros_like();
  const std::size_t B = batch.size();
  if (B == 0) return res;

  std::vector<SentenceTrace> traces;
  traces.reserve(B);
  for (std::size_t s = 0; s < B; ++s) {
    traces.push_back(forward_trace(model, batch.words[s], mode, rng));
  }

  if (model.config.use_crf) {
    const double inv = 1.0 / static_cast<double>(B);
    for (std::size_t s = 0; s < B; ++s) {
      const auto L = static_cast<std::size_t>(traces[s].emissions.cols());
      const std::span<const int> gold(batch.gold[s].data(), L);
      auto nll = crf_nll(traces[s].emissions, gold, *model.params.crf);
      res.loss += inv * nll.loss;
      res.grad.crf->transitions += inv * nll.d_params.transitions;
      res.grad.crf->start += inv * nll.d_params.start;
      res.grad.crf->end += inv * nll.d_params.end;
      backward(model, traces[s], inv * nll.d_emissions, res.grad);
    }
    return res;
  }

  const auto Lp = static_cast<Eigen::Index>(batch.length);
  Mat scores = Mat::Zero(kNumTags, static_cast<Eigen::Index>(B) * Lp);
  std::vector<int> gold;
  std::vector<std::uint8_t> mask;
  gold.reserve(B * batch.length);
  mask.reserve(B * batch.length);
  for (std::size_t s = 0; s < B; ++s) {
    const auto& em = traces[s].emissions;
    scores.block(0, static_cast<Eigen::Index>(s) * Lp, kNumTags, em.cols()) = em;
    gold.insert(gold.end(), batch.gold[s].begin(), batch.gold[s].end());
    mask.insert(mask.end(), batch.mask[s].begin(), batch.mask[s].end());
  }
  const auto xent = softmax_xent(scores, gold, mask);
  res.loss = xent.loss;
  for (std::size_t s = 0; s < B; ++s) {
    const auto L = traces[s].emissions.cols();
    const Mat d_em = xent.grad.block(0, static_cast<Eigen::Index>(s) * Lp, kNumTags, L);
    backward(model, traces[s], d_em, res.grad);
  }
  return res;
}

std::vector<IobTag> predict(const Model& model, std::span<const std::string> words) {
  std::vector<IobTag> tags(words.size(), IobTag::O);
  if (words.empty()) return tags;
  Rng unused(0);
  const Mat em = forward(model, words, Mode::Infer, unused);
  if (model.config.use_crf) {
    const auto v = viterbi(em, *model.params.crf, model.config.constrained_decoding);
    for (std::size_t t = 0; t < v.tags.size(); ++t) tags[t] = static_cast<IobTag>(v.tags[t]);
  } else {
    for (Eigen::Index t = 0; t < em.cols(); ++t) {
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < em.rows(); ++k) {
        if (em(k, t) > em(best, t)) best = k;
      }
      tags[static_cast<std::size_t>(t)] = static_cast<IobTag>(best);
    }
  }
  return tags;
}

std::vector<std::string> words_of(const TaggedSentence& s) {
  std::vector<std::string> w;
  w.reserve(s.tokens.size());
  for (const auto& t : s.tokens) w.push_back(t.text);
  return w;
}

}  // namespace aspex
