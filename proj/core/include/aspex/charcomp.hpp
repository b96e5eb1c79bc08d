#pragma once

#include <string_view>
#include <vector>

#include "aspex/embeddings.hpp"
#include "aspex/net.hpp"

namespace aspex {

struct CharComposerDims {
  Eigen::Index char_dim = 25;
  Eigen::Index hidden = 25;
  Eigen::Index output = 50;
};

/// Word-from-characters encoder: char embeddings -> char BiLSTM -> the two
/// last states concatenated -> tanh projection.
struct CharComposerParams {
  Mat embeddings;  // char_dim x |C|, column 0 is the unknown character
  LstmParams fwd;
  LstmParams bwd;
  DenseParams proj;  // (2 * hidden) -> output

  static CharComposerParams zeros(std::size_t vocab_size, const CharComposerDims& dims = {});
  /// Char embeddings uniform in [-0.25, 0.25]; LSTMs and projection Glorot.
  void init(Rng& rng);
  void set_zero();
  void append_views(const std::string& prefix, std::vector<ParamView>& out);
  Eigen::Index output_dim() const { return proj.W.rows(); }
};

struct ComposeTrace {
  std::vector<std::size_t> ids;
  Mat chars;  // char_dim x n
  LstmTrace fwd;
  LstmTrace bwd;
  Vec states;  // [fwd last ; bwd last]
  Vec out;     // tanh(proj(states)) before dropout
  Vec mask;    // dropout mask
  Vec result;  // out .* mask
};

/// Throws ValidationError for an empty id sequence.
ComposeTrace compose_trace(const std::vector<std::size_t>& char_ids, const CharComposerParams& p,
                           Mode mode, double dropout_rate, Rng& rng);

/// Accumulates parameter gradients (including the embedding columns used)
/// for dL/dresult = d_result.
void compose_backward(const ComposeTrace& tr, const Vec& d_result, const CharComposerParams& p,
                      CharComposerParams& grad);

Vec compose_word(std::string_view word, const CharVocab& vocab, const CharComposerParams& p,
                 Mode mode, Rng& rng, double dropout_rate = 0.5);

/// Word vector, followed by the composed char vector when `composer` is set.
Vec word_representation(std::string_view word, const EmbeddingTable& table,
                        const CharComposerParams* composer, const CharVocab& vocab, Mode mode,
                        Rng& rng, double dropout_rate = 0.5);

}  // namespace aspex
