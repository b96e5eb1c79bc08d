#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aspex/charcomp.hpp"
#include "aspex/corpus.hpp"
#include "aspex/crf.hpp"
#include "aspex/embeddings.hpp"
#include "aspex/net.hpp"

namespace aspex {

struct ModelConfig {
  bool use_char = false;
  bool bidirectional = false;
  bool use_crf = false;
  Eigen::Index hidden = 100;
  std::size_t max_length = 30;
  double dropout = 0.5;
  std::string embedding;
  std::uint64_t seed = 0;
  CharComposerDims char_dims;
  /// Viterbi with O->I and leading-I forbidden. Only meaningful with a CRF.
  bool constrained_decoding = false;

  /// "Wo-LSTM", "WoCh-BiLSTM-CRF", ...
  std::string variant() const;
  /// Throws ConfigError for names outside the eight supported variants.
  static ModelConfig from_variant(std::string_view name);
};

/// The eight architecture names in table order.
const std::vector<std::string>& all_variants();

struct ModelParams {
  std::optional<CharComposerParams> chars;
  LstmParams encoder_fwd;
  std::optional<LstmParams> encoder_bwd;
  DenseParams projection;  // encoder width -> kNumTags
  std::optional<CrfParams> crf;

  /// Every array exactly once, in a fixed order shared by parameters and
  /// gradients of the same architecture.
  std::vector<ParamView> views();
  ModelParams zeros_like() const;
  std::size_t parameter_count() const;
};

/// A built model. The embedding table is referenced, not owned, and is
/// never updated.
struct Model {
  ModelConfig config;
  CharVocab chars;
  ModelParams params;
  const EmbeddingTable* table = nullptr;

  Eigen::Index input_dim() const;
};

/// Correctly shaped, all-zero parameters for an architecture.
ModelParams zero_params(const ModelConfig& config, Eigen::Index word_dim,
                        std::size_t char_vocab_size);

/// Deterministic given config.seed. Throws ConfigError when the config's
/// embedding name does not match the table.
Model build(const ModelConfig& config, const EmbeddingTable& table, CharVocab chars);

/// Padded mini-batch; positions past a sentence's length have mask 0.
struct SequenceBatch {
  std::vector<std::vector<std::string>> words;  // truncated to max_length
  std::size_t length = 0;
  std::vector<std::vector<int>> gold;
  std::vector<std::vector<std::uint8_t>> mask;

  std::size_t size() const { return words.size(); }
};

SequenceBatch make_batch(std::span<const TaggedSentence* const> sentences,
                         std::size_t max_length);

/// Activations of one sentence, kept for the backward pass.
struct SentenceTrace {
  Mat word_inputs;        // word rows of the encoder input (after dropout)
  Mat word_mask;          // dropout mask on the word rows
  std::vector<ComposeTrace> chars;
  Mat inputs;             // D x L encoder input
  LstmTrace fwd;
  std::optional<LstmTrace> bwd;
  Mat encoded;            // encoder output before dropout
  Mat encoded_mask;
  Mat encoded_dropped;
  Mat emissions;          // K x L
};

/// Throws ValidationError for an empty word list. Words beyond
/// max_length must already be removed.
SentenceTrace forward_trace(const Model& model, std::span<const std::string> words, Mode mode,
                            Rng& rng);

void backward(const Model& model, const SentenceTrace& trace, const Mat& d_emissions,
              ModelParams& grad);

/// K x L scores for the first min(L, max_length) tokens.
Mat forward(const Model& model, std::span<const std::string> words, Mode mode, Rng& rng);

struct LossResult {
  double loss = 0.0;
  ModelParams grad;
};

/// CRF head: mean per-sentence negative log-likelihood. Softmax head: mean
/// token cross-entropy over unmasked positions.
LossResult loss(const Model& model, const SequenceBatch& batch, Mode mode, Rng& rng);

/// One tag per input token; tokens beyond max_length are tagged O. The
/// result is raw model output and may be IOB-invalid for softmax heads.
std::vector<IobTag> predict(const Model& model, std::span<const std::string> words);

std::vector<std::string> words_of(const TaggedSentence& s);

}  // namespace aspex
