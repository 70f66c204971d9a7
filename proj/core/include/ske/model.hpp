#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ske/autodiff.hpp"
#include "ske/candidates.hpp"
#include "ske/common.hpp"
#include "ske/corpus.hpp"
#include "ske/lstm.hpp"

namespace ske {

enum class Head { classification, ranking };
enum class TokenFeatureSource { embedding_rnn, precomputed };

std::string to_string(Head head);
std::string to_string(TokenFeatureSource source);
Head head_from_string(const std::string& s);
TokenFeatureSource token_feature_source_from_string(const std::string& s);

struct ModelConfig {
  std::size_t d = 32;  // token feature width; must be even
  std::size_t vocab_size = 0;
  std::size_t max_phrase_len = kDefaultMaxPhraseLen;
  Head head = Head::classification;
  TokenFeatureSource token_feature_source = TokenFeatureSource::embedding_rnn;

  void validate() const;
};

struct InitOptions {
  double scale = 0.1;
  double forget_bias = 1.0;
};

// Token string <-> id. Id 0 is reserved for unknown words.
class Vocabulary {
 public:
  static constexpr std::size_t kUnkId = 0;

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);  // tokens[0] must be the unk marker

  static Vocabulary build(const Corpus& corpus);  // first-occurrence order

  std::size_t id_of(const std::string& token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Every trainable tensor of the network. The embedding table is absent
// when token features come precomputed from file.
struct ModelParams {
  ModelConfig config;
  Vocabulary vocab;
  Parameter embedding;  // [vocab, d]
  LstmParams token_fwd;   // input d, hidden d/2
  LstmParams token_bwd;
  LstmParams phrase_fwd;  // input 4d, hidden 2d
  LstmParams phrase_bwd;
  Parameter head_w;  // [2,4d] or [1,4d]
  Parameter head_b;

  static ModelParams init(const ModelConfig& config, Vocabulary vocab, std::uint64_t seed,
                          const InitOptions& options = {});

  std::vector<Parameter*> parameters();  // stable order
  std::vector<Parameter*> trainable(bool freeze_embeddings);
  bool has_embedding() const {
    return config.token_feature_source == TokenFeatureSource::embedding_rnn;
  }
};

// X^D rows: embedding lookup per token, or constants from a precomputed
// L x d matrix.
std::vector<Var> token_features(Tape& tape, ModelParams& params, const TaggedDocument& doc,
                                const Tensor* precomputed = nullptr);

struct BiStates {
  std::vector<Var> fwd;  // L x [d/2]
  std::vector<Var> bwd;
};

BiStates token_bilstm(Tape& tape, ModelParams& params, std::span<const Var> x);

// Per span, the eight d/2-wide blocks
//   [t_b->, t_e->, t_b<-, t_e<-, t_b->*t_e->, t_b<-*t_e<-,
//    t_e-> - t_b->, t_b<- - t_e<-]
// concatenated to a 4d-wide row.
std::vector<Var> span_features(Tape& tape, const BiStates& states, std::span<const Span> spans);

// Bidirectional recurrence over the candidate sequence in document order;
// hidden 2d per direction, rows concatenated to width 4d.
std::vector<Var> phrase_bilstm(Tape& tape, ModelParams& params, std::span<const Var> span_rows);

struct ScoreNodes {
  Var probs = nullptr;   // [M,2] softmax rows (classification head)
  Var scores = nullptr;  // [M] sigmoid scores (ranking head)
  std::vector<double> h;  // keyphrase likelihood per candidate, either head
};

ScoreNodes score(Tape& tape, ModelParams& params, std::span<const Var> phrase_rows);

// Whole forward pass for one document. Empty span list yields empty
// score nodes.
ScoreNodes forward_document(Tape& tape, ModelParams& params, const TaggedDocument& doc,
                            std::span<const Span> spans, const Tensor* precomputed = nullptr);

}  // namespace ske
