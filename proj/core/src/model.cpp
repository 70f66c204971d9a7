#include "ske/model.hpp"

#include <algorithm>

namespace ske {

std::string to_string(Head head) {
  return head == Head::classification ? "classification" : "ranking";
}

std::string to_string(TokenFeatureSource source) {
  return source == TokenFeatureSource::embedding_rnn ? "embedding_rnn" : "precomputed";
}

Head head_from_string(const std::string& s) {
  if (s == "classification") return Head::classification;
  if (s == "ranking") return Head::ranking;
  throw DataError("unknown head \"" + s + "\"");
}

TokenFeatureSource token_feature_source_from_string(const std::string& s) {
  if (s == "embedding_rnn") return TokenFeatureSource::embedding_rnn;
  if (s == "precomputed") return TokenFeatureSource::precomputed;
  throw DataError("unknown token feature source \"" + s + "\"");
}

void ModelConfig::validate() const {
  if (d == 0 || d % 2 != 0) {
    throw DataError("model dimension d must be positive and even, got " + std::to_string(d));
  }
  if (max_phrase_len == 0) throw DataError("max_phrase_len must be >= 1");
  if (token_feature_source == TokenFeatureSource::embedding_rnn && vocab_size == 0) {
    throw DataError("embedding token features require a non-empty vocabulary");
  }
}

Vocabulary::Vocabulary() : tokens_{"<unk>"} { index_["<unk>"] = 0; }

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw DataError("vocabulary must at least hold the unk marker");
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
}

Vocabulary Vocabulary::build(const Corpus& corpus) {
  Vocabulary vocab;
  for (const auto& doc : corpus.documents) {
    for (const auto& token : doc.tokens) {
      if (vocab.index_.emplace(token, vocab.tokens_.size()).second) {
        vocab.tokens_.push_back(token);
      }
    }
  }
  return vocab;
}

std::size_t Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

ModelParams ModelParams::init(const ModelConfig& config, Vocabulary vocab, std::uint64_t seed,
                              const InitOptions& options) {
  ModelConfig cfg = config;
  cfg.vocab_size = vocab.size();
  cfg.validate();

  ModelParams params;
  params.config = cfg;
  params.vocab = std::move(vocab);

  Rng rng(seed);
  const std::size_t d = cfg.d;
  if (params.has_embedding()) {
    params.embedding = Parameter("embedding", Tensor::matrix(cfg.vocab_size, d));
    for (double& v : params.embedding.value.data()) {
      v = rng.next_uniform(-options.scale, options.scale);
    }
  }
  params.token_fwd = LstmParams("token_fwd", d, d / 2);
  params.token_bwd = LstmParams("token_bwd", d, d / 2);
  params.phrase_fwd = LstmParams("phrase_fwd", 4 * d, 2 * d);
  params.phrase_bwd = LstmParams("phrase_bwd", 4 * d, 2 * d);
  params.token_fwd.init(rng, options.scale, options.forget_bias);
  params.token_bwd.init(rng, options.scale, options.forget_bias);
  params.phrase_fwd.init(rng, options.scale, options.forget_bias);
  params.phrase_bwd.init(rng, options.scale, options.forget_bias);

  const std::size_t out = cfg.head == Head::classification ? 2 : 1;
  params.head_w = Parameter("head.w", Tensor::matrix(out, 4 * d));
  params.head_b = Parameter("head.b", Tensor::vector(out));
  for (double& v : params.head_w.value.data()) v = rng.next_uniform(-options.scale, options.scale);
  return params;
}

std::vector<Parameter*> ModelParams::parameters() {
  std::vector<Parameter*> out;
  if (has_embedding()) out.push_back(&embedding);
  for (LstmParams* lstm : {&token_fwd, &token_bwd, &phrase_fwd, &phrase_bwd}) {
    auto ps = lstm->parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  out.push_back(&head_w);
  out.push_back(&head_b);
  return out;
}

std::vector<Parameter*> ModelParams::trainable(bool freeze_embeddings) {
  auto out = parameters();
  if (freeze_embeddings && has_embedding()) {
    std::erase(out, &embedding);
  }
  return out;
}

std::vector<Var> token_features(Tape& tape, ModelParams& params, const TaggedDocument& doc,
                                const Tensor* precomputed) {
  const std::size_t d = params.config.d;
  std::vector<Var> rows;
  rows.reserve(doc.length());
  if (params.config.token_feature_source == TokenFeatureSource::precomputed) {
    if (precomputed == nullptr) {
      throw DataError("document \"" + doc.id + "\" has no precomputed token features");
    }
    if (precomputed->rank() != 2 || precomputed->cols() != d) {
      throw DataError("precomputed features for \"" + doc.id + "\" must be L x " +
                      std::to_string(d));
    }
    if (precomputed->rows() != doc.length()) {
      throw DataError("precomputed features for \"" + doc.id + "\" have " +
                      std::to_string(precomputed->rows()) + " rows, document has " +
                      std::to_string(doc.length()) + " tokens");
    }
    for (std::size_t i = 0; i < doc.length(); ++i) {
      rows.push_back(tape.constant(
          Tensor({d}, std::vector<double>(precomputed->row(i).begin(),
                                          precomputed->row(i).end()))));
    }
    return rows;
  }
  for (const auto& token : doc.tokens) {
    rows.push_back(tape.param_row(params.embedding, params.vocab.id_of(token)));
  }
  return rows;
}

BiStates token_bilstm(Tape& tape, ModelParams& params, std::span<const Var> x) {
  return {run_lstm(tape, params.token_fwd, x, /*reversed=*/false),
          run_lstm(tape, params.token_bwd, x, /*reversed=*/true)};
}

std::vector<Var> span_features(Tape& tape, const BiStates& states, std::span<const Span> spans) {
  std::vector<Var> rows;
  rows.reserve(spans.size());
  const std::size_t length = states.fwd.size();
  for (const Span& span : spans) {
    if (span.begin > span.end || span.end >= length) {
      throw DataError("span_features: span out of range");
    }
    Var bf = states.fwd[span.begin];
    Var ef = states.fwd[span.end];
    Var bb = states.bwd[span.begin];
    Var eb = states.bwd[span.end];
    const Var blocks[] = {bf,
                          ef,
                          bb,
                          eb,
                          tape.mul(bf, ef),
                          tape.mul(bb, eb),
                          tape.sub(ef, bf),
                          tape.sub(bb, eb)};
    rows.push_back(tape.concat(blocks));
  }
  return rows;
}

std::vector<Var> phrase_bilstm(Tape& tape, ModelParams& params, std::span<const Var> span_rows) {
  if (span_rows.empty()) return {};
  auto fwd = run_lstm(tape, params.phrase_fwd, span_rows, /*reversed=*/false);
  auto bwd = run_lstm(tape, params.phrase_bwd, span_rows, /*reversed=*/true);
  std::vector<Var> rows;
  rows.reserve(span_rows.size());
  for (std::size_t i = 0; i < span_rows.size(); ++i) {
    const Var parts[] = {fwd[i], bwd[i]};
    rows.push_back(tape.concat(parts));
  }
  return rows;
}

ScoreNodes score(Tape& tape, ModelParams& params, std::span<const Var> phrase_rows) {
  ScoreNodes nodes;
  if (phrase_rows.empty()) return nodes;
  if (params.config.head == Head::classification) {
    std::vector<Var> prob_rows;
    prob_rows.reserve(phrase_rows.size());
    for (Var row : phrase_rows) {
      prob_rows.push_back(tape.softmax(tape.affine(params.head_w, params.head_b, row)));
    }
    nodes.probs = tape.stack_rows(prob_rows);
    nodes.h.reserve(phrase_rows.size());
    for (std::size_t i = 0; i < phrase_rows.size(); ++i) {
      nodes.h.push_back(nodes.probs->value.at(i, 1));
    }
  } else {
    std::vector<Var> score_rows;
    score_rows.reserve(phrase_rows.size());
    for (Var row : phrase_rows) {
      score_rows.push_back(tape.sigmoid(tape.affine(params.head_w, params.head_b, row)));
    }
    nodes.scores = tape.concat(score_rows);
    nodes.h.assign(nodes.scores->value.data().begin(), nodes.scores->value.data().end());
  }
  return nodes;
}

ScoreNodes forward_document(Tape& tape, ModelParams& params, const TaggedDocument& doc,
                            std::span<const Span> spans, const Tensor* precomputed) {
  if (spans.empty()) return {};
  auto x = token_features(tape, params, doc, precomputed);
  auto states = token_bilstm(tape, params, x);
  auto spans_rows = span_features(tape, states, spans);
  auto phrase_rows = phrase_bilstm(tape, params, spans_rows);
  return score(tape, params, phrase_rows);
}

}  // namespace ske
