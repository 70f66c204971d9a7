#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ske/candidates.hpp"
#include "ske/corpus.hpp"
#include "ske/model.hpp"
#include "ske/model_io.hpp"

namespace ske {

// A candidate span with its keyphrase likelihood h(x).
struct ScoredPhrase {
  Span span;
  std::vector<std::string> surface;
  double score = 0.0;
};

struct MetricsAtK {
  std::size_t k = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  std::size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::vector<MetricsAtK> at_k;  // one entry per requested k, ascending
  std::size_t documents = 0;
  std::size_t total_gold = 0;
  // Recall over gold keyphrases whose occurrences overlap another gold
  // keyphrase; absent when the corpus has none.
  std::optional<double> overlapped_recall;
  std::size_t overlapped_gold = 0;
  std::size_t overlapped_recovered = 0;

  const MetricsAtK& at(std::size_t k) const;
};

// Sorts by score descending with ties broken by (begin asc, end asc);
// with dedupe on, keeps the highest-scoring span per stemmed surface;
// returns the first k (all of them when k == 0).
std::vector<ScoredPhrase> predict_topk(std::vector<ScoredPhrase> scored, std::size_t k,
                                       bool dedupe = true);

// Scores every candidate of one document with a frozen model and returns
// the full deduped (or raw) ranking.
std::vector<ScoredPhrase> rank_document(ModelParams& params, const TaggedDocument& doc,
                                        bool dedupe = true, const Tensor* precomputed = nullptr);

// Per-document predictions, already ranked best-first (as produced by
// rank_document or read back from an extract output file).
using PredictionTable = std::map<std::string, std::vector<ScoredPhrase>>;

PredictionTable predict_corpus(ModelParams& params, const Corpus& corpus, bool dedupe = true,
                               const FeatureTable* features = nullptr);

// Micro-averaged P/R/F1 at each k. A prediction is correct iff its
// stemmed surface matches a still-uncredited stemmed gold keyphrase of
// its document; every gold phrase is credited at most once. Documents
// missing from `predictions` count as zero predictions.
EvalReport evaluate(const Corpus& corpus, const PredictionTable& predictions,
                    const std::vector<std::size_t>& ks = {5, 10},
                    std::size_t overlap_k = 10);

// JSON-lines prediction files written by `extract`, one document per line:
//   {"id": ..., "keyphrases": [{"surface", "score", "begin", "end"}, ...]}
// in corpus order, keyphrases ranked best-first. Reading preserves the
// file's ranking.
std::string predictions_to_jsonl(const Corpus& corpus, const PredictionTable& predictions);
PredictionTable predictions_from_jsonl(const std::string& path);

}  // namespace ske
