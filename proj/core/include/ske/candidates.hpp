#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ske/corpus.hpp"

namespace ske {

// Begin/end token indices of a candidate phrase, 0-based and inclusive.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin + 1; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

enum class Label { positive, negative };

struct LabeledCandidate {
  Span span;
  Label label = Label::negative;
};

inline constexpr std::size_t kDefaultMaxPhraseLen = 6;

// True iff the whole tag sequence matches
//   (JJ|JJR|JJS|VBG|VBN)* (NN|NNS|NNP|NNPS|VBG)+
// i.e. optional adjective/participle modifiers followed by at least one
// noun-group tag.
bool match_pattern(std::span<const std::string> tags);

// All spans up to max_phrase_len whose tag slice fully matches the
// pattern, nested and overlapping spans included, sorted by
// (begin asc, end asc).
std::vector<Span> extract_candidates(const TaggedDocument& doc,
                                     std::size_t max_phrase_len = kDefaultMaxPhraseLen);

// Positive iff the span's stemmed surface equals some stemmed gold
// keyphrase. Throws DataError on a span outside the document.
std::vector<LabeledCandidate> label_candidates(const std::vector<Span>& spans,
                                               const TaggedDocument& doc);

// Stemmed surface of the tokens under a span.
std::string span_stem_key(const TaggedDocument& doc, Span span);

struct CorpusStats {
  std::size_t documents = 0;
  double mean_positives = 0.0;    // #c+ per document
  double mean_keyphrases = 0.0;   // gold keyphrases per document
  double coverage = 0.0;          // gold phrases matched by a candidate stem / all gold
  double mean_negatives = 0.0;    // #c- per document
  std::optional<double> neg_pos_ratio;  // total c- / total c+; absent when no positives

  std::size_t total_positives = 0;
  std::size_t total_negatives = 0;
  std::size_t total_gold = 0;
  std::size_t total_gold_covered = 0;
};

CorpusStats corpus_stats(const Corpus& corpus, std::size_t max_phrase_len = kDefaultMaxPhraseLen);

}  // namespace ske
