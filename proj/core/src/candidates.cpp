#include "ske/candidates.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ske/common.hpp"
#include "ske/porter.hpp"

namespace ske {
namespace {

bool modifier_tag(const std::string& tag) {
  return tag == "JJ" || tag == "JJR" || tag == "JJS" || tag == "VBG" || tag == "VBN";
}

bool noun_tag(const std::string& tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS" || tag == "VBG";
}

}  // namespace

bool match_pattern(std::span<const std::string> tags) {
  if (tags.empty()) return false;
  // The sequence matches iff some split point leaves a (possibly empty)
  // modifier-only prefix and a non-empty noun-only suffix. VBG sits in
  // both groups, so the maximal runs may overlap.
  std::size_t mod_prefix = 0;  // first index not in the modifier run
  while (mod_prefix < tags.size() && modifier_tag(tags[mod_prefix])) ++mod_prefix;
  std::size_t noun_suffix = tags.size();  // first index of the maximal noun run
  while (noun_suffix > 0 && noun_tag(tags[noun_suffix - 1])) --noun_suffix;
  return noun_suffix < tags.size() && noun_suffix <= mod_prefix;
}

std::vector<Span> extract_candidates(const TaggedDocument& doc, std::size_t max_phrase_len) {
  if (max_phrase_len < 1) throw DataError("extract_candidates: max_phrase_len must be >= 1");
  std::vector<Span> spans;
  const std::size_t n = doc.pos.size();
  for (std::size_t b = 0; b < n; ++b) {
    std::size_t limit = std::min(n, b + max_phrase_len);
    for (std::size_t e = b; e < limit; ++e) {
      std::span<const std::string> slice(doc.pos.data() + b, e - b + 1);
      if (match_pattern(slice)) spans.push_back({b, e});
    }
  }
  return spans;  // (begin asc, end asc) by construction
}

std::string span_stem_key(const TaggedDocument& doc, Span span) {
  if (span.begin > span.end || span.end >= doc.tokens.size()) {
    std::ostringstream os;
    os << "span (" << span.begin << "," << span.end << ") out of bounds for document \"" << doc.id
       << "\" of length " << doc.tokens.size();
    throw DataError(os.str());
  }
  return stem_phrase(std::span<const std::string>(doc.tokens.data() + span.begin, span.length()));
}

std::vector<LabeledCandidate> label_candidates(const std::vector<Span>& spans,
                                               const TaggedDocument& doc) {
  std::unordered_set<std::string> gold_stems;
  for (const auto& phrase : doc.gold) gold_stems.insert(stem_phrase(phrase));

  std::vector<LabeledCandidate> labeled;
  labeled.reserve(spans.size());
  for (Span span : spans) {
    bool positive = gold_stems.contains(span_stem_key(doc, span));
    labeled.push_back({span, positive ? Label::positive : Label::negative});
  }
  return labeled;
}

CorpusStats corpus_stats(const Corpus& corpus, std::size_t max_phrase_len) {
  CorpusStats stats;
  stats.documents = corpus.size();
  for (const auto& doc : corpus.documents) {
    auto labeled = label_candidates(extract_candidates(doc, max_phrase_len), doc);
    std::unordered_set<std::string> candidate_stems;
    for (const auto& cand : labeled) {
      candidate_stems.insert(span_stem_key(doc, cand.span));
      if (cand.label == Label::positive) {
        ++stats.total_positives;
      } else {
        ++stats.total_negatives;
      }
    }
    stats.total_gold += doc.gold.size();
    for (const auto& phrase : doc.gold) {
      if (candidate_stems.contains(stem_phrase(phrase))) ++stats.total_gold_covered;
    }
  }
  const double n = static_cast<double>(stats.documents);
  if (stats.documents > 0) {
    stats.mean_positives = static_cast<double>(stats.total_positives) / n;
    stats.mean_keyphrases = static_cast<double>(stats.total_gold) / n;
    stats.mean_negatives = static_cast<double>(stats.total_negatives) / n;
  }
  if (stats.total_gold > 0) {
    stats.coverage =
        static_cast<double>(stats.total_gold_covered) / static_cast<double>(stats.total_gold);
  }
  if (stats.total_positives > 0) {
    stats.neg_pos_ratio =
        static_cast<double>(stats.total_negatives) / static_cast<double>(stats.total_positives);
  }
  return stats;
}

}  // namespace ske
