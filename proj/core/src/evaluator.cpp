#include "ske/evaluator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "ske/porter.hpp"

namespace ske {
namespace {

std::string phrase_stem(const ScoredPhrase& phrase) {
  return stem_phrase(std::span<const std::string>(phrase.surface));
}

// All positions where the stemmed gold phrase occurs in the document.
std::vector<Span> gold_occurrences(const TaggedDocument& doc,
                                   const std::vector<std::string>& phrase,
                                   const std::string& stem_key) {
  std::vector<Span> spans;
  const std::size_t len = phrase.size();
  if (len == 0 || len > doc.length()) return spans;
  for (std::size_t b = 0; b + len <= doc.length(); ++b) {
    Span span{b, b + len - 1};
    if (span_stem_key(doc, span) == stem_key) spans.push_back(span);
  }
  return spans;
}

bool spans_overlap(Span a, Span b) { return a.begin <= b.end && b.begin <= a.end; }

}  // namespace

const MetricsAtK& EvalReport::at(std::size_t k) const {
  for (const auto& m : at_k) {
    if (m.k == k) return m;
  }
  throw DataError("no metrics at k=" + std::to_string(k));
}

std::vector<ScoredPhrase> predict_topk(std::vector<ScoredPhrase> scored, std::size_t k,
                                       bool dedupe) {
  std::sort(scored.begin(), scored.end(), [](const ScoredPhrase& a, const ScoredPhrase& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.span < b.span;
  });
  if (dedupe) {
    std::unordered_set<std::string> seen;
    std::vector<ScoredPhrase> unique;
    unique.reserve(scored.size());
    for (auto& phrase : scored) {
      if (seen.insert(phrase_stem(phrase)).second) unique.push_back(std::move(phrase));
    }
    scored = std::move(unique);
  }
  if (k > 0 && scored.size() > k) scored.resize(k);
  return scored;
}

std::vector<ScoredPhrase> rank_document(ModelParams& params, const TaggedDocument& doc,
                                        bool dedupe, const Tensor* precomputed) {
  auto spans = extract_candidates(doc, params.config.max_phrase_len);
  if (spans.empty()) return {};
  Tape tape;
  auto nodes = forward_document(tape, params, doc, spans, precomputed);
  std::vector<ScoredPhrase> scored;
  scored.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    ScoredPhrase phrase;
    phrase.span = spans[i];
    phrase.surface.assign(doc.tokens.begin() + static_cast<std::ptrdiff_t>(spans[i].begin),
                          doc.tokens.begin() + static_cast<std::ptrdiff_t>(spans[i].end + 1));
    phrase.score = nodes.h[i];
    scored.push_back(std::move(phrase));
  }
  return predict_topk(std::move(scored), 0, dedupe);
}

PredictionTable predict_corpus(ModelParams& params, const Corpus& corpus, bool dedupe,
                               const FeatureTable* features) {
  PredictionTable table;
  for (const auto& doc : corpus.documents) {
    const Tensor* precomputed = nullptr;
    if (params.config.token_feature_source == TokenFeatureSource::precomputed) {
      if (features == nullptr) throw DataError("precomputed model needs a feature table");
      auto it = features->find(doc.id);
      if (it == features->end()) {
        throw DataError("no precomputed features for document \"" + doc.id + "\"");
      }
      precomputed = &it->second;
    }
    table[doc.id] = rank_document(params, doc, dedupe, precomputed);
  }
  return table;
}

EvalReport evaluate(const Corpus& corpus, const PredictionTable& predictions,
                    const std::vector<std::size_t>& ks, std::size_t overlap_k) {
  EvalReport report;
  report.documents = corpus.size();

  std::vector<std::size_t> sorted_ks = ks;
  std::sort(sorted_ks.begin(), sorted_ks.end());
  for (std::size_t k : sorted_ks) {
    MetricsAtK m;
    m.k = k;
    report.at_k.push_back(m);
  }

  static const std::vector<ScoredPhrase> kNoPredictions;
  for (const auto& doc : corpus.documents) {
    auto it = predictions.find(doc.id);
    const auto& ranked = it == predictions.end() ? kNoPredictions : it->second;

    // gold stems as a multiset; each gold phrase credited at most once
    std::unordered_map<std::string, std::size_t> gold_stems;
    for (const auto& phrase : doc.gold) ++gold_stems[stem_phrase(phrase)];
    report.total_gold += doc.gold.size();

    for (auto& metrics : report.at_k) {
      auto remaining = gold_stems;
      const std::size_t take = std::min(metrics.k, ranked.size());
      metrics.predicted += take;
      metrics.gold += doc.gold.size();
      for (std::size_t i = 0; i < take; ++i) {
        auto hit = remaining.find(phrase_stem(ranked[i]));
        if (hit != remaining.end() && hit->second > 0) {
          ++metrics.correct;
          --hit->second;
        }
      }
    }

    // overlapped-gold bookkeeping at overlap_k
    std::vector<std::vector<Span>> occurrences;
    occurrences.reserve(doc.gold.size());
    std::vector<std::string> stems;
    for (const auto& phrase : doc.gold) {
      stems.push_back(stem_phrase(phrase));
      occurrences.push_back(gold_occurrences(doc, phrase, stems.back()));
    }
    std::unordered_set<std::string> predicted_stems;
    for (std::size_t i = 0; i < std::min(overlap_k, ranked.size()); ++i) {
      predicted_stems.insert(phrase_stem(ranked[i]));
    }
    for (std::size_t g = 0; g < doc.gold.size(); ++g) {
      bool overlapped = false;
      for (std::size_t other = 0; other < doc.gold.size() && !overlapped; ++other) {
        if (other == g) continue;
        for (const Span& a : occurrences[g]) {
          if (overlapped) break;
          for (const Span& b : occurrences[other]) {
            if (spans_overlap(a, b)) {
              overlapped = true;
              break;
            }
          }
        }
      }
      if (overlapped) {
        ++report.overlapped_gold;
        if (predicted_stems.contains(stems[g])) ++report.overlapped_recovered;
      }
    }
  }

  for (auto& metrics : report.at_k) {
    if (metrics.predicted > 0) {
      metrics.precision =
          static_cast<double>(metrics.correct) / static_cast<double>(metrics.predicted);
    }
    if (metrics.gold > 0) {
      metrics.recall = static_cast<double>(metrics.correct) / static_cast<double>(metrics.gold);
    }
    if (metrics.precision + metrics.recall > 0.0) {
      metrics.f1 = 2.0 * metrics.precision * metrics.recall / (metrics.precision + metrics.recall);
    }
  }
  if (report.overlapped_gold > 0) {
    report.overlapped_recall = static_cast<double>(report.overlapped_recovered) /
                               static_cast<double>(report.overlapped_gold);
  }
  return report;
}

std::string predictions_to_jsonl(const Corpus& corpus, const PredictionTable& predictions) {
  std::string out;
  for (const auto& doc : corpus.documents) {
    nlohmann::ordered_json record;
    record["id"] = doc.id;
    auto& list = record["keyphrases"] = nlohmann::ordered_json::array();
    auto it = predictions.find(doc.id);
    if (it != predictions.end()) {
      for (const auto& phrase : it->second) {
        nlohmann::ordered_json entry;
        std::string surface;
        for (std::size_t i = 0; i < phrase.surface.size(); ++i) {
          if (i) surface.push_back(' ');
          surface += phrase.surface[i];
        }
        entry["surface"] = surface;
        entry["score"] = phrase.score;
        entry["begin"] = phrase.span.begin;
        entry["end"] = phrase.span.end;
        list.push_back(std::move(entry));
      }
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

PredictionTable predictions_from_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions file: " + path);
  PredictionTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("id") ||
        !record.contains("keyphrases")) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad prediction record");
    }
    std::vector<ScoredPhrase> ranked;
    for (const auto& entry : record["keyphrases"]) {
      ScoredPhrase phrase;
      std::istringstream words(entry.at("surface").get<std::string>());
      std::string word;
      while (words >> word) phrase.surface.push_back(word);
      if (phrase.surface.empty()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": empty prediction surface");
      }
      phrase.score = entry.at("score").get<double>();
      phrase.span.begin = entry.at("begin").get<std::size_t>();
      phrase.span.end = entry.at("end").get<std::size_t>();
      ranked.push_back(std::move(phrase));
    }
    const std::string id = record["id"].get<std::string>();
    if (!table.emplace(id, std::move(ranked)).second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate document id \"" + id +
                      "\"");
    }
  }
  return table;
}

}  // namespace ske
