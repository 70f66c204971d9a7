#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ske {

// One article: title + abstract already joined into a single token
// sequence, with aligned Penn Treebank POS tags and gold keyphrases.
struct TaggedDocument {
  std::string id;
  std::vector<std::string> tokens;  // lowercased at load
  std::vector<std::string> pos;     // same length as tokens
  std::vector<std::vector<std::string>> gold;  // distinct token sequences

  std::size_t length() const { return tokens.size(); }
};

struct Corpus {
  std::string name;
  std::vector<TaggedDocument> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
};

inline constexpr std::size_t kDefaultMaxDocLen = 512;

// Reads a JSON-lines corpus file, one document per line:
//   {"id": ..., "tokens": [...], "pos": [...], "keyphrases": [[...], ...]}
// Tokens are lowercased unconditionally; documents longer than max_doc_len
// are truncated; duplicate gold phrases collapse. Throws DataError naming
// the offending line on any schema violation.
Corpus load_corpus(const std::string& path, std::size_t max_doc_len = kDefaultMaxDocLen);

// Writes the same JSON-lines schema with a fixed key order, so that
// load -> save round-trips byte-identically modulo the original file's
// key ordering and whitespace.
void save_corpus(const Corpus& corpus, const std::string& path);
std::string corpus_to_jsonl(const Corpus& corpus);

}  // namespace ske
