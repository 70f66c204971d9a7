#include "ske/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ske/common.hpp"

namespace ske {
namespace {

using json = nlohmann::json;

std::string lowercased(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail(const std::string& path, std::size_t line_no, const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line_no << ": " << what;
  throw DataError(os.str());
}

std::vector<std::string> string_array(const json& value, const std::string& path,
                                      std::size_t line_no, const char* field) {
  if (!value.is_array()) fail(path, line_no, std::string(field) + " must be an array");
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) fail(path, line_no, std::string(field) + " must contain strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

Corpus load_corpus(const std::string& path, std::size_t max_doc_len) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  Corpus corpus;
  corpus.name = path;
  std::unordered_set<std::string> seen_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) fail(path, line_no, "invalid JSON");
    if (!record.is_object()) fail(path, line_no, "record must be an object");
    for (const char* field : {"id", "tokens", "pos", "keyphrases"}) {
      if (!record.contains(field)) fail(path, line_no, std::string("missing field ") + field);
    }
    if (!record["id"].is_string()) fail(path, line_no, "id must be a string");

    TaggedDocument doc;
    doc.id = record["id"].get<std::string>();
    if (!seen_ids.insert(doc.id).second) fail(path, line_no, "duplicate id \"" + doc.id + "\"");

    doc.tokens = string_array(record["tokens"], path, line_no, "tokens");
    doc.pos = string_array(record["pos"], path, line_no, "pos");
    if (doc.tokens.empty()) fail(path, line_no, "tokens must be non-empty");
    if (doc.tokens.size() != doc.pos.size()) {
      std::ostringstream os;
      os << "tokens/pos length mismatch (" << doc.tokens.size() << " vs " << doc.pos.size() << ")";
      fail(path, line_no, os.str());
    }
    for (auto& token : doc.tokens) token = lowercased(std::move(token));
    if (doc.tokens.size() > max_doc_len) {
      doc.tokens.resize(max_doc_len);
      doc.pos.resize(max_doc_len);
    }

    if (!record["keyphrases"].is_array()) fail(path, line_no, "keyphrases must be an array");
    for (const auto& phrase : record["keyphrases"]) {
      auto words = string_array(phrase, path, line_no, "keyphrases");
      if (words.empty()) fail(path, line_no, "empty keyphrase");
      for (auto& w : words) w = lowercased(std::move(w));
      // gold is a set: exact duplicates collapse
      if (std::find(doc.gold.begin(), doc.gold.end(), words) == doc.gold.end()) {
        doc.gold.push_back(std::move(words));
      }
    }

    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents) {
    nlohmann::ordered_json record;
    record["id"] = doc.id;
    record["tokens"] = doc.tokens;
    record["pos"] = doc.pos;
    record["keyphrases"] = doc.gold;
    out += record.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  out << corpus_to_jsonl(corpus);
}

}  // namespace ske
