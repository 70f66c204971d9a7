#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ske/corpus.hpp"
#include "support/test_util.hpp"

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& contents) {
    path = std::filesystem::temp_directory_path() /
           ("ske_corpus_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++) + ".jsonl");
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::filesystem::remove(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

}  // namespace

TEST_CASE("load_corpus reads a one-line file") {
  TempFile file(
      R"({"id": "d1", "tokens": ["Ranking", "algorithms", "work"], "pos": ["VBG", "NNS", "VBP"], "keyphrases": [["ranking", "algorithms"]]})"
      "\n");
  auto corpus = ske::load_corpus(file.path.string());
  REQUIRE(corpus.size() == 1);
  const auto& doc = corpus.documents[0];
  CHECK(doc.id == "d1");
  CHECK(doc.length() == 3);
  CHECK(doc.tokens == std::vector<std::string>{"ranking", "algorithms", "work"});  // lowercased
  CHECK(doc.pos == std::vector<std::string>{"VBG", "NNS", "VBP"});
  REQUIRE(doc.gold.size() == 1);
  CHECK(doc.gold[0] == std::vector<std::string>{"ranking", "algorithms"});
}

TEST_CASE("load_corpus errors name the offending line") {
  TempFile file(
      R"({"id": "ok", "tokens": ["a"], "pos": ["DT"], "keyphrases": []})"
      "\n"
      R"({"id": "bad", "tokens": ["a", "b", "c"], "pos": ["DT", "NN"], "keyphrases": []})"
      "\n");
  CHECK_THROWS_WITH_AS(ske::load_corpus(file.path.string()),
                       doctest::Contains(":2:"), ske::DataError);
}

TEST_CASE("load_corpus rejects duplicate ids, bad json and empty phrases") {
  TempFile duplicate(
      R"({"id": "x", "tokens": ["a"], "pos": ["DT"], "keyphrases": []})"
      "\n"
      R"({"id": "x", "tokens": ["b"], "pos": ["NN"], "keyphrases": []})"
      "\n");
  CHECK_THROWS_AS(ske::load_corpus(duplicate.path.string()), ske::DataError);

  TempFile garbage("not json at all\n");
  CHECK_THROWS_AS(ske::load_corpus(garbage.path.string()), ske::DataError);

  TempFile empty_phrase(R"({"id": "x", "tokens": ["a"], "pos": ["DT"], "keyphrases": [[]]})"
                        "\n");
  CHECK_THROWS_AS(ske::load_corpus(empty_phrase.path.string()), ske::DataError);

  TempFile empty_tokens(R"({"id": "x", "tokens": [], "pos": [], "keyphrases": []})"
                        "\n");
  CHECK_THROWS_AS(ske::load_corpus(empty_tokens.path.string()), ske::DataError);

  CHECK_THROWS_AS(ske::load_corpus("/nonexistent/path.jsonl"), ske::DataError);
}

TEST_CASE("empty file loads an empty corpus") {
  TempFile file("");
  auto corpus = ske::load_corpus(file.path.string());
  CHECK(corpus.size() == 0);
  CHECK(corpus.empty());
}

TEST_CASE("documents truncate at max_doc_len") {
  std::string tokens = "\"t0\"";
  std::string pos = "\"NN\"";
  for (int i = 1; i < 20; ++i) {
    tokens += ", \"t" + std::to_string(i) + "\"";
    pos += ", \"NN\"";
  }
  TempFile file("{\"id\": \"long\", \"tokens\": [" + tokens + "], \"pos\": [" + pos +
                "], \"keyphrases\": []}\n");
  auto corpus = ske::load_corpus(file.path.string(), /*max_doc_len=*/8);
  REQUIRE(corpus.size() == 1);
  CHECK(corpus.documents[0].length() == 8);
  CHECK(corpus.documents[0].pos.size() == 8);
}

TEST_CASE("exact duplicate gold phrases collapse") {
  TempFile file(
      R"({"id": "d", "tokens": ["a"], "pos": ["DT"], "keyphrases": [["X"], ["x"], ["y"]]})"
      "\n");
  auto corpus = ske::load_corpus(file.path.string());
  CHECK(corpus.documents[0].gold.size() == 2);  // "X" lowercases into "x"
}

TEST_CASE("save/load round-trips byte-identically modulo key order") {
  TempFile file(
      "{\"keyphrases\": [[\"b\"]], \"pos\": [\"NN\", \"NN\"], \"tokens\": [\"A\", \"b\"], "
      "\"id\": \"r1\"}\n"
      R"({"id": "r2", "tokens": ["c"], "pos": ["NN"], "keyphrases": []})"
      "\n");
  auto first = ske::load_corpus(file.path.string());
  const std::string once = ske::corpus_to_jsonl(first);

  TempFile resaved(once);
  auto second = ske::load_corpus(resaved.path.string());
  CHECK(ske::corpus_to_jsonl(second) == once);
}

TEST_CASE("bundled corpora load cleanly") {
  for (const char* name : {"mini.jsonl", "train_toy.jsonl", "val_toy.jsonl"}) {
    CAPTURE(name);
    auto corpus = ske::load_corpus(ske_test::data_file(name));
    CHECK(!corpus.empty());
    for (const auto& doc : corpus.documents) {
      CHECK(doc.tokens.size() == doc.pos.size());
      CHECK(!doc.tokens.empty());
      for (const auto& phrase : doc.gold) CHECK(!phrase.empty());
    }
  }
}
