#include <benchmark/benchmark.h>

#include "ske/model.hpp"

namespace {

struct Fixture {
  ske::TaggedDocument doc;
  std::vector<ske::Span> spans;
  ske::ModelParams params;

  explicit Fixture(std::size_t length, std::size_t d)
      : params(make_params(length, d)) {
    for (std::size_t i = 0; i < length; ++i) {
      doc.tokens.push_back("tok" + std::to_string(i % 17));
      doc.pos.push_back(i % 3 == 0 ? "JJ" : "NN");
    }
    doc.id = "bench";
    spans = ske::extract_candidates(doc);
  }

  static ske::ModelParams make_params(std::size_t length, std::size_t d) {
    ske::Corpus corpus;
    ske::TaggedDocument doc;
    doc.id = "vocab";
    for (std::size_t i = 0; i < length; ++i) {
      doc.tokens.push_back("tok" + std::to_string(i % 17));
      doc.pos.push_back("NN");
    }
    corpus.documents.push_back(doc);
    ske::ModelConfig config;
    config.d = d;
    return ske::ModelParams::init(config, ske::Vocabulary::build(corpus), 42);
  }
};

}  // namespace

static void ForwardDocument(benchmark::State& state) {
  Fixture fixture(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) {
    ske::Tape tape;
    auto nodes = ske::forward_document(tape, fixture.params, fixture.doc, fixture.spans);
    benchmark::DoNotOptimize(nodes.h);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(ForwardDocument)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void ForwardBackwardDocument(benchmark::State& state) {
  Fixture fixture(static_cast<std::size_t>(state.range(0)), 32);
  std::vector<bool> positive(fixture.spans.size(), false);
  if (!positive.empty()) positive[0] = true;
  for (auto _ : state) {
    ske::Tape tape;
    auto nodes = ske::forward_document(tape, fixture.params, fixture.doc, fixture.spans);
    ske::Var loss = tape.weighted_cross_entropy(nodes.probs, positive, 10.0);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss->value[0]);
  }
}
BENCHMARK(ForwardBackwardDocument)->Arg(32)->Arg(64);
