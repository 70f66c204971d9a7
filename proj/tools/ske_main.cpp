#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ske/candidates.hpp"
#include "ske/corpus.hpp"
#include "ske/evaluator.hpp"
#include "ske/gradcheck.hpp"
#include "ske/model_io.hpp"
#include "ske/trainer.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
  std::string config_path;
  std::string corpus_path;
  std::string val_corpus_path;
  std::string checkpoint_path;
  std::string out_path;
  std::vector<std::string> overrides;
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_max_phrase_len = false;
  std::size_t max_phrase_len = 0;
};

ske::TrainConfig resolve_config(const CommonArgs& args) {
  ske::TrainConfig config;
  if (!args.config_path.empty()) config = ske::TrainConfig::from_file(args.config_path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ske::DataError("override \"" + kv + "\" is not key=value");
    }
    config.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.has_seed) config.seed = args.seed;
  if (args.has_max_phrase_len) config.max_phrase_len = args.max_phrase_len;
  return config;
}

void write_or_print(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ske::DataError("cannot write " + out_path);
  out << text;
}

json stats_json(const ske::CorpusStats& stats) {
  json report;
  report["documents"] = stats.documents;
  report["mean_positives"] = stats.mean_positives;
  report["mean_keyphrases"] = stats.mean_keyphrases;
  report["coverage"] = stats.coverage;
  report["mean_negatives"] = stats.mean_negatives;
  if (stats.neg_pos_ratio) {
    report["neg_pos_ratio"] = *stats.neg_pos_ratio;
  } else {
    report["neg_pos_ratio"] = nullptr;
  }
  json totals;
  totals["positives"] = stats.total_positives;
  totals["negatives"] = stats.total_negatives;
  totals["gold"] = stats.total_gold;
  totals["gold_covered"] = stats.total_gold_covered;
  report["totals"] = totals;
  return report;
}

void print_stats_table(const ske::CorpusStats& stats) {
  auto line = [](const std::string& label, const std::string& value) {
    std::cout << "  " << std::left << std::setw(28) << label << value << "\n";
  };
  std::ostringstream num;
  num << std::setprecision(6);
  auto fmt = [&num](double v) {
    num.str("");
    num << v;
    return num.str();
  };
  std::cout << "corpus statistics\n";
  line("documents", std::to_string(stats.documents));
  line("positives per doc", fmt(stats.mean_positives));
  line("keyphrases per doc", fmt(stats.mean_keyphrases));
  line("keyphrase coverage", fmt(stats.coverage));
  line("negatives per doc", fmt(stats.mean_negatives));
  line("neg/pos ratio", stats.neg_pos_ratio ? fmt(*stats.neg_pos_ratio) : "undefined");
}

json eval_json(const std::string& method, const ske::EvalReport& report) {
  json out;
  out["method"] = method;
  auto& per_k = out["at_k"] = json::array();
  for (const auto& metrics : report.at_k) {
    json entry;
    entry["k"] = metrics.k;
    entry["precision"] = metrics.precision;
    entry["recall"] = metrics.recall;
    entry["f1"] = metrics.f1;
    entry["predicted"] = metrics.predicted;
    entry["correct"] = metrics.correct;
    entry["gold"] = metrics.gold;
    per_k.push_back(std::move(entry));
  }
  out["documents"] = report.documents;
  out["total_gold"] = report.total_gold;
  if (report.overlapped_recall) {
    out["overlapped_recall"] = *report.overlapped_recall;
    out["overlapped_gold"] = report.overlapped_gold;
    out["overlapped_recovered"] = report.overlapped_recovered;
  } else {
    out["overlapped_recall"] = nullptr;
  }
  return out;
}

void print_eval_table(const std::string& method, const ske::EvalReport& report) {
  std::cout << std::left << std::setw(16) << "method";
  for (const auto& metrics : report.at_k) {
    std::cout << std::setw(12) << ("F1@" + std::to_string(metrics.k));
  }
  std::cout << "\n" << std::setw(16) << method;
  for (const auto& metrics : report.at_k) {
    std::cout << std::setw(12) << std::fixed << std::setprecision(4) << metrics.f1;
  }
  std::cout.unsetf(std::ios::fixed);
  std::cout << "\n";
  if (report.overlapped_recall) {
    std::cout << "overlapped keyphrase recall: " << std::setprecision(4)
              << *report.overlapped_recall << " (" << report.overlapped_recovered << "/"
              << report.overlapped_gold << ")\n";
  }
}

ske::FeatureTable load_feature_table(const std::string& path, ske::FeatureTable& storage) {
  storage = ske::load_features(path);
  return storage;
}

int run_stats(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto corpus = ske::load_corpus(args.corpus_path, config.max_doc_len);
  if (corpus.empty()) throw ske::DataError("stats needs a non-empty corpus");
  const auto stats = ske::corpus_stats(corpus, config.max_phrase_len);
  print_stats_table(stats);
  const std::string dumped = stats_json(stats).dump(2) + "\n";
  if (args.out_path.empty()) {
    std::cout << dumped;
  } else {
    write_or_print(args.out_path, dumped);
  }
  return kExitOk;
}

int run_train(const CommonArgs& args, const std::string& log_path) {
  const auto config = resolve_config(args);
  const auto train_corpus = ske::load_corpus(args.corpus_path, config.max_doc_len);
  const auto val_corpus = ske::load_corpus(args.val_corpus_path, config.max_doc_len);

  ske::FeatureTable features;
  const ske::FeatureTable* features_ptr = nullptr;
  if (!config.features_path.empty()) {
    load_feature_table(config.features_path, features);
    features_ptr = &features;
  }

  auto result = ske::train(train_corpus, val_corpus, config, features_ptr);
  std::string log_text;
  for (const auto& entry : result.log) log_text += ske::epoch_log_json(entry) + "\n";
  if (!log_path.empty()) write_or_print(log_path, log_text);
  std::cout << log_text;
  std::cout << "dropped " << result.dropped_documents
            << " documents without a matchable keyphrase\n";
  std::cout << "best epoch " << result.best_epoch << " ("
            << ske::to_string(result.config.selection_metric) << " = " << result.best_metric
            << ")\n";

  const std::string checkpoint_path =
      args.checkpoint_path.empty() ? "model.ckpt" : args.checkpoint_path;
  ske::save_checkpoint(checkpoint_path, result.params, result.meta());
  std::cout << "checkpoint written to " << checkpoint_path << "\n";
  return kExitOk;
}

int run_gridsearch(const CommonArgs& args, const std::string& margins_text) {
  auto config = resolve_config(args);
  config.objective = ske::Objective::ranking;
  const auto train_corpus = ske::load_corpus(args.corpus_path, config.max_doc_len);
  const auto val_corpus = ske::load_corpus(args.val_corpus_path, config.max_doc_len);

  std::vector<double> margins;
  std::istringstream parts(margins_text);
  std::string part;
  while (std::getline(parts, part, ',')) {
    if (part.empty()) continue;
    try {
      margins.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ske::DataError("bad margin \"" + part + "\"");
    }
  }
  if (margins.empty()) throw ske::DataError("gridsearch needs at least one margin");
  for (double m : margins) {
    if (m < 0.0 || m > 1.0) throw ske::DataError("margins must lie in [0, 1]");
  }

  ske::FeatureTable features;
  const ske::FeatureTable* features_ptr = nullptr;
  if (!config.features_path.empty()) {
    load_feature_table(config.features_path, features);
    features_ptr = &features;
  }

  auto result = ske::grid_search_margin(train_corpus, val_corpus, config, margins, features_ptr);
  json report;
  auto& runs = report["runs"] = json::array();
  for (const auto& run : result.runs) {
    json entry;
    entry["margin"] = run.margin;
    entry["val_metric"] = run.val_metric;
    entry["best_epoch"] = run.best_epoch;
    runs.push_back(std::move(entry));
    std::cout << "margin " << run.margin << ": " << ske::to_string(config.selection_metric)
              << " = " << run.val_metric << "\n";
  }
  report["best_margin"] = result.best_config.margin;
  std::cout << "best margin: " << result.best_config.margin << "\n";
  if (!args.out_path.empty()) write_or_print(args.out_path, report.dump(2) + "\n");
  return kExitOk;
}

int run_extract(const CommonArgs& args, std::size_t k, bool dedupe,
                const std::string& features_path) {
  const auto config = resolve_config(args);
  const auto corpus = ske::load_corpus(args.corpus_path, config.max_doc_len);
  auto checkpoint = ske::load_checkpoint(args.checkpoint_path);

  ske::FeatureTable features;
  const ske::FeatureTable* features_ptr = nullptr;
  if (!features_path.empty()) {
    load_feature_table(features_path, features);
    features_ptr = &features;
  }

  auto predictions = ske::predict_corpus(checkpoint.params, corpus, dedupe, features_ptr);
  for (auto& [id, ranked] : predictions) {
    if (k > 0 && ranked.size() > k) ranked.resize(k);
  }
  write_or_print(args.out_path, ske::predictions_to_jsonl(corpus, predictions));
  return kExitOk;
}

int run_evaluate(const CommonArgs& args, const std::string& predictions_path, bool dedupe,
                 std::size_t extra_k, const std::string& features_path) {
  const auto config = resolve_config(args);
  const auto corpus = ske::load_corpus(args.corpus_path, config.max_doc_len);

  std::vector<std::size_t> ks = {5, 10};
  if (extra_k > 0 && extra_k != 5 && extra_k != 10) ks.push_back(extra_k);

  ske::PredictionTable predictions;
  std::string method;
  if (!predictions_path.empty()) {
    predictions = ske::predictions_from_jsonl(predictions_path);
    method = "predictions";
  } else if (!args.checkpoint_path.empty()) {
    auto checkpoint = ske::load_checkpoint(args.checkpoint_path);
    ske::FeatureTable features;
    const ske::FeatureTable* features_ptr = nullptr;
    if (!features_path.empty()) {
      load_feature_table(features_path, features);
      features_ptr = &features;
    }
    predictions = ske::predict_corpus(checkpoint.params, corpus, dedupe, features_ptr);
    auto it = checkpoint.meta.find("objective");
    method = it == checkpoint.meta.end() ? "span-model" : "span-" + it->second;
  } else {
    throw ske::DataError("evaluate needs --checkpoint or --predictions");
  }

  const auto report = ske::evaluate(corpus, predictions, ks);
  print_eval_table(method, report);
  const std::string dumped = eval_json(method, report).dump(2) + "\n";
  if (args.out_path.empty()) {
    std::cout << dumped;
  } else {
    write_or_print(args.out_path, dumped);
  }
  return kExitOk;
}

int run_gradcheck(const CommonArgs& args, double tolerance, std::size_t max_coords) {
  const auto config = resolve_config(args);
  const auto corpus = ske::load_corpus(args.corpus_path, config.max_doc_len);

  const ske::TaggedDocument* doc = nullptr;
  std::vector<ske::Span> spans;
  for (const auto& candidate : corpus.documents) {
    spans = ske::extract_candidates(candidate, config.max_phrase_len);
    if (!spans.empty()) {
      doc = &candidate;
      break;
    }
  }
  if (doc == nullptr) throw ske::DataError("no document with candidates in " + args.corpus_path);

  auto labeled = ske::label_candidates(spans, *doc);
  std::vector<bool> positive;
  for (const auto& cand : labeled) positive.push_back(cand.label == ske::Label::positive);

  ske::Corpus vocab_corpus;
  vocab_corpus.documents.push_back(*doc);
  ske::ModelParams params =
      ske::ModelParams::init(config.model_config(), ske::Vocabulary::build(vocab_corpus),
                             config.seed, {config.init_scale, config.forget_bias});

  auto loss = [&](bool with_grads) {
    ske::Tape tape;
    auto nodes = ske::forward_document(tape, params, *doc, spans);
    ske::Var loss_node =
        config.objective == ske::Objective::classification
            ? tape.weighted_cross_entropy(nodes.probs, positive, config.pos_weight)
            : tape.hinge_loss(nodes.scores, positive, config.margin);
    if (with_grads) tape.backward(loss_node);
    return loss_node->value[0];
  };

  ske::GradCheckOptions options;
  options.max_coords_per_param = max_coords;
  auto report = ske::grad_check(loss, params.parameters(), options);

  json out;
  out["document"] = doc->id;
  out["objective"] = ske::to_string(config.objective);
  out["candidates"] = spans.size();
  out["coords_checked"] = report.coords_checked;
  out["max_rel_error"] = report.max_rel_error;
  out["worst_param"] = report.worst_param;
  out["worst_analytic"] = report.worst_analytic;
  out["worst_numeric"] = report.worst_numeric;
  out["tolerance"] = tolerance;
  std::cout << "gradient check on \"" << doc->id << "\" (" << spans.size() << " candidates, "
            << ske::to_string(config.objective) << "): max relative error " << std::scientific
            << std::setprecision(3) << report.max_rel_error << " over " << report.coords_checked
            << " coordinates\n";
  std::cout.unsetf(std::ios::scientific);
  if (!args.out_path.empty()) write_or_print(args.out_path, out.dump(2) + "\n");
  if (report.max_rel_error > tolerance) {
    std::cerr << "gradient check FAILED (tolerance " << tolerance << ")\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"span-based keyphrase extraction pipeline"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonArgs args;
  std::string log_path;
  std::string margins_text = "0,0.25,0.5,0.75,1";
  std::string predictions_path;
  std::string features_path;
  std::size_t k = 10;
  std::size_t evaluate_k = 0;
  bool no_dedupe = false;
  double tolerance = 1e-4;
  std::size_t gradcheck_coords = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_corpus) {
    cmd->add_option("--config", args.config_path, "key=value config file");
    auto* corpus = cmd->add_option("--corpus", args.corpus_path, "JSONL corpus file");
    if (needs_corpus) corpus->required();
    cmd->add_option("--out", args.out_path, "output file");
    cmd->add_option("--seed", args.seed, "RNG seed override")
        ->each([&](const std::string&) { args.has_seed = true; });
    cmd->add_option("--max-phrase-len", args.max_phrase_len, "candidate length cap override")
        ->each([&](const std::string&) { args.has_max_phrase_len = true; });
    cmd->add_option("overrides", args.overrides, "config overrides as key=value");
  };

  auto* stats_cmd = app.add_subcommand("stats", "candidate/keyphrase statistics of a corpus");
  add_common(stats_cmd, true);

  auto* train_cmd = app.add_subcommand("train", "train a model and write the best checkpoint");
  add_common(train_cmd, true);
  train_cmd->add_option("--val-corpus", args.val_corpus_path, "validation corpus")->required();
  train_cmd->add_option("--checkpoint", args.checkpoint_path, "checkpoint output path");
  train_cmd->add_option("--log", log_path, "epoch log output path (JSONL)");

  auto* grid_cmd = app.add_subcommand("gridsearch", "grid-search the ranking margin");
  add_common(grid_cmd, true);
  grid_cmd->add_option("--val-corpus", args.val_corpus_path, "validation corpus")->required();
  grid_cmd->add_option("--margins", margins_text, "comma-separated margins in [0,1]");

  auto* extract_cmd = app.add_subcommand("extract", "write top-k predictions as JSONL");
  add_common(extract_cmd, true);
  extract_cmd->add_option("--checkpoint", args.checkpoint_path, "model checkpoint")->required();
  extract_cmd->add_option("--k", k, "predictions per document");
  extract_cmd->add_flag("--no-dedupe", no_dedupe, "keep same-stem duplicates in the ranking");
  extract_cmd->add_option("--features", features_path, "precomputed token-feature file");

  auto* eval_cmd = app.add_subcommand("evaluate", "micro-averaged P/R/F1 at k");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--checkpoint", args.checkpoint_path, "model checkpoint");
  eval_cmd->add_option("--predictions", predictions_path, "predictions JSONL from extract");
  eval_cmd->add_option("--k", evaluate_k, "extra report cutoff besides 5 and 10");
  eval_cmd->add_flag("--no-dedupe", no_dedupe, "keep same-stem duplicates in the ranking");
  eval_cmd->add_option("--features", features_path, "precomputed token-feature file");

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
  add_common(grad_cmd, true);
  grad_cmd->add_option("--tolerance", tolerance, "max relative error accepted");
  grad_cmd->add_option("--coords", gradcheck_coords, "coordinates sampled per tensor (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (stats_cmd->parsed()) return run_stats(args);
    if (train_cmd->parsed()) return run_train(args, log_path);
    if (grid_cmd->parsed()) return run_gridsearch(args, margins_text);
    if (extract_cmd->parsed()) return run_extract(args, k, !no_dedupe, features_path);
    if (eval_cmd->parsed()) {
      return run_evaluate(args, predictions_path, !no_dedupe, evaluate_k, features_path);
    }
    if (grad_cmd->parsed()) return run_gradcheck(args, tolerance, gradcheck_coords);
  } catch (const ske::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ske::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
