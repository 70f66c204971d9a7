#include "ske/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ske/gradcheck.hpp"

namespace ske {
namespace {

struct PreparedDoc {
  const TaggedDocument* doc = nullptr;
  std::vector<Span> spans;
  std::vector<bool> positive;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  const Tensor* features = nullptr;
};

PreparedDoc prepare(const TaggedDocument& doc, std::size_t max_phrase_len) {
  PreparedDoc prepared;
  prepared.doc = &doc;
  prepared.spans = extract_candidates(doc, max_phrase_len);
  auto labeled = label_candidates(prepared.spans, doc);
  prepared.positive.reserve(labeled.size());
  for (const auto& cand : labeled) {
    const bool positive = cand.label == Label::positive;
    prepared.positive.push_back(positive);
    if (positive) {
      ++prepared.positives;
    } else {
      ++prepared.negatives;
    }
  }
  return prepared;
}

double document_loss(Tape& tape, ModelParams& params, const PreparedDoc& doc,
                     const TrainConfig& config, double backward_seed) {
  auto nodes = forward_document(tape, params, *doc.doc, doc.spans, doc.features);
  Var loss = nullptr;
  if (config.objective == Objective::classification) {
    loss = tape.weighted_cross_entropy(nodes.probs, doc.positive, config.pos_weight);
  } else {
    loss = tape.hinge_loss(nodes.scores, doc.positive, config.margin);
  }
  if (backward_seed != 0.0) tape.backward(loss, backward_seed);
  return loss->value[0];
}

double validation_metric(const EvalReport& report, SelectionMetric metric) {
  return metric == SelectionMetric::f1_at_5 ? report.at(5).f1 : report.at(10).f1;
}

}  // namespace

std::string to_string(Objective objective) {
  return objective == Objective::classification ? "classification" : "ranking";
}

std::string to_string(SelectionMetric metric) {
  return metric == SelectionMetric::f1_at_5 ? "f1_at_5" : "f1_at_10";
}

Objective objective_from_string(const std::string& s) {
  if (s == "classification") return Objective::classification;
  if (s == "ranking") return Objective::ranking;
  throw DataError("unknown objective \"" + s + "\"");
}

SelectionMetric selection_metric_from_string(const std::string& s) {
  if (s == "f1_at_5") return SelectionMetric::f1_at_5;
  if (s == "f1_at_10") return SelectionMetric::f1_at_10;
  throw DataError("unknown selection metric \"" + s + "\"");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw DataError("batch_size must be >= 1");
  if (epochs < 1) throw DataError("epochs must be >= 1");
  if (margin < 0.0 || margin > 1.0) throw DataError("margin must lie in [0, 1]");
  if (pos_weight <= 0.0) throw DataError("pos_weight must be positive");
  if (warmup_proportion < 0.0 || warmup_proportion > 1.0) {
    throw DataError("warmup_proportion must lie in [0, 1]");
  }
  if (lr < 0.0) throw DataError("lr must be >= 0");
  model_config().validate();
}

ModelConfig TrainConfig::model_config() const {
  ModelConfig config;
  config.d = d;
  config.vocab_size = 1;  // replaced once the vocabulary is built
  config.max_phrase_len = max_phrase_len;
  config.head = objective == Objective::classification ? Head::classification : Head::ranking;
  config.token_feature_source = features_path.empty() ? TokenFeatureSource::embedding_rnn
                                                      : TokenFeatureSource::precomputed;
  return config;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  TrainConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    try {
      config.apply_override(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const DataError& err) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + err.what());
    }
  }
  return config;
}

void TrainConfig::apply_override(const std::string& key, const std::string& value) {
  auto as_double = [&](const char* name) {
    try {
      std::size_t used = 0;
      double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw DataError(std::string("bad numeric value for ") + name + ": \"" + value + "\"");
    }
  };
  auto as_size = [&](const char* name) {
    double v = as_double(name);
    if (v < 0 || v != std::floor(v)) {
      throw DataError(std::string("expected a non-negative integer for ") + name);
    }
    return static_cast<std::size_t>(v);
  };
  auto as_bool = [&](const char* name) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw DataError(std::string("expected true/false for ") + name);
  };

  if (key == "objective") {
    objective = objective_from_string(value);
  } else if (key == "pos_weight") {
    pos_weight = as_double("pos_weight");
  } else if (key == "margin") {
    margin = as_double("margin");
  } else if (key == "lr") {
    lr = as_double("lr");
  } else if (key == "warmup_proportion") {
    warmup_proportion = as_double("warmup_proportion");
  } else if (key == "weight_decay") {
    weight_decay = as_double("weight_decay");
  } else if (key == "batch_size") {
    batch_size = as_size("batch_size");
  } else if (key == "epochs") {
    epochs = as_size("epochs");
  } else if (key == "seed") {
    seed = as_size("seed");
  } else if (key == "selection_metric") {
    selection_metric = selection_metric_from_string(value);
  } else if (key == "d") {
    d = as_size("d");
  } else if (key == "max_phrase_len") {
    max_phrase_len = as_size("max_phrase_len");
  } else if (key == "max_doc_len") {
    max_doc_len = as_size("max_doc_len");
  } else if (key == "freeze_embeddings") {
    freeze_embeddings = as_bool("freeze_embeddings");
  } else if (key == "embeddings_path") {
    embeddings_path = value;
  } else if (key == "features_path") {
    features_path = value;
  } else if (key == "init_scale") {
    init_scale = as_double("init_scale");
  } else if (key == "forget_bias") {
    forget_bias = as_double("forget_bias");
  } else {
    throw DataError("unknown config key \"" + key + "\"");
  }
}

std::string epoch_log_json(const EpochLog& entry) {
  nlohmann::ordered_json record;
  record["epoch"] = entry.epoch;
  record["train_loss"] = entry.train_loss;
  record["val_f1_at_5"] = entry.val_f1_at_5;
  record["val_f1_at_10"] = entry.val_f1_at_10;
  record["seconds"] = entry.seconds;
  return record.dump();
}

CheckpointMeta TrainResult::meta() const {
  CheckpointMeta meta;
  meta["objective"] = to_string(config.objective);
  meta["selection_metric"] = to_string(config.selection_metric);
  meta["best_epoch"] = std::to_string(best_epoch);
  meta["val_metric"] = std::to_string(best_metric);
  meta["epochs"] = std::to_string(config.epochs);
  meta["batch_size"] = std::to_string(config.batch_size);
  meta["lr"] = std::to_string(config.lr);
  meta["warmup_proportion"] = std::to_string(config.warmup_proportion);
  meta["weight_decay"] = std::to_string(config.weight_decay);
  meta["pos_weight"] = std::to_string(config.pos_weight);
  meta["margin"] = std::to_string(config.margin);
  meta["seed"] = std::to_string(config.seed);
  return meta;
}

FilterResult filter_trainable(const Corpus& corpus, std::size_t max_phrase_len) {
  FilterResult result;
  result.kept.name = corpus.name;
  for (const auto& doc : corpus.documents) {
    if (prepare(doc, max_phrase_len).positives > 0) {
      result.kept.documents.push_back(doc);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

TrainResult train(const Corpus& train_corpus, const Corpus& val_corpus, const TrainConfig& config,
                  const FeatureTable* features) {
  config.validate();

  std::unordered_set<std::string> train_ids;
  for (const auto& doc : train_corpus.documents) train_ids.insert(doc.id);
  for (const auto& doc : val_corpus.documents) {
    if (train_ids.contains(doc.id)) {
      throw DataError("train/validation corpora share document id \"" + doc.id + "\"");
    }
  }

  FilterResult filtered = filter_trainable(train_corpus, config.max_phrase_len);

  std::vector<PreparedDoc> docs;
  for (const auto& doc : filtered.kept.documents) {
    PreparedDoc prepared = prepare(doc, config.max_phrase_len);
    // the hinge objective needs at least one positive/negative pair
    if (config.objective == Objective::ranking && prepared.negatives == 0) continue;
    docs.push_back(std::move(prepared));
  }
  if (docs.empty()) throw DataError("no trainable documents after filtering");

  const bool precomputed = !config.features_path.empty();
  if (precomputed) {
    if (features == nullptr) throw DataError("features_path set but no feature table provided");
    for (auto& doc : docs) {
      auto it = features->find(doc.doc->id);
      if (it == features->end()) {
        throw DataError("no precomputed features for document \"" + doc.doc->id + "\"");
      }
      doc.features = &it->second;
    }
  }

  Vocabulary vocab = precomputed ? Vocabulary() : Vocabulary::build(filtered.kept);
  InitOptions init{config.init_scale, config.forget_bias};
  ModelParams params = ModelParams::init(config.model_config(), std::move(vocab), config.seed, init);
  if (!config.embeddings_path.empty()) apply_word_vectors(config.embeddings_path, params);

  auto trainable = params.trainable(config.freeze_embeddings);
  const std::size_t batches_per_epoch = (docs.size() + config.batch_size - 1) / config.batch_size;
  AdamWConfig adam_config{config.lr,           0.9, 0.999, 1e-8, config.weight_decay,
                          config.warmup_proportion};
  AdamW optimizer(trainable, adam_config, config.epochs * batches_per_epoch);

  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  result.config = config;
  result.dropped_documents = filtered.dropped;

  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  ModelParams best = params;
  double best_metric = -1.0;
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += config.batch_size) {
      const std::size_t batch_end = std::min(order.size(), batch_start + config.batch_size);
      const double batch_docs = static_cast<double>(batch_end - batch_start);
      for (Parameter* p : trainable) p->zero_grad();
      for (std::size_t i = batch_start; i < batch_end; ++i) {
        Tape tape;
        const double loss =
            document_loss(tape, params, docs[order[i]], config, 1.0 / batch_docs);
        if (!std::isfinite(loss)) {
          throw NumericError("nonfinite loss on document \"" + docs[order[i]].doc->id +
                             "\" in epoch " + std::to_string(epoch));
        }
        loss_sum += loss;
      }
      optimizer.step();
    }

    PredictionTable predictions = predict_corpus(params, val_corpus, /*dedupe=*/true, features);
    EvalReport report = evaluate(val_corpus, predictions);
    const double metric = validation_metric(report, config.selection_metric);

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(docs.size());
    entry.val_f1_at_5 = report.at(5).f1;
    entry.val_f1_at_10 = report.at(10).f1;
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(entry);

    if (metric > best_metric) {
      best_metric = metric;
      best_epoch = epoch;
      best = params;
    }
  }

  result.params = std::move(best);
  result.best_epoch = best_epoch;
  result.best_metric = best_metric;
  return result;
}

GridSearchResult grid_search_margin(const Corpus& train_corpus, const Corpus& val_corpus,
                                    const TrainConfig& config, const std::vector<double>& margins,
                                    const FeatureTable* features) {
  if (margins.empty()) throw DataError("grid_search_margin: empty margin list");
  if (config.objective != Objective::ranking) {
    throw DataError("margin grid search applies to the ranking objective");
  }
  GridSearchResult result;
  result.best_config = config;
  double best_metric = -1.0;
  bool have_best = false;
  for (double margin : margins) {
    TrainConfig run_config = config;
    run_config.margin = margin;
    TrainResult run = train(train_corpus, val_corpus, run_config, features);
    result.runs.push_back({margin, run.best_metric, run.best_epoch});
    const bool better =
        !have_best || run.best_metric > best_metric ||
        (run.best_metric == best_metric && margin < result.best_config.margin);
    if (better) {
      best_metric = run.best_metric;
      result.best_config = run_config;
      have_best = true;
    }
  }
  return result;
}

}  // namespace ske
