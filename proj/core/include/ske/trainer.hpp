#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ske/corpus.hpp"
#include "ske/evaluator.hpp"
#include "ske/model.hpp"
#include "ske/model_io.hpp"
#include "ske/optimizer.hpp"

namespace ske {

enum class Objective { classification, ranking };
enum class SelectionMetric { f1_at_5, f1_at_10 };

std::string to_string(Objective objective);
std::string to_string(SelectionMetric metric);
Objective objective_from_string(const std::string& s);
SelectionMetric selection_metric_from_string(const std::string& s);

struct TrainConfig {
  Objective objective = Objective::classification;
  double pos_weight = 10.0;  // classification
  double margin = 0.5;       // ranking, in [0,1]
  double lr = 1e-3;
  double warmup_proportion = 0.1;
  double weight_decay = 0.01;
  std::size_t batch_size = 16;
  std::size_t epochs = 50;
  std::uint64_t seed = 42;
  SelectionMetric selection_metric = SelectionMetric::f1_at_5;

  // model knobs
  std::size_t d = 32;
  std::size_t max_phrase_len = kDefaultMaxPhraseLen;
  std::size_t max_doc_len = kDefaultMaxDocLen;
  bool freeze_embeddings = false;
  std::string embeddings_path;
  std::string features_path;  // switches token features to `precomputed`
  double init_scale = 0.1;
  double forget_bias = 1.0;

  void validate() const;
  ModelConfig model_config() const;

  // Flat key=value file, '#' comments. Unknown keys are errors.
  static TrainConfig from_file(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_f1_at_5 = 0.0;
  double val_f1_at_10 = 0.0;
  double seconds = 0.0;
};

// One JSON object, fixed key order: {"epoch", "train_loss", "val_f1_at_5",
// "val_f1_at_10", "seconds"}.
std::string epoch_log_json(const EpochLog& entry);

struct TrainResult {
  ModelParams params;  // best epoch by the validation selection metric
  TrainConfig config;
  std::size_t best_epoch = 0;  // 1-based
  double best_metric = 0.0;
  std::vector<EpochLog> log;
  std::size_t dropped_documents = 0;  // removed by filter_trainable

  CheckpointMeta meta() const;
};

struct FilterResult {
  Corpus kept;
  std::size_t dropped = 0;
};

// Keeps documents with at least one positive candidate.
FilterResult filter_trainable(const Corpus& corpus,
                              std::size_t max_phrase_len = kDefaultMaxPhraseLen);

// Document-level minibatch training: per epoch, seeded shuffle into
// batches of batch_size documents; the batch loss is the mean of the
// per-document objective; AdamW with warmup/linear decay; returns the
// checkpoint of the best epoch under the validation selection metric
// (earlier epoch wins ties).
TrainResult train(const Corpus& train_corpus, const Corpus& val_corpus, const TrainConfig& config,
                  const FeatureTable* features = nullptr);

struct GridSearchRun {
  double margin = 0.0;
  double val_metric = 0.0;
  std::size_t best_epoch = 0;
};

struct GridSearchResult {
  TrainConfig best_config;
  std::vector<GridSearchRun> runs;
};

// Trains once per margin and returns the config of the best validation
// metric; ties break toward the smaller margin.
GridSearchResult grid_search_margin(const Corpus& train_corpus, const Corpus& val_corpus,
                                    const TrainConfig& config, const std::vector<double>& margins,
                                    const FeatureTable* features = nullptr);

}  // namespace ske
