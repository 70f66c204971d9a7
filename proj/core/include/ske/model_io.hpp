#pragma once

#include <map>
#include <string>
#include <unordered_map>

#include "ske/model.hpp"

namespace ske {

// Free-form metadata carried in the checkpoint header next to the model
// config (training hyperparameters, best epoch, validation metric, ...).
using CheckpointMeta = std::map<std::string, std::string>;

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

// Binary model checkpoint (see docs/checkpoint-format.md for the byte
// layout): magic + version + JSON header (config, vocab, metadata), then
// named tensors as (name, shape, row-major float64 little-endian values).
void save_checkpoint(const std::string& path, ModelParams& params,
                     const CheckpointMeta& meta = {});
Checkpoint load_checkpoint(const std::string& path);

// Text word vectors, one "word v1 v2 ... vd" per line. Rows for in-vocab
// words overwrite the random embedding init; returns how many rows hit.
std::size_t apply_word_vectors(const std::string& path, ModelParams& params);

// Precomputed token-feature file: per document id an L x d row-major
// float64 matrix with a shape header.
using FeatureTable = std::unordered_map<std::string, Tensor>;
void save_features(const std::string& path, const std::vector<std::pair<std::string, Tensor>>& features);
FeatureTable load_features(const std::string& path);

}  // namespace ske
