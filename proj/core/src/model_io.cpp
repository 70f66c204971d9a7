#include "ske/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ske {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");
static_assert(sizeof(double) == 8);

constexpr char kCheckpointMagic[8] = {'S', 'K', 'E', 'M', 'O', 'D', 'L', '1'};
constexpr char kFeatureMagic[8] = {'S', 'K', 'E', 'F', 'E', 'A', 'T', '1'};
constexpr std::uint32_t kFormatVersion = 1;

using json = nlohmann::ordered_json;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  write_string(out, name);
  write_u64(out, t.rank());
  for (std::size_t d : t.shape()) write_u64(out, d);
  out.write(reinterpret_cast<const char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError(path + ": truncated file");
  }
  return v;
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError(path + ": truncated file");
  }
  return v;
}

std::string read_string(std::istream& in, const std::string& path) {
  std::uint64_t len = read_u64(in, path);
  std::string s(len, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(len))) {
    throw DataError(path + ": truncated file");
  }
  return s;
}

Tensor read_tensor_body(std::istream& in, const std::string& path) {
  std::uint64_t rank = read_u64(in, path);
  if (rank > 4) throw DataError(path + ": implausible tensor rank");
  std::vector<std::size_t> shape(rank);
  std::size_t total = 1;
  for (auto& d : shape) {
    d = read_u64(in, path);
    total *= d;
  }
  std::vector<double> data(total);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(total * sizeof(double)))) {
    throw DataError(path + ": truncated tensor data");
  }
  return Tensor(std::move(shape), std::move(data));
}

void check_magic(std::istream& in, const char (&magic)[8], const std::string& path,
                 const char* kind) {
  char buf[8];
  if (!in.read(buf, 8) || std::memcmp(buf, magic, 8) != 0) {
    throw DataError(path + ": not a " + kind + " file (bad magic)");
  }
}

}  // namespace

void save_checkpoint(const std::string& path, ModelParams& params, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);

  json header;
  header["d"] = params.config.d;
  header["vocab_size"] = params.config.vocab_size;
  header["max_phrase_len"] = params.config.max_phrase_len;
  header["head"] = to_string(params.config.head);
  header["token_feature_source"] = to_string(params.config.token_feature_source);
  header["vocab"] = params.vocab.tokens();
  header["meta"] = meta;
  const std::string header_bytes = header.dump();

  out.write(kCheckpointMagic, 8);
  write_u32(out, kFormatVersion);
  write_string(out, header_bytes);

  auto tensors = params.parameters();
  write_u64(out, tensors.size());
  for (Parameter* p : tensors) write_tensor(out, p->name, p->value);
  if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  check_magic(in, kCheckpointMagic, path, "checkpoint");
  const std::uint32_t version = read_u32(in, path);
  if (version != kFormatVersion) {
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  }

  json header = json::parse(read_string(in, path), nullptr, false);
  if (header.is_discarded()) throw DataError(path + ": corrupt checkpoint header");

  ModelConfig config;
  config.d = header.at("d").get<std::size_t>();
  config.vocab_size = header.at("vocab_size").get<std::size_t>();
  config.max_phrase_len = header.at("max_phrase_len").get<std::size_t>();
  config.head = head_from_string(header.at("head").get<std::string>());
  config.token_feature_source =
      token_feature_source_from_string(header.at("token_feature_source").get<std::string>());

  Vocabulary vocab(header.at("vocab").get<std::vector<std::string>>());
  Checkpoint checkpoint{ModelParams::init(config, std::move(vocab), /*seed=*/0), {}};
  if (header.contains("meta")) {
    checkpoint.meta = header.at("meta").get<CheckpointMeta>();
  }

  std::unordered_map<std::string, Parameter*> by_name;
  for (Parameter* p : checkpoint.params.parameters()) by_name[p->name] = p;

  const std::uint64_t count = read_u64(in, path);
  if (count != by_name.size()) {
    throw DataError(path + ": checkpoint holds " + std::to_string(count) + " tensors, model needs " +
                    std::to_string(by_name.size()));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = read_string(in, path);
    Tensor t = read_tensor_body(in, path);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError(path + ": unexpected tensor \"" + name + "\"");
    if (!it->second->value.same_shape(t)) {
      throw DataError(path + ": tensor \"" + name + "\" has shape " + t.shape_string() +
                      ", expected " + it->second->value.shape_string());
    }
    it->second->value = std::move(t);
  }
  return checkpoint;
}

std::size_t apply_word_vectors(const std::string& path, ModelParams& params) {
  if (!params.has_embedding()) {
    throw DataError("word vectors need the embedding token-feature source");
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word vectors: " + path);

  const std::size_t d = params.config.d;
  std::size_t hits = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    const std::size_t id = params.vocab.id_of(word);
    if (id == Vocabulary::kUnkId && word != params.vocab.tokens()[Vocabulary::kUnkId]) {
      continue;  // not in vocabulary
    }
    auto row = params.embedding.value.row(id);
    for (std::size_t i = 0; i < d; ++i) {
      if (!(fields >> row[i])) {
        throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) +
                        " values for \"" + word + "\"");
      }
    }
    double extra;
    if (fields >> extra) {
      throw DataError(path + ":" + std::to_string(line_no) + ": more than " + std::to_string(d) +
                      " values for \"" + word + "\"");
    }
    ++hits;
  }
  return hits;
}

void save_features(const std::string& path,
                   const std::vector<std::pair<std::string, Tensor>>& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature file: " + path);
  out.write(kFeatureMagic, 8);
  write_u32(out, kFormatVersion);
  write_u64(out, features.size());
  for (const auto& [id, tensor] : features) {
    if (tensor.rank() != 2) throw DataError("features for \"" + id + "\" must be rank 2");
    write_tensor(out, id, tensor);
  }
}

FeatureTable load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file: " + path);
  check_magic(in, kFeatureMagic, path, "feature");
  const std::uint32_t version = read_u32(in, path);
  if (version != kFormatVersion) {
    throw DataError(path + ": unsupported feature file version " + std::to_string(version));
  }
  FeatureTable table;
  const std::uint64_t count = read_u64(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = read_string(in, path);
    Tensor t = read_tensor_body(in, path);
    if (t.rank() != 2) throw DataError(path + ": features for \"" + id + "\" must be rank 2");
    if (!table.emplace(std::move(id), std::move(t)).second) {
      throw DataError(path + ": duplicate document id in feature file");
    }
  }
  return table;
}

}  // namespace ske
