#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ske {

// Malformed input: files, schemas, id clashes, dimension mismatches.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf propagation, diverged losses, failed gradient checks.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic RNG used for parameter init and epoch shuffling.
// Wraps mt19937_64 but maps to doubles/indices itself so that streams do
// not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(next_double() * static_cast<double>(n)) % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[next_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ske
