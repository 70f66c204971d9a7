#pragma once

#include <span>
#include <string>
#include <vector>

namespace ske {

// Classic Porter (1980) stem of a lowercase word. Words of length <= 2 and
// tokens containing any non [a-z] character pass through unchanged.
std::string porter_stem(const std::string& word);

// Per-token stems joined with single spaces; the key used for all
// stemmed-equality matching. Throws DataError on an empty phrase.
std::string stem_phrase(std::span<const std::string> phrase);

}  // namespace ske
