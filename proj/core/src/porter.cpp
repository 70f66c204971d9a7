#include "ske/porter.hpp"

#include <algorithm>
#include <string_view>

#include "ske/common.hpp"

namespace ske {
namespace {

bool is_vowel_at(std::string_view w, std::size_t i) {
  char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
  // 'y' counts as a vowel when it follows a consonant.
  if (c == 'y') return i > 0 && !is_vowel_at(w, i - 1);
  return false;
}

// Number of vowel-consonant sequences in w[0..len) — Porter's m.
std::size_t measure(std::string_view w, std::size_t len) {
  std::size_t m = 0;
  std::size_t i = 0;
  while (true) {
    while (i < len && !is_vowel_at(w, i)) ++i;
    if (i >= len) return m;
    while (i < len && is_vowel_at(w, i)) ++i;
    if (i >= len) return m;
    ++m;
  }
}

bool has_vowel(std::string_view w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (is_vowel_at(w, i)) return true;
  }
  return false;
}

bool double_consonant_end(std::string_view w) {
  std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && !is_vowel_at(w, n - 1);
}

// *o condition at position len-1: consonant-vowel-consonant where the
// final consonant is not w, x or y.
bool cvc_end(std::string_view w, std::size_t len) {
  if (len < 3) return false;
  std::size_t i = len - 1;
  if (is_vowel_at(w, i) || !is_vowel_at(w, i - 1) || is_vowel_at(w, i - 2)) return false;
  char c = w[i];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// First suffix match wins and stops the scan whether or not the measure
// condition lets the replacement fire (so an overlapping later rule never
// gets a second chance).
void apply_first(std::string& w, std::span<const Rule> rules, std::size_t min_measure) {
  for (const Rule& rule : rules) {
    if (!ends_with(w, rule.suffix)) continue;
    std::size_t stem_len = w.size() - rule.suffix.size();
    if (measure(w, stem_len) > min_measure) {
      w.resize(stem_len);
      w.append(rule.replacement);
    }
    return;
  }
}

void step1a(std::string& w) {
  if (w.back() != 's') return;
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 3);
    w.push_back('i');
  } else if (w[w.size() - 2] != 's') {
    w.pop_back();
  }
}

void step1b(std::string& w) {
  if (ends_with(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.pop_back();
    return;
  }
  std::size_t stem_len = 0;
  if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
    stem_len = w.size() - 2;
  } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
    stem_len = w.size() - 3;
  } else {
    return;
  }
  w.resize(stem_len);
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w.push_back('e');
  } else if (double_consonant_end(w)) {
    char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.pop_back();
  } else if (measure(w, w.size()) == 1 && cvc_end(w, w.size())) {
    w.push_back('e');
  }
}

void step1c(std::string& w) {
  if (w.back() == 'y' && has_vowel(w, w.size() - 1)) w.back() = 'i';
}

constexpr Rule kStep2[] = {
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
    {"izer", "ize"},    {"bli", "ble"},     {"alli", "al"},     {"entli", "ent"},
    {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    {"logi", "log"},
};

constexpr Rule kStep3[] = {
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ful", ""},   {"ness", ""},
};

constexpr std::string_view kStep4[] = {
    "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
    "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
};

void step4(std::string& w) {
  for (std::string_view suffix : kStep4) {
    if (!ends_with(w, suffix)) continue;
    std::size_t stem_len = w.size() - suffix.size();
    // "ion" only drops after s or t.
    if (suffix == "ion" && (stem_len == 0 || (w[stem_len - 1] != 's' && w[stem_len - 1] != 't'))) {
      continue;
    }
    if (measure(w, stem_len) > 1) w.resize(stem_len);
    return;
  }
}

void step5(std::string& w) {
  if (w.back() == 'e') {
    std::size_t m = measure(w, w.size());
    if (m > 1 || (m == 1 && !cvc_end(w, w.size() - 1))) w.pop_back();
  }
  if (w.back() == 'l' && double_consonant_end(w) && measure(w, w.size()) > 1) w.pop_back();
}

bool plain_lowercase_word(const std::string& w) {
  return std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

std::string porter_stem(const std::string& word) {
  if (word.size() <= 2 || !plain_lowercase_word(word)) return word;
  std::string w = word;
  step1a(w);
  step1b(w);
  step1c(w);
  apply_first(w, kStep2, 0);
  apply_first(w, kStep3, 0);
  step4(w);
  step5(w);
  return w;
}

std::string stem_phrase(std::span<const std::string> phrase) {
  if (phrase.empty()) throw DataError("stem_phrase: empty phrase");
  std::string key;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    if (i) key.push_back(' ');
    key.append(porter_stem(phrase[i]));
  }
  return key;
}

}  // namespace ske
