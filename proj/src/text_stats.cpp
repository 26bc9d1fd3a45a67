#include "evolmath/text_stats.hpp"

#include <cctype>
#include <cmath>
#include <map>

namespace evolmath::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': return true;
    default: return false;
  }
}

}  // namespace

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

int count_sentences(std::string_view text) {
  int count = 0;
  bool in_run = false;
  bool pending = false;  // non-space content since the last terminator
  for (char c : text) {
    const bool term = c == '.' || c == '!' || c == '?';
    if (term) {
      if (!in_run) ++count;
      in_run = true;
      pending = false;
    } else {
      in_run = false;
      if (!is_space(c)) pending = true;
    }
  }
  return count + (pending ? 1 : 0);
}

int count_syllables(std::string_view word) {
  int groups = 0;
  bool prev_vowel = false;
  for (char raw : word) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      prev_vowel = false;
      continue;
    }
    const bool v = is_vowel(c);
    if (v && !prev_vowel) ++groups;
    prev_vowel = v;
  }
  return groups < 1 ? 1 : groups;
}

double flesch_reading_ease(std::string_view text) {
  const auto tokens = whitespace_tokens(text);
  if (tokens.empty()) return 0.0;
  const double words = static_cast<double>(tokens.size());
  const double sentences = static_cast<double>(count_sentences(text));
  double syllables = 0.0;
  for (const auto& t : tokens) syllables += count_syllables(t);
  return 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words);
}

const std::set<std::string, std::less<>>& connective_lexicon() {
  static const std::set<std::string, std::less<>> lexicon = {
      "after", "although", "as",     "because", "before", "if",      "once",
      "since", "so",       "that",   "though",  "unless", "until",   "when",
      "whenever", "where", "whereas", "wherever", "whether", "which", "while",
      "who",   "whom",     "whose"};
  return lexicon;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& raw : whitespace_tokens(text)) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && !is_alnum(raw[b])) ++b;
    while (e > b && !is_alnum(raw[e - 1])) --e;
    if (b == e) continue;
    std::string t = raw.substr(b, e - b);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(std::move(t));
  }
  return out;
}

double syntactic_complexity(std::string_view text) {
  const int sentences = count_sentences(text);
  if (sentences == 0) return 0.0;
  const auto& lexicon = connective_lexicon();
  int hits = 0;
  for (const auto& t : normalized_tokens(text)) {
    if (lexicon.contains(t)) ++hits;
  }
  return static_cast<double>(hits) / sentences;
}

double lexical_entropy(std::string_view text) {
  const auto tokens = normalized_tokens(text);
  if (tokens.empty()) return 0.0;
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  const double n = static_cast<double>(tokens.size());
  double h = 0.0;
  for (const auto& [tok, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;  // avoid -0.0
}

}  // namespace evolmath::text
