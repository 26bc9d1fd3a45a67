#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace evolmath::text {

std::vector<std::string> whitespace_tokens(std::string_view text);

/// Runs of '.', '!' or '?' each end one sentence; unterminated trailing
/// text counts as a sentence too.  Zero only for blank text.
int count_sentences(std::string_view text);

/// Maximal groups of the vowels a, e, i, o, u, y; at least one per word.
int count_syllables(std::string_view word);

/// Flesch Reading Ease over whitespace tokens:
/// 206.835 - 1.015 * words/sentences - 84.6 * syllables/words.
double flesch_reading_ease(std::string_view text);

/// Subordinating connectives and relative pronouns per sentence.
double syntactic_complexity(std::string_view text);
const std::set<std::string, std::less<>>& connective_lexicon();

/// Tokens lower-cased with surrounding punctuation stripped; empty results dropped.
std::vector<std::string> normalized_tokens(std::string_view text);

/// Shannon entropy in bits of the normalized token distribution.
double lexical_entropy(std::string_view text);

}  // namespace evolmath::text
