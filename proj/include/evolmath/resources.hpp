#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evolmath {

struct Theme {
  std::string id;
  std::string intro;
  std::vector<std::string> entities;
};

/// One entry per non-blank line; lines starting with '#' are comments.
std::vector<std::string> parse_bank(std::string_view text);

/// Lines of the form "id | intro | entity; entity; ...".
std::vector<Theme> parse_themes(std::string_view text);

/// Text banks used by the linguistic operators.  Entries may not contain
/// digits, so they can never collide with condition constants.
struct Banks {
  std::vector<std::string> misleading_text;
  std::vector<std::string> irrelevant_fragments;
  std::vector<Theme> themes;

  static const Banks& builtin();

  /// Throws ConfigError on an empty bank, a digit, or duplicate entity names.
  void check() const;
};

/// Reads a bank file, replacing the corresponding built-in bank.
std::vector<std::string> load_bank_file(const std::filesystem::path& path);
std::vector<Theme> load_themes_file(const std::filesystem::path& path);

std::string_view builtin_referee_prompt();
std::string_view builtin_polish_prompt();
std::string_view builtin_solver_prompt();

/// Replaces every "{key}" with its value.  Unknown placeholders are left as is.
std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values);

}  // namespace evolmath
