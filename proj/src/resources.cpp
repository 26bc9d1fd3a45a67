#include "evolmath/resources.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "evolmath/error.hpp"
#include "evolmath/serialize.hpp"

namespace evolmath {

namespace embedded {
extern const std::string_view misleading_text_txt;
extern const std::string_view irrelevant_fragments_txt;
extern const std::string_view themes_txt;
extern const std::string_view referee_prompt_txt;
extern const std::string_view polish_prompt_txt;
extern const std::string_view solver_prompt_txt;
}  // namespace embedded

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string_view strip_trailing_newline(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> parse_bank(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Theme> parse_themes(std::string_view text) {
  std::vector<Theme> out;
  for (const auto& line : parse_bank(text)) {
    auto fields = split(line, '|');
    if (fields.size() != 3) throw ConfigError("theme line needs 3 '|'-separated fields: " + line);
    Theme theme{fields[0], fields[1], {}};
    for (auto& e : split(fields[2], ';')) {
      if (!e.empty()) theme.entities.push_back(std::move(e));
    }
    out.push_back(std::move(theme));
  }
  return out;
}

void Banks::check() const {
  if (misleading_text.empty()) throw ConfigError("misleading-text bank is empty");
  if (irrelevant_fragments.empty()) throw ConfigError("irrelevant-fragment bank is empty");
  if (themes.empty()) throw ConfigError("theme bank is empty");
  for (const auto& s : misleading_text) {
    if (has_digit(s)) throw ConfigError("misleading-text entry contains digits: " + s);
  }
  for (const auto& s : irrelevant_fragments) {
    if (has_digit(s)) throw ConfigError("irrelevant fragment contains digits: " + s);
  }
  for (const auto& t : themes) {
    if (has_digit(t.intro)) throw ConfigError("theme intro contains digits: " + t.id);
    std::set<std::string> seen;
    for (const auto& e : t.entities) {
      if (has_digit(e)) throw ConfigError("entity name contains digits: " + e);
      if (!seen.insert(e).second) throw ConfigError("duplicate entity in theme " + t.id + ": " + e);
    }
  }
}

const Banks& Banks::builtin() {
  static const Banks banks = [] {
    Banks b{parse_bank(embedded::misleading_text_txt), parse_bank(embedded::irrelevant_fragments_txt),
            parse_themes(embedded::themes_txt)};
    b.check();
    return b;
  }();
  return banks;
}

std::vector<std::string> load_bank_file(const std::filesystem::path& path) {
  return parse_bank(read_text_file(path));
}

std::vector<Theme> load_themes_file(const std::filesystem::path& path) {
  return parse_themes(read_text_file(path));
}

std::string_view builtin_referee_prompt() { return strip_trailing_newline(embedded::referee_prompt_txt); }
std::string_view builtin_polish_prompt() { return strip_trailing_newline(embedded::polish_prompt_txt); }
std::string_view builtin_solver_prompt() { return strip_trailing_newline(embedded::solver_prompt_txt); }

std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      auto close = tpl.find('}', i);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tpl[i++];
  }
  return out;
}

}  // namespace evolmath
