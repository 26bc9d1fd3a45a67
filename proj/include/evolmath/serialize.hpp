#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evolmath/model.hpp"

namespace evolmath {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kBenchmarkExtension = ".evolmath.jsonl";

/// Non-finite doubles are written as the strings "inf", "-inf" and "nan".
Json number_to_json(double value);
double number_from_json(const Json& j);

Json to_json(const LinearCondition& cond);
LinearCondition condition_from_json(const Json& j);
Json to_json(const Assignment& values);
Assignment assignment_from_json(const Json& j);
Json to_json(const Problem& p);
Problem problem_from_json(const Json& j);
Json to_json(const FeatureVector& f);
FeatureVector features_from_json(const Json& j);
Json to_json(const BenchmarkItem& item);
BenchmarkItem item_from_json(const Json& j);

/// One JSON line, keys in fixed order.  Throws ValidationError listing every
/// violated invariant when the item is invalid.
std::string canonical_serialize(const BenchmarkItem& item);
BenchmarkItem deserialize_item(std::string_view line);

/// First line of every output file: {"evolmath_header":{format,version,config}}.
Json make_header(std::string_view format, Json config);
bool is_header(const Json& line);

struct BenchmarkFile {
  Json header;
  std::vector<BenchmarkItem> items;
};

/// Header line followed by items sorted by id.
std::string benchmark_to_string(const Json& header, std::vector<BenchmarkItem> items);
void write_benchmark(const std::filesystem::path& path, const Json& header,
                     std::vector<BenchmarkItem> items);
BenchmarkFile read_benchmark(const std::filesystem::path& path);
BenchmarkFile parse_benchmark(std::string_view text);

/// Writes text atomically (temporary file, then rename).
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace evolmath
