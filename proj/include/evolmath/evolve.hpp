#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evolmath/fitness.hpp"
#include "evolmath/model.hpp"
#include "evolmath/operators.hpp"
#include "evolmath/resources.hpp"
#include "evolmath/seedgen.hpp"
#include "evolmath/serialize.hpp"

namespace evolmath {

class Gateway;

enum class AblationMode { Full, NoFormulaic, NoLinguistic, NoCrossover, TwoGen };

std::string_view to_string(AblationMode mode) noexcept;
/// "full", "no_fm", "no_lm", "no_co" or "two_gen".  Throws ConfigError.
AblationMode parse_ablation_mode(std::string_view name);

struct EvolutionConfig {
  std::size_t population_size = 300;  // items emitted by the first generation
  SeedConfig seed_config;
  OperatorSuiteConfig suite;
  std::string weights{kReferencePreset};  // preset name or sidecar path
  double threshold = kDefaultThreshold;
  std::optional<double> percentile = kDefaultPercentile;
  int max_generations = 2;
  std::uint64_t rng_seed = 0;
  std::optional<int> offline_referee;  // constant referee score; no gateway needed
  bool polish = false;
  std::optional<AblationMode> mode;
  std::size_t jobs = 1;  // not part of the recorded config; output never depends on it

  void validate() const;

  /// Every field that affects output.
  Json to_json() const;
  static EvolutionConfig from_json(const Json& j);
};

/// Operator flags and generation bound of one ablation setting.  Every mode
/// except two_gen runs a single cycle.
EvolutionConfig apply_mode(EvolutionConfig cfg, AblationMode mode);

struct RunStats {
  std::size_t operator_skips = 0;
  std::size_t crossover_skips = 0;
  std::size_t polish_fallbacks = 0;
  std::vector<std::size_t> rejected_per_generation;
};

struct RunResult {
  Json header;
  std::vector<BenchmarkItem> items;  // sorted by id
  std::vector<std::string> import_rejections;
  RunStats stats;
};

/// Seeds, operators, rendering, scoring and selection, then re-evolution of
/// the rejected items until max_generations.  The referee is the offline
/// constant when configured, otherwise the gateway's referee role; without
/// either the run aborts with ConfigError.
RunResult run(const EvolutionConfig& cfg, Gateway* gateway = nullptr, const Banks& banks = Banks::builtin());

RunResult ablation_run(const EvolutionConfig& cfg, AblationMode mode, Gateway* gateway = nullptr,
                       const Banks& banks = Banks::builtin());

struct DifficultyPartition {
  std::vector<BenchmarkItem> easy;  // rejected by selection
  std::vector<BenchmarkItem> hard;  // selected
};

/// Throws InvalidInput when an item has no fitness report.
DifficultyPartition partition_by_difficulty(std::vector<BenchmarkItem> items);

// ---------------------------------------------------------------------------
// Imports

struct ImportedEquation {
  std::vector<std::pair<std::string, std::int64_t>> terms;  // file order
  Relation relation = Relation::Equal;
  std::int64_t rhs = 0;
};

struct ImportedCore {
  std::string source_id;
  std::vector<ImportedEquation> equations;
  std::map<std::string, std::int64_t> solution;
  std::string target;
  std::string original_text;
};

/// One JSON object per line; blank lines are skipped.  Throws ParseError
/// naming the line.
std::vector<ImportedCore> parse_imports(std::string_view text);

/// Names are mapped to v1..vn in order of first appearance.  Throws
/// ValidationError for a rank-deficient system, an annotation that violates
/// an equation, or any other broken invariant.  Necessity is not required.
Problem problem_from_import(const ImportedCore& core);

/// Imported cores bypass seed generation; invalid ones are dropped and listed
/// in import_rejections.
RunResult evolve_imported(std::span<const ImportedCore> cores, const EvolutionConfig& cfg,
                          Gateway* gateway = nullptr, const Banks& banks = Banks::builtin());

}  // namespace evolmath
