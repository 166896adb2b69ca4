#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "otplan/analysis.hpp"
#include "otplan/planner.hpp"
#include "otplan/potentials.hpp"
#include "otplan/shape.hpp"

namespace otplan {

/// Bad configuration value; `key()` names the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Builds a shape from a source string:
///
///     file:PATH                      text point list
///     pgm:PATH:THRESHOLD             binary PGM, dark pixels below THRESHOLD
///     circle:CX,CY,RADIUS,COUNT
///     q[:RING,HALF_WIDTH,SPACING]    thick-stroke Q glyph
///     points:X,Y;X,Y;...
///     chain:SPACING:open|closed:X,Y;X,Y;...
///     polygon:SPACING:X,Y;X,Y;...    lattice fill
///
/// Relative paths resolve against `base_dir`. Throws ConfigError("shape", ...).
Shape make_shape(std::string_view source, const std::filesystem::path& base_dir, double domain_M,
                 const std::string& name = "");

/// floor(point count * sampling resolution / m): a rough count of robots the
/// shape holds at barrier spacing. Informational only.
std::size_t estimate_capacity(const Shape& shape, const PotentialParams& pot);

enum class RunMode { Id, Gd, Both };
const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

/// How many iterations plain descent gets: its own cap, or exactly the
/// physical iteration count of the ID run with the same seed.
enum class GdBudget { Cap, MatchId };
const char* to_string(GdBudget budget);
GdBudget gd_budget_from_string(const std::string& name);

/// One experiment row. Text form: one `key = value` per line, `#` starts a
/// comment. `shape`, `r` and `N` are required; everything else defaults to
/// the standard parameter table scaled by r (see README).
struct ExperimentConfig {
  std::string shape_source;
  std::string shape_id;
  PotentialParams potential;
  std::size_t robots = 0;
  PlannerParams planner;  // seed field unused; see `seeds`
  InitMode init = InitMode::Random;
  std::optional<double> init_separation;
  std::vector<std::uint64_t> seeds{1};
  RunMode mode = RunMode::Both;
  GdBudget gd_budget = GdBudget::Cap;
  std::string output_dir = "out";
  std::filesystem::path base_dir;  // where relative paths resolve; not serialized

  /// Canonical text, every key explicit.
  std::string serialize() const;
  /// Hash of the dynamics-relevant keys (excludes seeds, mode, output).
  std::string params_hash() const;
  Shape load_shape() const;

  bool operator==(const ExperimentConfig& other) const { return serialize() == other.serialize(); }
};

/// Parses and validates; fills defaults. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = std::filesystem::current_path());
ExperimentConfig load_config(const std::filesystem::path& path);

/// "1-3,7" -> {1,2,3,7}.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

enum class CellStatus { Ok, Failed };

struct CellResult {
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Id;  // Id or Gd
  CellStatus status = CellStatus::Ok;
  std::string message;
  RunStatus run_status = RunStatus::OuterCapReached;
  RunMetrics metrics;
  CollisionReport certificate;
  DescentReport descent;
  std::filesystem::path trajectory_path;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // ordered by (seed list order, id before gd)
  std::filesystem::path summary_path;

  std::size_t failed() const;
};

struct RunOptions {
  std::size_t jobs = 1;
  /// Called at the start of every cell; a throw fails that cell only.
  std::function<void(std::uint64_t seed, RunMode mode)> on_cell_start;
  /// Progress lines; nullptr for silence.
  std::function<void(const std::string&)> log;
};

/// Runs the seed x mode grid and writes, under `output_dir`:
///   <mode>_seed<k>.traj.csv, <mode>_seed<k>.energy.csv,
///   <mode>_seed<k>.metrics.json, summary.csv
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Starting configuration for `seed`, shared by both modes.
Configuration experiment_initial_configuration(const ExperimentConfig& config, std::uint64_t seed);

std::string cell_stem(RunMode mode, std::uint64_t seed);

}  // namespace otplan
