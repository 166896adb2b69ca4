#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "otplan/configuration.hpp"
#include "otplan/planner.hpp"

namespace otplan {

inline constexpr int kTrajectorySchema = 1;
inline constexpr int kEnergySchema = 1;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);
/// Strict parse of a whole field; throws std::invalid_argument.
double parse_double(std::string_view text);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct TrajectoryHeader {
  std::size_t robots = 0;
  std::string shape_id;
  std::string params_hash;
  std::uint64_t seed = 0;
  int schema_version = kTrajectorySchema;

  bool operator==(const TrajectoryHeader&) const = default;
};

struct TrajectoryRow {
  std::int64_t iteration = 0;
  Phase phase = Phase::Initial;
  std::uint32_t robot = 0;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const TrajectoryRow&) const = default;
};

/// Physical robot positions at the recorded iterations.
///
///     # otplan trajectory
///     # schema=1
///     # robots=<N>
///     # shape=<id>
///     # params=<hash>
///     # seed=<seed>
///     iteration,phase,robot,x,y
///     0,initial,0,-5.25,3.5
///
/// Rows are sorted by (iteration, robot); each listed iteration carries all
/// N robots.
struct TrajectoryFile {
  TrajectoryHeader header;
  std::vector<TrajectoryRow> rows;

  bool operator==(const TrajectoryFile&) const = default;

  /// Physical snapshots of the record; for repeated iterations the last
  /// snapshot wins.
  static TrajectoryFile from_record(const RunRecord& record, TrajectoryHeader header);

  std::string serialize() const;
  /// Throws std::invalid_argument with a line number on malformed input.
  static TrajectoryFile parse(std::string_view text);

  std::vector<std::int64_t> iterations() const;
  /// Throws std::out_of_range if the iteration is not recorded.
  Configuration configuration_at(std::int64_t iteration) const;
  Phase phase_at(std::int64_t iteration) const;
};

/// Energy trace: one line per record row.
///
///     # otplan energy
///     # schema=1
///     iteration,cycle,phase,psi,F,G,objective,min_distance
std::string energy_csv(const RunRecord& record);
std::vector<RecordRow> parse_energy_csv(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace otplan
