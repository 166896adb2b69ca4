#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "otplan/configuration.hpp"
#include "otplan/planner.hpp"
#include "otplan/records_io.hpp"
#include "otplan/shape.hpp"

namespace otplan {

/// Robot colour ramp: t = clamp(mu / mu_max, 0, 1) blends linearly through
/// #2c7bb6 (t = 0, on the shape), #ffffbf (t = 0.5) and #d7191c (t = 1).
std::string ramp_color(double t);

struct SnapshotStyle {
  double domain_M = 6.0;
  double mu_max = 1.0;  // mu at which the ramp saturates
  double robot_radius = 0.08;
  std::string title;
};

/// Square view of [-M, M]^2 with shape points in grey and one circle per
/// robot coloured by its mu.
std::string snapshot_svg(const Configuration& config, const Shape& shape, const SnapshotStyle& style);

struct EnergySeries {
  std::string label;
  std::vector<std::pair<std::int64_t, double>> points;  // (iteration, psi)
};

/// Physical rows of an energy trace as a plot series.
EnergySeries energy_series(const std::string& label, const std::vector<RecordRow>& rows);

/// Psi against iteration, log-scaled y, one labelled polyline per series.
std::string energy_plot_svg(const std::vector<EnergySeries>& series, const std::string& title = "");

struct PlotReport {
  std::vector<std::filesystem::path> written;
  std::vector<std::int64_t> missing;  // requested iterations not in the file
};

/// One SVG per requested iteration (`<stem>_it<k>.svg`); an empty request
/// means first and last recorded. Missing iterations are skipped and listed.
PlotReport render_snapshots(const TrajectoryFile& trajectory, const Shape& shape,
                            const std::vector<std::int64_t>& iterations,
                            const std::filesystem::path& out_dir, const std::string& stem,
                            SnapshotStyle style);

}  // namespace otplan
