// otplan: batch front end for the shape-formation planner.
//
// Exit codes: 0 success, 1 validation error, 2 partial grid failure (or a
// failed verification check), 3 internal error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otplan/analysis.hpp"
#include "otplan/experiment.hpp"
#include "otplan/records_io.hpp"
#include "otplan/svg.hpp"

namespace fs = std::filesystem;
using namespace otplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitPartial = 2;
constexpr int kExitInternal = 3;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void apply_overrides(ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                     const std::string& mode, const std::string& out) {
  if (!seeds.empty()) config.seeds = seeds;
  if (!mode.empty()) config.mode = run_mode_from_string(mode);
  if (!out.empty()) {
    config.output_dir = fs::absolute(out).string();
  }
}

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
            const std::string& mode, const std::string& out, std::size_t jobs) {
  ExperimentConfig config = load_config(config_path);
  apply_overrides(config, seeds, mode, out);
  const Shape shape = config.load_shape();
  std::cerr << "shape " << config.shape_id << ": " << shape.size() << " points, resolution "
            << sci(shape.sampling_resolution()) << ", capacity estimate "
            << estimate_capacity(shape, config.potential) << " robots (N = " << config.robots << ")\n";

  RunOptions options;
  options.jobs = jobs;
  options.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const ExperimentResult result = run_experiment(config, options);
  std::cout << read_text_file(result.summary_path);
  if (result.failed() > 0) {
    std::cerr << result.failed() << " of " << result.cells.size() << " cells failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_verify(const std::string& config_path, const std::vector<std::string>& checks,
               const std::vector<std::uint64_t>& seeds, const std::string& mode,
               std::size_t instances, std::int64_t gibbs_steps) {
  auto wanted = [&](const std::string& name) {
    for (const auto& c : checks)
      if (c == name || c == "all") return true;
    return false;
  };
  bool ok = true;
  auto line = [&](bool pass, const std::string& text) {
    std::cout << (pass ? "PASS " : "FAIL ") << text << '\n';
    ok = ok && pass;
  };

  if (wanted("fd")) {
    for (const auto& c : gradient_oracle_suite(instances, 1))
      line(c.pass(), "fd " + c.name + ": worst relative error " + sci(c.worst_relative_error) + " over " +
                         std::to_string(c.instances) + " instances");
  }
  if (wanted("gibbs")) {
    const Shape wells({{-1.0, 0.0}, {1.0, 0.0}}, "two-wells");
    GibbsCheckParams gp;
    gp.n_steps = gibbs_steps;
    RngStream rng(1, 4);
    const GibbsCheck g = gibbs_check(wells, gp, rng);
    const double asym = std::abs(g.empirical_left - g.empirical_right) /
                        std::max(g.empirical_left, g.empirical_right);
    line(g.tv_distance <= 0.1 && asym <= 0.1,
         "gibbs: tv " + sci(g.tv_distance) + ", well masses " + sci(g.empirical_left) + " / " +
             sci(g.empirical_right));
  }
  if (wanted("certificate")) {
    if (config_path.empty()) throw ConfigError("config", "the certificate check needs --config");
    ExperimentConfig config = load_config(config_path);
    apply_overrides(config, seeds, mode, "");
    const Shape shape = config.load_shape();
    for (auto seed : config.seeds) {
      PlannerParams params = config.planner;
      params.seed = seed;
      const Configuration x0 = experiment_initial_configuration(config, seed);
      for (RunMode m : {RunMode::Id, RunMode::Gd}) {
        if (config.mode != RunMode::Both && config.mode != m) continue;
        const RunRecord rec = m == RunMode::Id ? plan_id(x0, shape, config.potential, params)
                                               : plan_gd(x0, shape, config.potential, params);
        const CollisionReport cert = collision_certificate(rec, config.potential);
        const DescentReport desc = descent_check(rec);
        std::vector<Configuration> seen;
        for (const auto& s : rec.snapshots) seen.push_back(s.config);
        RngStream lrng(seed, 5);
        const PotentialModel model{&shape, nullptr, config.potential, true};
        const LipschitzEstimate L =
            estimate_lipschitz(model, ConfigurationSampler::from_configurations(seen), 50, lrng);
        const std::string tag = cell_stem(m, seed);
        line(cert.pass(), tag + " collision certificate " + to_string(cert.status) + ": min distance " +
                              sci(cert.min_distance) + ", psi0 " + sci(cert.initial_energy) + " < E_m " +
                              sci(cert.barrier_level));
        line(desc.pass(), tag + " descent: " + std::to_string(desc.violations) + " violations in " +
                              std::to_string(desc.steps_checked) + " steps; L_hat " + sci(L.L_hat) +
                              (L.admits(params.dt) ? " admits dt" : " does not admit dt"));
      }
    }
  }
  return ok ? kExitOk : kExitPartial;
}

int cmd_plot(const std::string& config_path, const std::vector<std::string>& files,
             const std::vector<std::int64_t>& iterations, double mu_max, const std::string& out) {
  const ExperimentConfig config = load_config(config_path);
  const Shape shape = config.load_shape();
  const fs::path out_dir = out.empty() ? fs::path(".") : fs::path(out);
  std::vector<EnergySeries> series;
  bool missing = false;
  for (const auto& f : files) {
    const fs::path path(f);
    const std::string name = path.filename().string();
    auto strip = [&](const std::string& suffix) { return name.substr(0, name.size() - suffix.size()); };
    if (name.ends_with(".traj.csv")) {
      SnapshotStyle style;
      style.domain_M = config.planner.domain_M;
      style.mu_max = mu_max;
      const PlotReport rep = render_snapshots(TrajectoryFile::parse(read_text_file(path)), shape, iterations,
                                              out_dir, strip(".traj.csv"), style);
      for (const auto& w : rep.written) std::cout << w.string() << '\n';
      for (auto it : rep.missing) {
        std::cerr << name << ": iteration " << it << " not recorded, skipped\n";
        missing = true;
      }
    } else if (name.ends_with(".energy.csv")) {
      series.push_back(energy_series(strip(".energy.csv"), parse_energy_csv(read_text_file(path))));
    } else {
      throw ConfigError("plot", "unrecognised record file " + name + " (expected .traj.csv or .energy.csv)");
    }
  }
  if (!series.empty()) {
    const fs::path path = out_dir / "energy.svg";
    write_text_file(path, energy_plot_svg(series, config.shape_id));
    std::cout << path.string() << '\n';
  }
  return missing ? kExitPartial : kExitOk;
}

int cmd_shapes(const std::string& action, const std::string& source, double r, const std::string& out) {
  if (action == "list") {
    std::cout << "file:PATH\npgm:PATH:THRESHOLD\ncircle:CX,CY,RADIUS,COUNT\n"
                 "q[:RING,HALF_WIDTH,SPACING]\npoints:X,Y;X,Y;...\n"
                 "chain:SPACING:open|closed:X,Y;...\npolygon:SPACING:X,Y;...\n";
    return kExitOk;
  }
  if (source.empty()) throw ConfigError("shape", "a shape source is required");
  const Shape shape = make_shape(source, fs::current_path(), 6.0);
  if (action == "emit") {
    const std::string text = format_shape_text(shape);
    if (out.empty())
      std::cout << text;
    else
      write_text_file(out, text);
    return kExitOk;
  }
  if (action == "info") {
    std::cout << "points " << shape.size() << "\nresolution " << sci(shape.sampling_resolution())
              << "\ndefault epsilon " << sci(default_epsilon(shape)) << '\n';
    if (r > 0.0) {
      const PotentialParams pot = PotentialParams::table1(r);
      std::cout << "capacity estimate " << estimate_capacity(shape, pot) << " (r = " << r << ")\n";
    }
    return kExitOk;
  }
  throw ConfigError("shapes", "unknown action '" + action + "' (list, emit or info)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot shape formation by intermittent diffusion"};
  app.require_subcommand(1);

  std::string config_path, mode, out;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run the seed x mode grid of a configuration file");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("--seed", seeds, "Seeds to run (overrides the file)");
  run->add_option("--mode", mode, "id, gd or both")->check(CLI::IsMember({"id", "gd", "both"}));
  run->add_option("--out", out, "Output directory (overrides the file)");
  run->add_option("--jobs", jobs, "Parallel grid cells")->check(CLI::PositiveNumber);

  std::vector<std::string> checks{"all"};
  std::size_t instances = 100;
  std::int64_t gibbs_steps = 2'000'000;
  auto* verify = app.add_subcommand("verify", "Gradient, Gibbs and collision/descent checks");
  verify->add_option("--config", config_path, "Configuration for the certificate check");
  verify->add_option("--checks", checks, "fd, gibbs, certificate or all")->delimiter(',');
  verify->add_option("--seed", seeds, "Seeds for the certificate check");
  verify->add_option("--mode", mode, "id, gd or both")->check(CLI::IsMember({"id", "gd", "both"}));
  verify->add_option("--instances", instances, "Random instances per gradient");
  verify->add_option("--gibbs-steps", gibbs_steps, "Kept Gibbs chain steps");

  std::vector<std::string> files;
  std::vector<std::int64_t> iterations;
  double mu_max = 1.0;
  auto* plot = app.add_subcommand("plot", "Render trajectory snapshots and energy traces to SVG");
  plot->add_option("--config", config_path, "Configuration (shape and domain)")->required();
  plot->add_option("records", files, "*.traj.csv and *.energy.csv files")->required();
  plot->add_option("--iterations", iterations, "Snapshot iterations (default: first and last)")
      ->delimiter(',');
  plot->add_option("--mu-max", mu_max, "mu at which the colour ramp saturates");
  plot->add_option("--out", out, "Output directory");

  std::string action = "list", source;
  double r = 0.0;
  auto* shapes_cmd = app.add_subcommand("shapes", "List, emit or inspect shape sources");
  shapes_cmd->add_option("action", action, "list, emit or info");
  shapes_cmd->add_option("source", source, "Shape source string");
  shapes_cmd->add_option("--r", r, "Collision radius for the capacity estimate");
  shapes_cmd->add_option("--out", out, "Output file for emit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, seeds, mode, out, jobs);
    if (*verify) return cmd_verify(config_path, checks, seeds, mode, instances, gibbs_steps);
    if (*plot) return cmd_plot(config_path, files, iterations, mu_max, out);
    if (*shapes_cmd) return cmd_shapes(action, source, r, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
