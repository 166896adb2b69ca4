#include "otplan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "otplan/records_io.hpp"

namespace otplan {

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::invalid_argument("config key '" + key + "': " + message), key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double number(const std::string& key, std::string_view text) {
  try {
    const double v = parse_double(text);
    if (!std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError(key, "expected a finite number, got '" + std::string(text) + "'");
  }
}

template <typename Int>
Int integer(const std::string& key, std::string_view text) {
  Int v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

std::vector<Vec2> vertex_list(std::string_view text) {
  std::vector<Vec2> out;
  for (auto item : split(text, ';')) {
    if (item.empty()) continue;
    const auto xy = split(item, ',');
    if (xy.size() != 2) throw ConfigError("shape", "vertex '" + std::string(item) + "' is not X,Y");
    out.push_back({number("shape", xy[0]), number("shape", xy[1])});
  }
  if (out.empty()) throw ConfigError("shape", "no vertices given");
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view p) {
  std::filesystem::path path{std::string(p)};
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Shape make_shape(std::string_view source, const std::filesystem::path& base_dir, double domain_M,
                 const std::string& name) {
  const auto colon = source.find(':');
  const std::string kind(source.substr(0, colon));
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : source.substr(colon + 1);
  const std::string id = name.empty() ? kind : name;
  try {
    if (kind == "file") {
      const auto path = resolve(base_dir, rest);
      if (!std::filesystem::exists(path)) throw ConfigError("shape", "file not found: " + path.string());
      Shape s = load_shape_file(path);
      return Shape(std::vector<Vec2>(s.points().begin(), s.points().end()),
                   name.empty() ? path.stem().string() : name);
    }
    if (kind == "pgm") {
      const auto sep = rest.rfind(':');
      if (sep == std::string_view::npos) throw ConfigError("shape", "expected pgm:PATH:THRESHOLD");
      const auto path = resolve(base_dir, rest.substr(0, sep));
      if (!std::filesystem::exists(path)) throw ConfigError("shape", "file not found: " + path.string());
      const int threshold = integer<int>("shape", rest.substr(sep + 1));
      Shape s = load_pgm_shape(path, threshold, domain_M);
      return Shape(std::vector<Vec2>(s.points().begin(), s.points().end()),
                   name.empty() ? path.stem().string() : name);
    }
    if (kind == "circle") {
      const auto f = split(rest, ',');
      if (f.size() != 4) throw ConfigError("shape", "expected circle:CX,CY,RADIUS,COUNT");
      return Shape(shapes::circle({number("shape", f[0]), number("shape", f[1])}, number("shape", f[2]),
                                  integer<std::size_t>("shape", f[3])),
                   id);
    }
    if (kind == "q") {
      shapes::QGlyph g;
      if (!rest.empty()) {
        const auto f = split(rest, ',');
        if (f.size() != 3) throw ConfigError("shape", "expected q:RING,HALF_WIDTH,SPACING");
        g.ring_radius = number("shape", f[0]);
        g.half_width = number("shape", f[1]);
        g.spacing = number("shape", f[2]);
      }
      return Shape(shapes::q_glyph(g), id);
    }
    if (kind == "points") return Shape(vertex_list(rest), id);
    if (kind == "chain") {
      const auto f = split(rest, ':');
      if (f.size() != 3 || (f[1] != "open" && f[1] != "closed"))
        throw ConfigError("shape", "expected chain:SPACING:open|closed:X,Y;...");
      const auto v = vertex_list(f[2]);
      return Shape(shapes::segment_chain(v, number("shape", f[0]), f[1] == "closed"), id);
    }
    if (kind == "polygon") {
      const auto sep = rest.find(':');
      if (sep == std::string_view::npos) throw ConfigError("shape", "expected polygon:SPACING:X,Y;...");
      const auto v = vertex_list(rest.substr(sep + 1));
      return Shape(shapes::polygon_fill(v, number("shape", rest.substr(0, sep))), id);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("shape", e.what());
  }
  throw ConfigError("shape", "unknown shape source '" + kind + "'");
}

std::size_t estimate_capacity(const Shape& shape, const PotentialParams& pot) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(shape.size()) *
                                             shape.sampling_resolution() / pot.m));
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Id: return "id";
    case RunMode::Gd: return "gd";
    case RunMode::Both: return "both";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "id") return RunMode::Id;
  if (name == "gd") return RunMode::Gd;
  if (name == "both") return RunMode::Both;
  throw ConfigError("mode", "expected id, gd or both, got '" + name + "'");
}

const char* to_string(GdBudget budget) { return budget == GdBudget::Cap ? "cap" : "match_id"; }

GdBudget gd_budget_from_string(const std::string& name) {
  if (name == "cap") return GdBudget::Cap;
  if (name == "match_id") return GdBudget::MatchId;
  throw ConfigError("gd_budget", "expected cap or match_id, got '" + name + "'");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) throw ConfigError("seeds", "empty entry");
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(integer<std::uint64_t>("seeds", item));
      continue;
    }
    const auto lo = integer<std::uint64_t>("seeds", trim(item.substr(0, dash)));
    const auto hi = integer<std::uint64_t>("seeds", trim(item.substr(dash + 1)));
    if (hi < lo || hi - lo > 1'000'000) throw ConfigError("seeds", "bad range '" + std::string(item) + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  std::set<std::uint64_t> seen;
  for (auto s : out)
    if (!seen.insert(s).second) throw ConfigError("seeds", "duplicate seed " + std::to_string(s));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "shape",     "shape_id",  "r",         "R",          "G0",        "kernel",
      "m",         "N",         "epsilon",   "tau",        "dt",        "alpha",
      "beta",      "s_max",     "step4_cap", "outer_cap",  "gd_cap",    "M",
      "init",      "init_separation",        "seeds",      "mode",      "gd_budget",
      "output",    "snapshot_stride",        "record_virtual"};
  return keys;
}

std::string dynamics_text(const ExperimentConfig& c) {
  std::string out;
  auto put = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  auto num = [](double v) { return format_double(v); };
  put("shape", c.shape_source);
  put("shape_id", c.shape_id);
  put("r", num(c.potential.r));
  put("R", num(c.potential.R));
  put("G0", num(c.potential.G0));
  put("kernel", to_string(c.potential.kernel));
  put("m", num(c.potential.m));
  put("N", std::to_string(c.robots));
  put("epsilon", num(c.planner.epsilon));
  put("tau", num(c.planner.tau));
  put("dt", num(c.planner.dt));
  put("alpha", num(c.planner.alpha));
  put("beta", num(c.planner.beta));
  put("s_max", std::to_string(c.planner.s_max));
  put("step4_cap", std::to_string(c.planner.step4_cap));
  put("outer_cap", std::to_string(c.planner.outer_cap));
  put("gd_cap", std::to_string(c.planner.gd_cap));
  put("M", num(c.planner.domain_M));
  put("init", to_string(c.init));
  if (c.init_separation) put("init_separation", num(*c.init_separation));
  put("gd_budget", to_string(c.gd_budget));
  put("snapshot_stride", std::to_string(c.planner.snapshot_stride));
  put("record_virtual", c.planner.record_virtual ? "true" : "false");
  return out;
}

}  // namespace

std::string ExperimentConfig::serialize() const {
  std::string seeds_text;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) seeds_text += ',';
    seeds_text += std::to_string(seeds[i]);
  }
  return dynamics_text(*this) + "seeds = " + seeds_text + "\nmode = " + to_string(mode) +
         "\noutput = " + output_dir + "\n";
}

std::string ExperimentConfig::params_hash() const { return fnv1a_hex(dynamics_text(*this)); }

Shape ExperimentConfig::load_shape() const {
  return make_shape(shape_source, base_dir, planner.domain_M, shape_id);
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ConfigError(key, "unknown key");
    if (value.empty()) throw ConfigError(key, "missing value");
    if (!kv.emplace(key, value).second) throw ConfigError(key, "given twice");
  }

  auto get = [&kv](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto require = [&](const std::string& key) -> const std::string& {
    if (const auto* v = get(key)) return *v;
    throw ConfigError(key, "required");
  };
  auto num_or = [&](const std::string& key, double fallback) {
    const auto* v = get(key);
    return v ? number(key, *v) : fallback;
  };
  auto int_or = [&](const std::string& key, std::int64_t fallback) {
    const auto* v = get(key);
    return v ? integer<std::int64_t>(key, *v) : fallback;
  };
  auto positive = [](const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  };
  auto at_least_one = [](const std::string& key, std::int64_t v) {
    if (v < 1) throw ConfigError(key, "must be at least 1");
  };

  ExperimentConfig c;
  c.base_dir = base_dir;
  c.shape_source = require("shape");
  c.shape_id = get("shape_id") ? *get("shape_id") : "";

  const double r = number("r", require("r"));
  positive("r", r);
  c.potential.r = r;
  c.potential.R = num_or("R", 10.0 * r);
  if (!(c.potential.R > r)) throw ConfigError("R", "R must exceed r");
  c.potential.G0 = num_or("G0", 0.01);
  positive("G0", c.potential.G0);
  if (const auto* k = get("kernel")) {
    try {
      c.potential.kernel = kernel_from_string(*k);
    } catch (const std::exception& e) {
      throw ConfigError("kernel", e.what());
    }
  } else {
    c.potential.kernel = Kernel::Cotangent;
  }
  c.potential.m = num_or("m", default_barrier_radius(r, c.potential.R));
  if (!(c.potential.m > r && c.potential.m < c.potential.R))
    throw ConfigError("m", "barrier radius must satisfy r < m < R");

  const auto n = integer<std::size_t>("N", require("N"));
  if (n < 1) throw ConfigError("N", "must be at least 1");
  c.robots = n;

  PlannerParams& p = c.planner;
  p.domain_M = num_or("M", 6.0);
  positive("M", p.domain_M);
  p.dt = num_or("dt", 0.1 * r);
  positive("dt", p.dt);
  p.alpha = num_or("alpha", r);
  positive("alpha", p.alpha);
  p.beta = num_or("beta", 10.0);
  positive("beta", p.beta);
  p.tau = num_or("tau", p.tau);
  positive("tau", p.tau);
  p.s_max = int_or("s_max", p.s_max);
  at_least_one("s_max", p.s_max);
  p.step4_cap = int_or("step4_cap", p.step4_cap);
  at_least_one("step4_cap", p.step4_cap);
  p.outer_cap = int_or("outer_cap", p.outer_cap);
  at_least_one("outer_cap", p.outer_cap);
  p.gd_cap = int_or("gd_cap", p.gd_cap);
  at_least_one("gd_cap", p.gd_cap);
  p.snapshot_stride = int_or("snapshot_stride", 0);
  if (const auto* v = get("record_virtual")) {
    if (*v != "true" && *v != "false") throw ConfigError("record_virtual", "expected true or false");
    p.record_virtual = *v == "true";
  }

  if (const auto* v = get("init")) {
    try {
      c.init = init_mode_from_string(*v);
    } catch (const std::exception& e) {
      throw ConfigError("init", e.what());
    }
  }
  if (const auto* v = get("init_separation")) {
    c.init_separation = number("init_separation", *v);
    positive("init_separation", *c.init_separation);
  }
  if (const auto* v = get("seeds")) c.seeds = parse_seed_list(*v);
  if (const auto* v = get("mode")) c.mode = run_mode_from_string(*v);
  if (const auto* v = get("gd_budget")) c.gd_budget = gd_budget_from_string(*v);
  if (const auto* v = get("output")) c.output_dir = *v;

  const Shape shape = c.load_shape();
  if (c.shape_id.empty()) c.shape_id = shape.name();
  p.epsilon = num_or("epsilon", default_epsilon(shape));
  positive("epsilon", p.epsilon);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config", "file not found: " + path.string());
  return parse_config(read_text_file(path), path.parent_path().empty()
                                                 ? std::filesystem::current_path()
                                                 : path.parent_path());
}

// ---------------------------------------------------------------------------

Configuration experiment_initial_configuration(const ExperimentConfig& config, std::uint64_t seed) {
  RngStream rng = RngStream(seed).substream(3);
  return initial_configuration(config.init, config.robots, config.potential, config.planner.domain_M,
                               rng, config.init_separation);
}

std::string cell_stem(RunMode mode, std::uint64_t seed) {
  return std::string(to_string(mode)) + "_seed" + std::to_string(seed);
}

std::size_t ExperimentResult::failed() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const CellResult& c) { return c.status == CellStatus::Failed; }));
}

namespace {

using Json = nlohmann::ordered_json;

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string metrics_json(const ExperimentConfig& config, const CellResult& cell,
                         const RunRecord& record) {
  Json j;
  j["schema"] = 1;
  j["shape"] = config.shape_id;
  j["params"] = config.params_hash();
  j["seed"] = cell.seed;
  j["mode"] = to_string(cell.mode);
  j["status"] = to_string(cell.run_status);
  j["iterations"] = record.physical_iterations;
  j["cycles"] = record.cycles;
  j["aborted_cycles"] = record.aborted_cycles;
  j["step4_cap_hits"] = record.step4_cap_hits;
  const RunMetrics& m = cell.metrics;
  j["psi"] = finite_or_null(m.psi);
  j["F"] = finite_or_null(m.shape_part);
  j["G"] = finite_or_null(m.repel_part);
  j["on_shape_fraction"] = m.on_shape_fraction;
  j["nn_mean"] = finite_or_null(m.nn_mean);
  j["nn_cv"] = finite_or_null(m.nn_cv);
  Json cert;
  cert["status"] = to_string(cell.certificate.status);
  cert["initial_energy"] = finite_or_null(cell.certificate.initial_energy);
  cert["barrier_level"] = finite_or_null(cell.certificate.barrier_level);
  cert["min_distance"] = finite_or_null(cell.certificate.min_distance);
  cert["violating_iteration"] =
      cell.certificate.violating_iteration ? Json(*cell.certificate.violating_iteration) : Json(nullptr);
  j["collision_certificate"] = cert;
  Json desc;
  desc["steps_checked"] = cell.descent.steps_checked;
  desc["violations"] = cell.descent.violations;
  desc["worst_increase"] = cell.descent.worst_increase;
  j["descent"] = desc;
  return j.dump(2) + "\n";
}

std::string summary_csv(const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  std::string out = "# otplan summary\n# schema=1\n";
  out += "shape,r,N,mode,runs,failed,psi_mean,psi_min,psi_median\n";
  for (RunMode mode : {RunMode::Id, RunMode::Gd}) {
    std::vector<double> psi;
    std::size_t runs = 0, failed = 0;
    for (const auto& c : cells) {
      if (c.mode != mode) continue;
      ++runs;
      if (c.status == CellStatus::Failed)
        ++failed;
      else
        psi.push_back(c.metrics.psi);
    }
    if (runs == 0) continue;
    out += config.shape_id + ',' + format_double(config.potential.r) + ',' +
           std::to_string(config.robots) + ',' + to_string(mode) + ',' + std::to_string(runs) + ',' +
           std::to_string(failed);
    if (psi.empty()) {
      out += ",,,\n";
      continue;
    }
    double sum = 0.0;
    for (double v : psi) sum += v;
    std::sort(psi.begin(), psi.end());
    const std::size_t k = psi.size();
    const double median = k % 2 ? psi[k / 2] : 0.5 * (psi[k / 2 - 1] + psi[k / 2]);
    out += ',' + format_double(sum / static_cast<double>(k)) + ',' + format_double(psi.front()) +
           ',' + format_double(median) + '\n';
  }
  out += "\nseed,mode,status,psi,F,G,on_shape_fraction,nn_cv,iterations,cycles,collision,descent_violations,message\n";
  for (const auto& c : cells) {
    out += std::to_string(c.seed) + ',' + to_string(c.mode) + ',';
    if (c.status == CellStatus::Failed) {
      std::string msg = c.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out += "FAILED,,,,,,,,,," + msg + '\n';
      continue;
    }
    const RunMetrics& m = c.metrics;
    out += std::string(to_string(c.run_status)) + ',' + format_double(m.psi) + ',' +
           format_double(m.shape_part) + ',' + format_double(m.repel_part) + ',' +
           format_double(m.on_shape_fraction) + ',' + format_double(m.nn_cv) + ',' +
           std::to_string(m.iterations) + ',' + std::to_string(m.cycles) + ',' +
           to_string(c.certificate.status) + ',' + std::to_string(c.descent.violations) + ",\n";
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const Shape shape = config.load_shape();
  const std::filesystem::path out_dir = resolve(config.base_dir, config.output_dir);
  std::filesystem::create_directories(out_dir);

  std::vector<CellResult> cells;
  for (auto seed : config.seeds) {
    for (RunMode mode : {RunMode::Id, RunMode::Gd}) {
      if (config.mode != RunMode::Both && config.mode != mode) continue;
      CellResult cell;
      cell.seed = seed;
      cell.mode = mode;
      cells.push_back(std::move(cell));
    }
  }

  // ID iteration counts per seed, for GdBudget::MatchId.
  std::map<std::uint64_t, std::promise<std::int64_t>> id_budget;
  std::map<std::uint64_t, std::shared_future<std::int64_t>> id_budget_future;
  for (auto seed : config.seeds) id_budget_future[seed] = id_budget[seed].get_future().share();
  const bool match = config.gd_budget == GdBudget::MatchId && config.mode == RunMode::Both;

  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    if (!options.log) return;
    std::lock_guard lock(log_mutex);
    options.log(line);
  };

  auto run_cell = [&](CellResult& cell) {
    const std::string stem = cell_stem(cell.mode, cell.seed);
    bool budget_set = false;
    try {
      if (options.on_cell_start) options.on_cell_start(cell.seed, cell.mode);
      PlannerParams params = config.planner;
      params.seed = cell.seed;
      const Configuration x0 = experiment_initial_configuration(config, cell.seed);
      RunRecord record;
      if (cell.mode == RunMode::Id) {
        record = plan_id(x0, shape, config.potential, params);
        if (match) {
          id_budget[cell.seed].set_value(std::max<std::int64_t>(1, record.physical_iterations));
          budget_set = true;
        }
      } else {
        if (match) params.gd_cap = id_budget_future[cell.seed].get();
        record = plan_gd(x0, shape, config.potential, params);
      }
      cell.run_status = record.status;
      cell.metrics = run_metrics(record, shape, config.potential, config.planner.epsilon);
      cell.certificate = collision_certificate(record, config.potential);
      cell.descent = descent_check(record);

      TrajectoryHeader header;
      header.shape_id = config.shape_id;
      header.params_hash = config.params_hash();
      header.seed = cell.seed;
      cell.trajectory_path = out_dir / (stem + ".traj.csv");
      write_text_file(cell.trajectory_path, TrajectoryFile::from_record(record, header).serialize());
      write_text_file(out_dir / (stem + ".energy.csv"), energy_csv(record));
      write_text_file(out_dir / (stem + ".metrics.json"), metrics_json(config, cell, record));
      log(stem + ": psi " + format_double(cell.metrics.psi) + " after " +
          std::to_string(record.physical_iterations) + " iterations (" + to_string(record.status) + ")");
    } catch (const std::exception& e) {
      cell.status = CellStatus::Failed;
      cell.message = e.what();
      log(stem + ": FAILED: " + cell.message);
    }
    if (match && cell.mode == RunMode::Id && !budget_set)
      id_budget[cell.seed].set_value(config.planner.gd_cap);
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) run_cell(cells[k]);
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.cells = std::move(cells);
  result.summary_path = out_dir / "summary.csv";
  write_text_file(result.summary_path, summary_csv(config, result.cells));
  return result;
}

}  // namespace otplan
