#include "otplan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace otplan {

VectorField fd_gradient(const ScalarField& potential, const Configuration& config, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  std::vector<Vec2> probe(config.positions().begin(), config.positions().end());
  VectorField out(config.size());
  auto eval = [&](std::size_t i, Vec2 p) {
    const Vec2 saved = probe[i];
    probe[i] = p;
    const double v = potential(Configuration(probe));
    probe[i] = saved;
    if (!std::isfinite(v)) throw std::domain_error("potential is not finite at a probe point");
    return v;
  };
  for (std::size_t i = 0; i < config.size(); ++i) {
    const Vec2 x = config[i];
    out[i].x = (eval(i, {x.x + h, x.y}) - eval(i, {x.x - h, x.y})) / (2.0 * h);
    out[i].y = (eval(i, {x.x, x.y + h}) - eval(i, {x.x, x.y - h})) / (2.0 * h);
  }
  return out;
}

double relative_error(const VectorField& a, const VectorField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector fields differ in length");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += squared_norm(a[i] - b[i]);
  const double scale = std::max(squared_norm(a), squared_norm(b));
  if (scale == 0.0) return std::sqrt(diff) == 0.0 ? 0.0 : kInfinity;
  return std::sqrt(diff / scale);
}

// ---------------------------------------------------------------------------

namespace {

struct OracleInstance {
  Configuration robots;
  std::vector<Vec2> shape_points;
  TargetSet targets;
};

Vec2 uniform_point(RngStream& rng, double half) {
  return {(2.0 * rng.next_uniform() - 1.0) * half, (2.0 * rng.next_uniform() - 1.0) * half};
}

bool near_tie(std::span<const Vec2> shape, const Vec2& x) {
  double d1 = kInfinity, d2 = kInfinity;
  for (const auto& p : shape) {
    const double d = distance(p, x);
    if (d < d1) {
      d2 = d1;
      d1 = d;
    } else if (d < d2) {
      d2 = d;
    }
  }
  return d2 - d1 < 1e-3;
}

bool near_cutoff(const Configuration& x, const PotentialParams& pot, double min_sep) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double d = distance(x[i], x[j]);
      if (d < min_sep || std::abs(d - pot.interaction_radius()) < 1e-3) return true;
    }
  return false;
}

OracleInstance draw_instance(RngStream& rng, const std::vector<PotentialParams>& kernels) {
  while (true) {
    OracleInstance inst;
    const auto n = 2 + static_cast<std::size_t>(rng.next_uniform() * 19.0);
    std::vector<Vec2> robots;
    for (std::size_t i = 0; i < n; ++i) robots.push_back(uniform_point(rng, 2.0));
    for (int k = 0; k < 60; ++k) inst.shape_points.push_back(uniform_point(rng, 3.0));
    for (std::size_t i = 0; i < n; ++i) inst.targets.targets.push_back(uniform_point(rng, 3.0));
    inst.robots = Configuration(std::move(robots));
    bool ok = true;
    for (const auto& x : inst.robots) ok = ok && !near_tie(inst.shape_points, x);
    // Keep pairs clear of the steep wall so the bump stays well scaled.
    for (const auto& pot : kernels) ok = ok && !near_cutoff(inst.robots, pot, 1.5 * pot.barrier_distance());
    if (ok) return inst;
  }
}

}  // namespace

std::vector<GradientCheck> gradient_oracle_suite(std::size_t instances, std::uint64_t seed, double h,
                                                 double tolerance) {
  const PotentialParams exp_pot{0.1, 1.0, 0.01, Kernel::ExpBump, default_barrier_radius(0.1, 1.0)};
  const PotentialParams cot_pot{0.1, 1.0, 0.01, Kernel::Cotangent, default_barrier_radius(0.1, 1.0)};
  std::vector<GradientCheck> checks = {{"grad_F", 0, 0, 0.0},
                                       {"grad_G exp", 0, 0, 0.0},
                                       {"grad_G cot", 0, 0, 0.0},
                                       {"grad_Fhat", 0, 0, 0.0}};
  RngStream rng(seed, 7);
  auto record = [&](GradientCheck& c, const VectorField& analytic, const VectorField& fd) {
    const double e = relative_error(analytic, fd);
    ++c.instances;
    c.worst_relative_error = std::max(c.worst_relative_error, e);
    if (!(e <= tolerance)) ++c.failures;
  };
  for (std::size_t k = 0; k < instances; ++k) {
    const OracleInstance inst = draw_instance(rng, {exp_pot, cot_pot});
    const Shape shape(inst.shape_points);
    const Configuration& x = inst.robots;

    record(checks[0], grad_F(x, shape),
           fd_gradient([&](const Configuration& c) { return shape_potential_F(c, shape); }, x, h));
    for (int kk = 0; kk < 2; ++kk) {
      const PotentialParams& pot = kk == 0 ? exp_pot : cot_pot;
      // All pairs: the neighbour list must not change under the probe.
      const PairList all = neighbor_pairs_brute_force(x, kInfinity);
      record(checks[1 + kk], grad_G(x, pot, all),
             fd_gradient([&](const Configuration& c) { return repelling_G(c, pot, all); }, x, h));
    }
    record(checks[3], grad_Fhat(x, inst.targets),
           fd_gradient([&](const Configuration& c) { return target_potential_Fhat(c, inst.targets); }, x, h));
  }
  return checks;
}

// ---------------------------------------------------------------------------

double PotentialModel::value(const Configuration& x) const {
  double v = 0.0;
  if (attraction) v = targets ? target_potential_Fhat(x, *targets) : shape_potential_F(x, *shape);
  if (repulsion) v += repelling_G(x, params, neighbor_pairs(x, params.interaction_radius()));
  return v;
}

VectorField PotentialModel::gradient(const Configuration& x) const {
  VectorField g(x.size());
  if (attraction) g = targets ? grad_Fhat(x, *targets) : grad_F(x, *shape);
  if (repulsion) {
    const VectorField gg = grad_G(x, params, neighbor_pairs(x, params.interaction_radius()));
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gg[i];
  }
  return g;
}

VectorField PotentialModel::gradient_on_piece(const Configuration& x,
                                              const Configuration& anchor) const {
  if (targets || !attraction) return gradient(x);
  const double scale = 2.0 / static_cast<double>(x.size());
  VectorField g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    g[i] = scale * (x[i] - shape->nearest_point(anchor[i]).point);
  if (repulsion) {
    const VectorField gg = grad_G(x, params, neighbor_pairs(x, params.interaction_radius()));
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gg[i];
  }
  return g;
}

ConfigurationSampler ConfigurationSampler::uniform(std::size_t count, const PotentialParams& pot,
                                                   double domain_M, double min_separation) {
  return {[=](RngStream& rng) {
    return initial_configuration(InitMode::Random, count, pot, domain_M, rng, min_separation);
  }};
}

ConfigurationSampler ConfigurationSampler::from_configurations(std::vector<Configuration> configs) {
  if (configs.empty()) throw std::invalid_argument("no configurations to sample from");
  return {[configs = std::move(configs)](RngStream& rng) {
    const auto k = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(configs.size()));
    return configs[std::min(k, configs.size() - 1)];
  }};
}

namespace {

double field_distance(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += squared_norm(a[i] - b[i]);
  return std::sqrt(s);
}

double config_distance(const Configuration& a, const Configuration& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += squared_distance(a[i], b[i]);
  return std::sqrt(s);
}

}  // namespace

LipschitzEstimate estimate_lipschitz(const PotentialModel& model,
                                     const ConfigurationSampler& sampler, std::size_t n_samples,
                                     RngStream& rng, double perturbation) {
  if (!(perturbation > 0.0)) throw std::invalid_argument("perturbation must be positive");
  LipschitzEstimate est;
  auto consider = [&](const Configuration& a, const Configuration& b, const VectorField& ga,
                      const VectorField& gb) {
    const double dx = config_distance(a, b);
    if (dx == 0.0) return;
    ++est.sample_count;
    const double ratio = field_distance(ga, gb) / dx;
    if (ratio > est.max_ratio) {
      est.max_ratio = ratio;
      est.max_ratio_first = a;
      est.max_ratio_second = b;
    }
  };

  for (std::size_t k = 0; k < n_samples; ++k) {
    const Configuration x = sampler.draw(rng);
    const VectorField gx = model.gradient(x);

    // Nearby pair on x's quadratic piece.
    const std::uint64_t c = rng.next_counter();
    std::vector<Vec2> z(x.positions().begin(), x.positions().end());
    std::vector<Vec2> u(z.size());
    double un = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      u[i] = rng.normal2(c, i);
      un += squared_norm(u[i]);
    }
    un = std::sqrt(un);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = z[i] + (perturbation / un) * u[i];
    const Configuration zc(std::move(z));
    consider(x, zc, model.gradient_on_piece(x, x), model.gradient_on_piece(zc, x));

    const Configuration y = sampler.draw(rng);
    consider(x, y, gx, model.gradient(y));
  }
  est.L_hat = kLipschitzSafetyFactor * est.max_ratio;
  return est;
}

// ---------------------------------------------------------------------------

const char* to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::Pass: return "PASS";
    case CertificateStatus::Fail: return "FAIL";
    case CertificateStatus::PreconditionNotMet: return "PRECONDITION_NOT_MET";
  }
  return "?";
}

CollisionReport collision_certificate(const RunRecord& record, const PotentialParams& pot) {
  CollisionReport rep;
  rep.barrier_level = barrier_level_Em(pot);
  rep.threshold = pot.r;
  if (record.rows.empty()) throw std::invalid_argument("run record has no rows");
  rep.initial_energy = record.rows.front().psi;
  if (record.initial.size() < 2 && record.initial.size() != 0) return rep;

  for (const auto& row : record.rows) {
    if (row.phase == Phase::VirtualDiffusion) continue;
    ++rep.rows_checked;
    if (row.min_distance < rep.min_distance) rep.min_distance = row.min_distance;
    if (!(row.min_distance >= pot.r) && !rep.violating_iteration) {
      rep.violating_iteration = row.iteration;
      rep.violating_cycle = row.cycle;
    }
  }
  if (rep.violating_iteration)
    rep.status = CertificateStatus::Fail;
  else if (!(rep.initial_energy < rep.barrier_level))
    rep.status = CertificateStatus::PreconditionNotMet;
  return rep;
}

DescentReport descent_check(const RunRecord& record, double tolerance) {
  DescentReport rep;
  const RecordRow* prev = nullptr;
  for (const auto& row : record.rows) {
    if (row.phase == Phase::VirtualDiffusion) continue;
    if (prev && row.phase == Phase::DescendToShape) {
      ++rep.steps_checked;
      const double inc = row.psi - prev->psi;
      if (inc > tolerance) {
        ++rep.violations;
        rep.worst_increase = std::max(rep.worst_increase, inc);
        if (!rep.first_violation) rep.first_violation = row.iteration;
      }
    }
    prev = &row;
  }
  return rep;
}

bool x_opt_monotone(const RunRecord& record) {
  for (std::size_t k = 1; k < record.x_opt_by_cycle.size(); ++k)
    if (record.x_opt_by_cycle[k] > record.x_opt_by_cycle[k - 1]) return false;
  return true;
}

// ---------------------------------------------------------------------------

GibbsCheck gibbs_check(const Shape& shape, const GibbsCheckParams& params, RngStream& rng) {
  return gibbs_check([&shape](const Vec2& x) { return shape.mu(x); },
                     [&shape](const Vec2& x) { return shape.grad_mu(x); }, shape.points().front(), params,
                     rng);
}

GibbsCheck gibbs_check(const std::function<double(const Vec2&)>& psi,
                       const std::function<Vec2(const Vec2&)>& grad, const Vec2& start,
                       const GibbsCheckParams& params, RngStream& rng) {
  if (!(params.sigma > 0.0)) throw std::invalid_argument("gibbs check needs sigma > 0");
  if (params.resolution == 0 || params.n_steps < 1 || params.burn_in < 0)
    throw std::invalid_argument("gibbs check needs a grid and a positive step count");
  const std::size_t n = params.resolution;
  const double M = params.domain_M;
  const double cell = 2.0 * M / static_cast<double>(n);

  GibbsCheck out;
  out.resolution = n;
  out.domain_M = M;
  out.empirical_mass.assign(n * n, 0.0);
  out.gibbs_mass.assign(n * n, 0.0);

  auto cell_of = [&](double c) {
    const auto k = static_cast<std::int64_t>(std::floor((c + M) / cell));
    return static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(n) - 1));
  };

  const StepParams step{params.dt, params.sigma, M};
  Configuration x(std::vector<Vec2>{start});
  VectorField g(1);
  std::int64_t kept = 0;
  for (std::int64_t s = 0; s < params.burn_in + params.n_steps; ++s) {
    g[0] = grad(x[0]);
    x = euler_maruyama_step(x, g, step, rng);
    if (s < params.burn_in) continue;
    out.empirical_mass[cell_of(x[0].y) * n + cell_of(x[0].x)] += 1.0;
    ++kept;
  }
  for (double& m : out.empirical_mass) m /= static_cast<double>(kept);

  const double inv_temp = 2.0 / (params.sigma * params.sigma);
  double z = 0.0;
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      const Vec2 c{-M + (static_cast<double>(ix) + 0.5) * cell, -M + (static_cast<double>(iy) + 0.5) * cell};
      const double w = std::exp(-inv_temp * psi(c));
      out.gibbs_mass[iy * n + ix] = w;
      z += w;
    }
  }
  for (double& m : out.gibbs_mass) m /= z;

  double tv = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) {
    tv += std::abs(out.empirical_mass[k] - out.gibbs_mass[k]);
    const bool left = (k % n) < n / 2;
    (left ? out.empirical_left : out.empirical_right) += out.empirical_mass[k];
    (left ? out.gibbs_left : out.gibbs_right) += out.gibbs_mass[k];
  }
  out.tv_distance = 0.5 * tv;
  return out;
}

// ---------------------------------------------------------------------------

RunMetrics configuration_metrics(const Configuration& config, const Shape& shape,
                                 const PotentialParams& pot, double epsilon) {
  RunMetrics m;
  const PairList pairs = neighbor_pairs(config, pot.interaction_radius());
  m.shape_part = shape_potential_F(config, shape);
  m.repel_part = repelling_G(config, pot, pairs);
  m.psi = m.shape_part + m.repel_part;

  const double n = static_cast<double>(config.size());
  std::size_t on = 0;
  for (const auto& p : config)
    if (shape.mu(p) < epsilon / n) ++on;
  m.on_shape_fraction = static_cast<double>(on) / n;

  if (config.size() >= 2) {
    std::vector<double> nn(config.size(), kInfinity);
    for (std::size_t i = 0; i < config.size(); ++i)
      for (std::size_t j = i + 1; j < config.size(); ++j) {
        const double d = distance(config[i], config[j]);
        nn[i] = std::min(nn[i], d);
        nn[j] = std::min(nn[j], d);
      }
    const double mean = std::accumulate(nn.begin(), nn.end(), 0.0) / n;
    double var = 0.0;
    for (double d : nn) var += (d - mean) * (d - mean);
    var /= n;
    m.nn_mean = mean;
    m.nn_cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  }
  return m;
}

RunMetrics run_metrics(const RunRecord& record, const Shape& shape, const PotentialParams& pot,
                       double epsilon) {
  RunMetrics m = configuration_metrics(record.x_opt, shape, pot, epsilon);
  m.iterations = record.physical_iterations;
  m.cycles = record.cycles;
  return m;
}

MetricsDelta compare_metrics(const RunMetrics& first, const RunMetrics& second) {
  return {first.psi - second.psi, first.shape_part - second.shape_part,
          first.repel_part - second.repel_part, first.on_shape_fraction - second.on_shape_fraction,
          first.nn_cv - second.nn_cv};
}

}  // namespace otplan
