#include "otplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otplan {

double default_epsilon(const Shape& shape) {
  const double h = shape.sampling_resolution();
  return std::max(2.0 * h * h, 1e-12);
}

PlannerParams PlannerParams::table1(double r, const Shape& shape) {
  PlannerParams p;
  p.dt = 0.1 * r;
  p.alpha = r;
  p.beta = 10.0;
  p.domain_M = 6.0;
  p.epsilon = default_epsilon(shape);
  return p;
}

void PlannerParams::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (s_max < 1) throw std::invalid_argument("s_max must be positive");
  if (step4_cap < 1) throw std::invalid_argument("step4_cap must be positive");
  if (!(domain_M > 0.0)) throw std::invalid_argument("M must be positive");
  if (outer_cap < 1) throw std::invalid_argument("outer_cap must be positive");
  if (gd_cap < 1) throw std::invalid_argument("gd_cap must be positive");
  if (snapshot_stride < 0) throw std::invalid_argument("snapshot_stride must be non-negative");
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Initial:
      return "initial";
    case Phase::VirtualDiffusion:
      return "virtual";
    case Phase::DescendToTargets:
      return "to_targets";
    case Phase::DescendToShape:
      return "to_shape";
  }
  return "?";
}

Phase phase_from_string(const std::string& name) {
  for (Phase p : {Phase::Initial, Phase::VirtualDiffusion, Phase::DescendToTargets,
                  Phase::DescendToShape})
    if (name == to_string(p)) return p;
  throw std::invalid_argument("unknown phase '" + name + "'");
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::ConvergedEpsilon:
      return "converged_epsilon";
    case RunStatus::OuterCapReached:
      return "outer_cap_reached";
    case RunStatus::DisplacementBelowTau:
      return "displacement_below_tau";
    case RunStatus::IterationCapReached:
      return "iteration_cap_reached";
  }
  return "?";
}

std::int64_t IDSchedule::steps(double dt) const {
  return static_cast<std::int64_t>(std::floor(duration / dt));
}

IDSchedule sample_schedule(RngStream& rng, double alpha, double beta, std::int64_t cycle) {
  const double d = rng.next_uniform();
  const double t = rng.next_uniform();
  return {cycle, alpha * d, beta * t};
}

std::vector<RecordRow> RunRecord::physical_rows() const {
  std::vector<RecordRow> out;
  out.reserve(rows.size());
  for (const auto& row : rows)
    if (row.phase != Phase::VirtualDiffusion) out.push_back(row);
  return out;
}

// ---------------------------------------------------------------------------

Evaluation evaluate(const Configuration& config, const Shape& shape, const PotentialParams& pot,
                    const TargetSet* targets, bool with_gradient) {
  Evaluation ev;
  ev.pairs = neighbor_pairs(config, pot.interaction_radius());
  const std::size_t n = config.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  double mu_sum = 0.0;
  if (with_gradient) ev.grad.assign(n, Vec2{});
  for (std::size_t i = 0; i < n; ++i) {
    const NearestPoint np = shape.nearest_point(config[i]);
    mu_sum += np.sq_dist;
    if (with_gradient && targets == nullptr) ev.grad[i] = (2.0 * inv_n) * (config[i] - np.point);
  }
  ev.shape_part = mu_sum * inv_n;
  ev.repel_part = repelling_G(config, pot, ev.pairs);
  ev.min_distance = min_pairwise_distance(config, ev.pairs);

  if (targets != nullptr) {
    ev.objective = target_potential_Fhat(config, *targets) + ev.repel_part;
    if (with_gradient) ev.grad = grad_Fhat(config, *targets);
  } else {
    ev.objective = ev.psi();
  }
  if (with_gradient) {
    const VectorField g = grad_G(config, pot, ev.pairs);
    for (std::size_t i = 0; i < n; ++i) ev.grad[i] += g[i];
  }
  return ev;
}

namespace {

RecordRow make_row(std::int64_t iteration, std::int64_t cycle, Phase phase, const Evaluation& ev) {
  return {iteration, cycle, phase, ev.psi(), ev.shape_part, ev.repel_part, ev.objective,
          ev.min_distance};
}

void maybe_snapshot(RunRecord& record, const PlannerParams& params, std::int64_t iteration,
                    std::int64_t cycle, Phase phase, const Configuration& x) {
  if (params.snapshot_stride > 0 && iteration % params.snapshot_stride == 0)
    record.snapshots.push_back({iteration, cycle, phase, x});
}

void close_phase(RunRecord& record, const PlannerParams& params, std::int64_t iteration,
                 std::int64_t cycle, Phase phase, const Configuration& x) {
  const bool already = params.snapshot_stride > 0 && iteration % params.snapshot_stride == 0;
  if (!already) record.snapshots.push_back({iteration, cycle, phase, x});
}

}  // namespace

TargetSet virtual_diffusion(const Configuration& start, const Shape& shape,
                            const PotentialParams& pot, const IDSchedule& schedule,
                            const PlannerParams& params, RngStream& rng,
                            std::vector<RecordRow>* rows) {
  const StepParams step = params.step(schedule.sigma);
  const std::int64_t steps = schedule.steps(params.dt);
  Configuration y = start;
  Evaluation ev = evaluate(y, shape, pot);
  for (std::int64_t m = 1; m <= steps; ++m) {
    y = euler_maruyama_step(y, ev.grad, step, rng);
    ev = evaluate(y, shape, pot);
    if (rows != nullptr) rows->push_back(make_row(m, schedule.cycle, Phase::VirtualDiffusion, ev));
  }
  return {std::vector<Vec2>(y.begin(), y.end())};
}

Configuration descend_to_targets(const Configuration& start, const TargetSet& targets,
                                 const Shape& shape, const PotentialParams& pot,
                                 const PlannerParams& params, RunRecord& record,
                                 std::int64_t& iteration, std::int64_t cycle) {
  const StepParams step = params.step();
  Configuration x = start;
  Evaluation ev = evaluate(x, shape, pot, &targets);
  for (std::int64_t s = 0; s < params.s_max; ++s) {
    Configuration next = euler_step(x, ev.grad, step);
    const double moved = max_displacement(x, next);
    x = std::move(next);
    ++iteration;
    ev = evaluate(x, shape, pot, &targets);
    record.rows.push_back(make_row(iteration, cycle, Phase::DescendToTargets, ev));
    maybe_snapshot(record, params, iteration, cycle, Phase::DescendToTargets, x);
    if (moved < params.tau) break;
  }
  close_phase(record, params, iteration, cycle, Phase::DescendToTargets, x);
  return x;
}

Configuration descend_to_shape(const Configuration& start, const Shape& shape,
                               const PotentialParams& pot, const PlannerParams& params,
                               RunRecord& record, std::int64_t& iteration, std::int64_t cycle,
                               std::int64_t cap) {
  const StepParams step = params.step();
  Configuration x = start;
  Evaluation ev = evaluate(x, shape, pot);
  bool converged = false;
  for (std::int64_t s = 0; s < cap; ++s) {
    Configuration next = euler_step(x, ev.grad, step);
    const double moved = max_displacement(x, next);
    x = std::move(next);
    ++iteration;
    ev = evaluate(x, shape, pot);
    record.rows.push_back(make_row(iteration, cycle, Phase::DescendToShape, ev));
    maybe_snapshot(record, params, iteration, cycle, Phase::DescendToShape, x);
    if (ev.psi() < record.x_opt_energy) {
      record.x_opt = x;
      record.x_opt_energy = ev.psi();
    }
    if (moved < params.tau) {
      converged = true;
      break;
    }
  }
  if (!converged) ++record.step4_cap_hits;
  close_phase(record, params, iteration, cycle, Phase::DescendToShape, x);
  return x;
}

namespace {

RunRecord start_record(const Configuration& initial, const Shape& shape,
                       const PotentialParams& pot) {
  RunRecord record;
  record.initial = initial;
  const Evaluation ev = evaluate(initial, shape, pot, nullptr, false);
  record.rows.push_back(make_row(0, 0, Phase::Initial, ev));
  record.snapshots.push_back({0, 0, Phase::Initial, initial});
  record.x_opt = initial;
  record.x_opt_energy = ev.psi();
  return record;
}

}  // namespace

RunRecord plan_id(const Configuration& initial, const Shape& shape, const PotentialParams& pot,
                  const PlannerParams& params) {
  pot.validate();
  params.validate();
  RunRecord record = start_record(initial, shape, pot);

  const RngStream root(params.seed);
  RngStream schedule_rng = root.substream(1);
  RngStream noise_rng = root.substream(2);

  Configuration x = initial;
  std::int64_t iteration = 0;
  std::int64_t cycle = 0;
  while (record.x_opt_energy > params.epsilon && cycle < params.outer_cap) {
    ++cycle;
    const IDSchedule schedule = sample_schedule(schedule_rng, params.alpha, params.beta, cycle);
    record.schedules.push_back(schedule);

    TargetSet targets;
    try {
      targets = virtual_diffusion(record.x_opt, shape, pot, schedule, params, noise_rng,
                                  params.record_virtual ? &record.rows : nullptr);
    } catch (const InfeasibleGradient&) {
      ++record.aborted_cycles;
      record.x_opt_by_cycle.push_back(record.x_opt_energy);
      continue;
    } catch (const NonFiniteGradient&) {
      ++record.aborted_cycles;
      record.x_opt_by_cycle.push_back(record.x_opt_energy);
      continue;
    }
    record.virtual_snapshots.push_back({iteration, cycle, Phase::VirtualDiffusion, record.x_opt});
    record.virtual_snapshots.push_back(
        {iteration, cycle, Phase::VirtualDiffusion, Configuration(targets.targets)});

    x = descend_to_targets(x, targets, shape, pot, params, record, iteration, cycle);
    x = descend_to_shape(x, shape, pot, params, record, iteration, cycle, params.step4_cap);
    record.x_opt_by_cycle.push_back(record.x_opt_energy);
  }

  record.cycles = cycle;
  record.physical_iterations = iteration;
  record.final_config = x;
  record.status = record.x_opt_energy <= params.epsilon ? RunStatus::ConvergedEpsilon
                                                        : RunStatus::OuterCapReached;
  return record;
}

RunRecord plan_gd(const Configuration& initial, const Shape& shape, const PotentialParams& pot,
                  const PlannerParams& params) {
  pot.validate();
  params.validate();
  RunRecord record = start_record(initial, shape, pot);
  std::int64_t iteration = 0;
  const Configuration x =
      descend_to_shape(initial, shape, pot, params, record, iteration, 0, params.gd_cap);
  record.physical_iterations = iteration;
  record.final_config = x;
  record.status = record.step4_cap_hits > 0 ? RunStatus::IterationCapReached
                                            : RunStatus::DisplacementBelowTau;
  return record;
}

// ---------------------------------------------------------------------------

const char* to_string(InitMode mode) { return mode == InitMode::Corner ? "corner" : "random"; }

InitMode init_mode_from_string(const std::string& name) {
  if (name == "corner") return InitMode::Corner;
  if (name == "random") return InitMode::Random;
  throw std::invalid_argument("unknown init mode '" + name + "' (expected corner or random)");
}

Configuration initial_configuration(InitMode mode, std::size_t count, const PotentialParams& pot,
                                    double domain_M, RngStream& rng,
                                    std::optional<double> min_separation) {
  if (count == 0) throw std::invalid_argument("robot count must be positive");
  const double sep = min_separation.value_or(pot.barrier_distance());
  const double sep2 = sep * sep;

  Vec2 lo{-domain_M, -domain_M};
  double side = 2.0 * domain_M;
  if (mode == InitMode::Corner) {
    // Box of side 2R, widened until random packing at `sep` stays feasible.
    const double packing = std::sqrt(static_cast<double>(count) * std::numbers::pi * sep2 / 4.0 / 0.35);
    side = std::min(2.0 * domain_M, std::max(2.0 * pot.interaction_radius(), packing));
  }

  std::vector<Vec2> placed;
  placed.reserve(count);
  constexpr int kAttempts = 100000;
  while (placed.size() < count) {
    bool ok = false;
    for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
      const Vec2 p{lo.x + side * rng.next_uniform(), lo.y + side * rng.next_uniform()};
      ok = std::none_of(placed.begin(), placed.end(),
                        [&](const Vec2& q) { return squared_distance(p, q) <= sep2; });
      if (ok) placed.push_back(p);
    }
    if (!ok)
      throw std::runtime_error("could not place " + std::to_string(count) +
                               " robots with the requested separation");
  }
  return Configuration(std::move(placed));
}

}  // namespace otplan
