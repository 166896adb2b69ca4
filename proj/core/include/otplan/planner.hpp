#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otplan/configuration.hpp"
#include "otplan/dynamics.hpp"
#include "otplan/potentials.hpp"
#include "otplan/shape.hpp"

namespace otplan {

struct PlannerParams {
  double epsilon = 0.02;        // stop once Psi(X_opt) <= epsilon
  double tau = 1e-5;            // per-robot displacement tolerance
  double dt = 0.01;
  double alpha = 0.1;           // diffusion scale: sigma = alpha d
  double beta = 10.0;           // duration scale: V = beta t
  std::int64_t s_max = 1000;    // step-3 iteration cap
  std::int64_t step4_cap = 10000;
  double domain_M = 6.0;
  std::int64_t outer_cap = 100; // max diffusion cycles
  std::int64_t gd_cap = 1100000;  // plain gradient descent iteration cap
  std::uint64_t seed = 1;
  std::int64_t snapshot_stride = 0;  // 0: phase boundaries only
  bool record_virtual = true;        // keep per-step rows of the virtual diffusion

  /// Table-1 values for a given r: dt = 0.1 r, alpha = r, beta = 10, M = 6.
  /// epsilon is set from the shape's sampling resolution h as 2 h^2.
  static PlannerParams table1(double r, const Shape& shape);

  void validate() const;
  StepParams step(double sigma = 0.0) const { return {dt, sigma, domain_M}; }
};

double default_epsilon(const Shape& shape);

enum class Phase { Initial, VirtualDiffusion, DescendToTargets, DescendToShape };
const char* to_string(Phase phase);
Phase phase_from_string(const std::string& name);

enum class RunStatus { ConvergedEpsilon, OuterCapReached, DisplacementBelowTau, IterationCapReached };
const char* to_string(RunStatus status);

/// Sampled diffusion episode for one cycle.
struct IDSchedule {
  std::int64_t cycle = 0;
  double sigma = 0.0;     // alpha d, d ~ U(0, 1)
  double duration = 0.0;  // beta t, t ~ U(0, 1)

  std::int64_t steps(double dt) const;
};

IDSchedule sample_schedule(RngStream& rng, double alpha, double beta, std::int64_t cycle);

struct RecordRow {
  std::int64_t iteration = 0;  // physical iteration; virtual step index for VirtualDiffusion
  std::int64_t cycle = 0;
  Phase phase = Phase::Initial;
  double psi = 0.0;        // F + G
  double shape_part = 0.0; // F
  double repel_part = 0.0; // G
  double objective = 0.0;  // the flow's own objective: F-hat + G in step 3, else Psi
  double min_distance = 0.0;
};

struct Snapshot {
  std::int64_t iteration = 0;
  std::int64_t cycle = 0;
  Phase phase = Phase::Initial;
  Configuration config;
};

struct RunRecord {
  std::vector<RecordRow> rows;
  std::vector<Snapshot> snapshots;          // physical path
  std::vector<Snapshot> virtual_snapshots;  // diffusion start and end per cycle
  Configuration initial;
  Configuration final_config;
  Configuration x_opt;
  double x_opt_energy = kInfinity;
  std::vector<double> x_opt_by_cycle;       // incumbent energy after each cycle
  std::vector<IDSchedule> schedules;
  RunStatus status = RunStatus::OuterCapReached;
  std::int64_t cycles = 0;
  std::int64_t aborted_cycles = 0;
  std::int64_t physical_iterations = 0;
  std::int64_t step4_cap_hits = 0;

  /// Rows of the physical path only.
  std::vector<RecordRow> physical_rows() const;
};

/// Per-state evaluation reused by every phase.
struct Evaluation {
  PairList pairs;
  double shape_part = 0.0;
  double repel_part = 0.0;
  double min_distance = kInfinity;
  double objective = 0.0;  // F-hat + G when targets are given, else F + G
  VectorField grad;        // gradient of the objective

  double psi() const { return shape_part + repel_part; }
};

/// Evaluates F, G and min distance; the gradient is that of F-hat + G when
/// `targets` is given, else of F + G. `with_gradient` false skips it.
Evaluation evaluate(const Configuration& config, const Shape& shape, const PotentialParams& pot,
                    const TargetSet* targets = nullptr, bool with_gradient = true);

/// Step 2: Euler-Maruyama on F + G from `start` for floor(V/dt) steps.
/// Throws InfeasibleGradient if a pair reaches the singular radius.
TargetSet virtual_diffusion(const Configuration& start, const Shape& shape,
                            const PotentialParams& pot, const IDSchedule& schedule,
                            const PlannerParams& params, RngStream& rng,
                            std::vector<RecordRow>* rows = nullptr);

/// Step 3: gradient descent on F-hat + G until max displacement < tau or
/// s_max iterations. `iteration` is the running physical counter.
Configuration descend_to_targets(const Configuration& start, const TargetSet& targets,
                                 const Shape& shape, const PotentialParams& pot,
                                 const PlannerParams& params, RunRecord& record,
                                 std::int64_t& iteration, std::int64_t cycle);

/// Step 4: gradient descent on F + G until max displacement < tau or
/// step4_cap iterations, updating record.x_opt on strict improvement.
Configuration descend_to_shape(const Configuration& start, const Shape& shape,
                               const PotentialParams& pot, const PlannerParams& params,
                               RunRecord& record, std::int64_t& iteration, std::int64_t cycle,
                               std::int64_t cap);

/// Intermittent-diffusion planner (steps 1-5).
RunRecord plan_id(const Configuration& initial, const Shape& shape, const PotentialParams& pot,
                  const PlannerParams& params);

/// Plain gradient descent on F + G until tau or gd_cap.
RunRecord plan_gd(const Configuration& initial, const Shape& shape, const PotentialParams& pot,
                  const PlannerParams& params);

// Initial configurations. Rejection sampling keeps every pair farther apart
// than `min_separation` (default: the kernel's barrier distance). Throws
// std::runtime_error if the robots cannot be placed.
enum class InitMode { Corner, Random };
const char* to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& name);

Configuration initial_configuration(InitMode mode, std::size_t count, const PotentialParams& pot,
                                    double domain_M, RngStream& rng,
                                    std::optional<double> min_separation = std::nullopt);

}  // namespace otplan
