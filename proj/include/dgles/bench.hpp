#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dgles/solver.hpp"

namespace dgles {

struct RampOptions {
  double start = 0.5;
  double increment = 0.1;
  int probe_steps = 100;
  int warmup_steps = 5;
  int max_rungs = 100;

  /// ConfigError for non-positive start, increment or probe_steps.
  void validate() const;
};

struct RampRung {
  double cfl = 0.0;
  bool stable = false;
  double dt = 0.0;             // mean step over the probe
  double sec_per_iter = 0.0;   // timed steps only
};

struct RampReport {
  Formulation formulation = Formulation::ImplicitLES_KG_GaussLobatto;
  int order = 0;
  std::uint64_t mesh_hash = 0;
  double ctu = 1.0;
  std::vector<RampRung> rungs;
  std::optional<double> last_stable;
  std::optional<double> first_unstable;
  double dt_max = 0.0;          // dt at the last stable CFL
  double sec_per_iter = 0.0;    // mean over stable rungs
  double hours_per_ctu = 0.0;   // (ctu / dt_max) sec_per_iter / 3600

  std::vector<double> ladder() const;
};

/// Runs probe_steps from q0 at CFL = start, start + increment, ... until
/// the first divergence. Timing excludes the warm-up steps.
RampReport cfl_ramp(const Solver& solver, const SolutionField& q0, const RampOptions& options,
                    double ctu = 1.0);

struct CostRow {
  Formulation formulation;
  double cfl_max = 0.0;
  double dt_max = 0.0;
  double sec_per_iter = 0.0;
  double hours_per_ctu = 0.0;
  // Relative to the explicit LES row.
  double dt_ratio = 1.0;
  double iter_ratio = 1.0;
  double ctu_ratio = 1.0;
};

struct CostTable {
  std::vector<CostRow> rows;
};

/// Needs a stable report for both formulations on the same mesh and order;
/// otherwise ComparisonError.
CostTable cost_report(std::span<const RampReport> reports);

}  // namespace dgles
