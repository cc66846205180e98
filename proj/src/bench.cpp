#include "dgles/bench.hpp"

#include <cmath>

#include "dgles/error.hpp"

namespace dgles {

void RampOptions::validate() const {
  if (!(start > 0.0)) throw ConfigError("ramp start CFL must be positive");
  if (!(increment > 0.0)) throw ConfigError("ramp increment must be positive");
  if (probe_steps < 1) throw ConfigError("probe_steps must be at least 1");
  if (warmup_steps < 0 || warmup_steps >= probe_steps)
    throw ConfigError("warmup_steps must lie in [0, probe_steps)");
  if (max_rungs < 1) throw ConfigError("max_rungs must be at least 1");
}

std::vector<double> RampReport::ladder() const {
  std::vector<double> out;
  for (const auto& r : rungs) out.push_back(r.cfl);
  return out;
}

RampReport cfl_ramp(const Solver& solver, const SolutionField& q0, const RampOptions& options,
                    double ctu) {
  options.validate();
  RampReport rep;
  rep.formulation = solver.scheme().formulation;
  rep.order = solver.basis().order();
  rep.mesh_hash = solver.mesh().hash();
  rep.ctu = ctu;
  double timed_sum = 0.0;
  int timed_rungs = 0;
  for (int k = 0; k < options.max_rungs; ++k) {
    // Rounded to avoid accumulating 0.1 increments.
    const double cfl = std::round((options.start + k * options.increment) * 1e10) / 1e10;
    RampRung rung;
    rung.cfl = cfl;
    SolutionField q = q0;
    try {
      RunControl warm;
      warm.cfl = cfl;
      warm.n_steps = options.warmup_steps;
      const RunReport w = solver.run(q, warm);
      RunControl timed;
      timed.cfl = cfl;
      timed.n_steps = options.probe_steps - options.warmup_steps;
      timed.start_time = w.final_time;
      timed.start_step = w.final_step;
      timed.ctu = ctu;
      const RunReport t = solver.run(q, timed);
      solver.check_state(q);
      rung.stable = true;
      rung.dt = (w.mean_dt * w.iterations + t.mean_dt * t.iterations) /
                double(w.iterations + t.iterations);
      rung.sec_per_iter = t.seconds_per_iteration;
    } catch (const DivergenceError&) {
      rung.stable = false;
    } catch (const StateError&) {
      rung.stable = false;
    }
    rep.rungs.push_back(rung);
    if (!rung.stable) {
      rep.first_unstable = cfl;
      break;
    }
    rep.last_stable = cfl;
    rep.dt_max = rung.dt;
    timed_sum += rung.sec_per_iter;
    ++timed_rungs;
  }
  if (timed_rungs > 0) {
    rep.sec_per_iter = timed_sum / timed_rungs;
    rep.hours_per_ctu = ctu / rep.dt_max * rep.sec_per_iter / 3600.0;
  }
  return rep;
}

CostTable cost_report(std::span<const RampReport> reports) {
  const RampReport* e = nullptr;
  const RampReport* i = nullptr;
  for (const auto& r : reports) {
    if (r.formulation == Formulation::ExplicitLES_Vreman_Gauss) e = &r;
    if (r.formulation == Formulation::ImplicitLES_KG_GaussLobatto) i = &r;
  }
  if (!e || !i)
    throw ComparisonError(std::string("cost comparison needs both formulations; missing ") +
                          std::string(to_string(!e ? Formulation::ExplicitLES_Vreman_Gauss
                                                   : Formulation::ImplicitLES_KG_GaussLobatto)));
  if (e->mesh_hash != i->mesh_hash || e->order != i->order)
    throw ComparisonError("cost comparison requires the same mesh and order");
  if (!e->last_stable || !i->last_stable)
    throw ComparisonError("cost comparison requires a stable CFL for both formulations");
  CostTable table;
  for (const RampReport* r : {e, i}) {
    CostRow row{r->formulation};
    row.cfl_max = *r->last_stable;
    row.dt_max = r->dt_max;
    row.sec_per_iter = r->sec_per_iter;
    row.hours_per_ctu = r->hours_per_ctu;
    row.dt_ratio = r->dt_max / e->dt_max;
    row.iter_ratio = r->sec_per_iter / e->sec_per_iter;
    row.ctu_ratio = r->hours_per_ctu / e->hours_per_ctu;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace dgles
