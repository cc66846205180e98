#pragma once

#include <cstdint>
#include <functional>

#include "dgles/physics.hpp"
#include "dgles/solver.hpp"

namespace dgles {

/// Initial conditions in solver units (rho_inf = U_inf = 1).
namespace cases {

/// Free stream with velocity `v` and the reference pressure.
State uniform(const GasModel& gas, const Vec3& v = {1.0, 0.0, 0.0});

/// Taylor-Green vortex on [0, 2 pi]^3 with background pressure p0 = 1/(gamma M^2).
State taylor_green(const Vec3& x, const GasModel& gas);

/// rho = 1 + amplitude sin(k (x - v t)), uniform v along x and pressure p0.
State density_wave(const Vec3& x, double t, const GasModel& gas, double amplitude = 0.1,
                   double velocity = 1.0, double wavenumber = 1.0);

/// Isentropic vortex of strength beta centred at c, advected by v_inf.
State isentropic_vortex(const Vec3& x, const GasModel& gas, const Vec3& center,
                        double beta = 0.5, const Vec3& v_inf = {1.0, 0.0, 0.0});

/// Steady laminar Couette profile u = U y / h.
State couette(const Vec3& x, const GasModel& gas, double wall_speed, double height);

/// Fills q with `base` plus uniformly distributed relative perturbations of
/// the primitive variables, drawn from a seeded generator in node order.
void seeded_perturbation(const Solver& solver, SolutionField& q,
                         const std::function<State(const Vec3&)>& base, double amplitude,
                         std::uint64_t seed);

}  // namespace cases
}  // namespace dgles
