#include "dgles/cases.hpp"

#include <cmath>
#include <random>

namespace dgles::cases {

State uniform(const GasModel& gas, const Vec3& v) {
  return from_primitive(1.0, v, gas.reference_pressure(), gas);
}

State taylor_green(const Vec3& x, const GasModel& gas) {
  const double p0 = gas.reference_pressure();
  const Vec3 v{std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]),
               -std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]), 0.0};
  const double p = p0 + (std::cos(2 * x[0]) + std::cos(2 * x[1])) * (std::cos(2 * x[2]) + 2.0) / 16.0;
  return from_primitive(p / p0, v, p, gas);
}

State density_wave(const Vec3& x, double t, const GasModel& gas, double amplitude,
                   double velocity, double wavenumber) {
  const double rho = 1.0 + amplitude * std::sin(wavenumber * (x[0] - velocity * t));
  return from_primitive(rho, {velocity, 0.0, 0.0}, gas.reference_pressure(), gas);
}

State isentropic_vortex(const Vec3& x, const GasModel& gas, const Vec3& center, double beta,
                        const Vec3& v_inf) {
  const double g = gas.gamma;
  const double p0 = gas.reference_pressure();
  const double t0 = p0;  // T = p / rho with rho_inf = 1
  const double dx = x[0] - center[0];
  const double dy = x[1] - center[1];
  const double r2 = dx * dx + dy * dy;
  const double f = std::exp(0.5 * (1.0 - r2));
  const double amp = beta * f / (2.0 * std::acos(-1.0));
  const Vec3 v{v_inf[0] - amp * dy, v_inf[1] + amp * dx, v_inf[2]};
  const double dT = -(g - 1.0) / (2.0 * g) * amp * amp;
  const double T = t0 + dT;
  const double rho = std::pow(T / t0, 1.0 / (g - 1.0));
  return from_primitive(rho, v, rho * T, gas);
}

State couette(const Vec3& x, const GasModel& gas, double wall_speed, double height) {
  return from_primitive(1.0, {wall_speed * x[1] / height, 0.0, 0.0}, gas.reference_pressure(),
                        gas);
}

void seeded_perturbation(const Solver& solver, SolutionField& q,
                         const std::function<State(const Vec3&)>& base, double amplitude,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const GasModel& gas = solver.scheme().gas;
  const auto& mesh = solver.mesh();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& em = mesh.metrics[e];
    for (std::size_t p = 0; p < em.x.size(); ++p) {
      const auto s = to_primitive(base(em.x[p]), gas);
      const double scale = std::max(norm(s.v), s.a);
      const double rho = s.rho * (1.0 + amplitude * dist(rng));
      const Vec3 v{s.v[0] + amplitude * scale * dist(rng), s.v[1] + amplitude * scale * dist(rng),
                   s.v[2] + amplitude * scale * dist(rng)};
      const double pr = s.p * (1.0 + amplitude * dist(rng));
      q.at(e, static_cast<int>(p)) = from_primitive(rho, v, pr, gas);
    }
  }
}

}  // namespace dgles::cases
