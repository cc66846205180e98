#include "dgles/physics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dgles/error.hpp"

namespace dgles {

GasModel GasModel::from_references(double mach, double reynolds, double gamma,
                                   double prandtl) {
  GasModel g;
  g.gamma = gamma;
  g.prandtl = prandtl;
  g.mach = mach;
  g.reynolds = reynolds;
  g.mu = reynolds > 0.0 ? 1.0 / reynolds : 0.0;
  g.validate();
  return g;
}

void GasModel::validate() const {
  if (!(gamma > 1.0)) throw ConfigError("gamma must exceed 1");
  if (!(prandtl > 0.0)) throw ConfigError("Prandtl number must be positive");
  if (!(turbulent_prandtl > 0.0)) throw ConfigError("turbulent Prandtl number must be positive");
  if (!(mach > 0.0)) throw ConfigError("reference Mach number must be positive");
  if (!(mu >= 0.0)) throw ConfigError("dynamic viscosity must be non-negative");
}

namespace {
[[noreturn]] void invalid_state(double rho, double p) {
  std::ostringstream os;
  os << "invalid state: density " << rho << ", pressure " << p;
  throw StateError(os.str(), rho, p);
}
}  // namespace

PrimitiveState to_primitive(const State& u, const GasModel& gas) {
  const double rho = u[0];
  if (!(rho > 0.0) || !std::isfinite(rho)) invalid_state(rho, NAN);
  const Vec3 v{u[1] / rho, u[2] / rho, u[3] / rho};
  const double p = (gas.gamma - 1.0) * (u[4] - 0.5 * rho * dot(v, v));
  if (!(p > 0.0) || !std::isfinite(p)) invalid_state(rho, p);
  PrimitiveState s;
  s.rho = rho;
  s.v = v;
  s.p = p;
  s.T = p / rho;
  s.a = std::sqrt(gas.gamma * p / rho);
  s.H = (u[4] + p) / rho;
  return s;
}

State from_primitive(double rho, const Vec3& v, double p, const GasModel& gas) {
  return {rho, rho * v[0], rho * v[1], rho * v[2],
          p / (gas.gamma - 1.0) + 0.5 * rho * dot(v, v)};
}

double pressure(const State& u, const GasModel& gas) {
  return (gas.gamma - 1.0) * (u[4] - 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0]);
}

Fluxes euler_flux(const State& u, const GasModel& gas) {
  const PrimitiveState s = to_primitive(u, gas);
  Fluxes f;
  for (int d = 0; d < 3; ++d) {
    const double vd = s.v[d];
    f[d][0] = u[0] * vd;
    f[d][1] = u[1] * vd;
    f[d][2] = u[2] * vd;
    f[d][3] = u[3] * vd;
    f[d][1 + d] += s.p;
    f[d][4] = s.rho * vd * s.H;
  }
  return f;
}

double vreman_mu_t(const Mat3& alpha, double rho, double delta, double c_v) {
  double aa = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) aa += alpha[i][j] * alpha[i][j];
  if (aa <= kVremanDenominatorGuard) return 0.0;
  // Principal 2x2 minors of beta = D^2 alpha^T alpha via Cauchy-Binet: a sum of
  // squared 2x2 minors of alpha. Non-negative by construction and exactly zero
  // when alpha has a single non-zero row.
  double minors = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      for (int m = 0; m < 3; ++m)
        for (int n = m + 1; n < 3; ++n) {
          const double d = alpha[m][i] * alpha[n][j] - alpha[m][j] * alpha[n][i];
          minors += d * d;
        }
  const double d2 = delta * delta;
  const double b = d2 * d2 * minors;
  return c_v * rho * std::sqrt(b / aa);
}

double filter_width(double element_volume, int order) {
  return std::cbrt(element_volume) / (order + 1.0);
}

Fluxes viscous_flux(const State& u, const VelocityGradient& grad, double mu_t,
                    const GasModel& gas) {
  const double rho = u[0];
  const Vec3 v{u[1] / rho, u[2] / rho, u[3] / rho};
  const double mu = gas.mu + mu_t;
  const double k = gas.kappa() + gas.kappa_turbulent(mu_t);
  const auto& a = grad.alpha;
  const double div = a[0][0] + a[1][1] + a[2][2];
  Mat3 tau;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      tau[i][j] = mu * (a[i][j] + a[j][i]) - (i == j ? 2.0 / 3.0 * mu * div : 0.0);
  Fluxes f;
  for (int d = 0; d < 3; ++d) {
    f[d][0] = 0.0;
    f[d][1] = tau[d][0];
    f[d][2] = tau[d][1];
    f[d][3] = tau[d][2];
    f[d][4] = v[0] * tau[d][0] + v[1] * tau[d][1] + v[2] * tau[d][2] + k * grad.grad_t[d];
  }
  return f;
}

namespace kernels {

NodeState node_state(const State& u, double gamma) {
  NodeState s;
  s.rho = u[0];
  const double inv = 1.0 / u[0];
  s.v = {u[1] * inv, u[2] * inv, u[3] * inv};
  s.p = (gamma - 1.0) * (u[4] - 0.5 * u[0] * dot(s.v, s.v));
  s.e = u[4] * inv;
  s.a = std::sqrt(gamma * s.p * inv);
  return s;
}

void kg_flux(const NodeState& l, const NodeState& r, const Vec3& dir, double* out) {
  const double rho = 0.5 * (l.rho + r.rho);
  const Vec3 v{0.5 * (l.v[0] + r.v[0]), 0.5 * (l.v[1] + r.v[1]), 0.5 * (l.v[2] + r.v[2])};
  const double p = 0.5 * (l.p + r.p);
  const double e = 0.5 * (l.e + r.e);
  const double vn = dot(v, dir);
  const double mass = rho * vn;
  out[0] = mass;
  out[1] = mass * v[0] + p * dir[0];
  out[2] = mass * v[1] + p * dir[1];
  out[3] = mass * v[2] + p * dir[2];
  out[4] = mass * e + p * vn;
}

void euler_flux_dir(const State& u, const NodeState& s, const Vec3& dir, double* out) {
  const double vn = dot(s.v, dir);
  out[0] = u[0] * vn;
  out[1] = u[1] * vn + s.p * dir[0];
  out[2] = u[2] * vn + s.p * dir[1];
  out[3] = u[3] * vn + s.p * dir[2];
  out[4] = (u[4] + s.p) * vn;
}

}  // namespace kernels

State kg_two_point_flux(const State& ul, const State& ur, const Vec3& direction,
                        const GasModel& gas) {
  to_primitive(ul, gas);
  to_primitive(ur, gas);
  State f;
  kernels::kg_flux(kernels::node_state(ul, gas.gamma), kernels::node_state(ur, gas.gamma),
                   direction, f.data());
  return f;
}

std::string_view to_string(InterfaceScheme scheme) {
  switch (scheme) {
    case InterfaceScheme::CentralKG: return "CentralKG";
    case InterfaceScheme::KGLaxFriedrichs: return "KGLaxFriedrichs";
    case InterfaceScheme::Upwind: return "Upwind";
  }
  return "?";
}

InterfaceScheme parse_interface_scheme(std::string_view name) {
  for (auto s : {InterfaceScheme::CentralKG, InterfaceScheme::KGLaxFriedrichs,
                 InterfaceScheme::Upwind})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown interface scheme '" + std::string(name) +
                    "'; expected CentralKG, KGLaxFriedrichs or Upwind");
}

State interface_flux(const State& ul, const State& ur, const Vec3& normal,
                     const GasModel& gas, InterfaceScheme scheme) {
  to_primitive(ul, gas);
  to_primitive(ur, gas);
  const auto l = kernels::node_state(ul, gas.gamma);
  const auto r = kernels::node_state(ur, gas.gamma);
  State f;
  if (scheme == InterfaceScheme::Upwind) {
    State fl, fr;
    kernels::euler_flux_dir(ul, l, normal, fl.data());
    kernels::euler_flux_dir(ur, r, normal, fr.data());
    for (int v = 0; v < kNumVars; ++v) f[v] = 0.5 * (fl[v] + fr[v]);
  } else {
    kernels::kg_flux(l, r, normal, f.data());
  }
  if (scheme != InterfaceScheme::CentralKG) {
    const double lambda = std::max(std::abs(dot(l.v, normal)) + l.a,
                                   std::abs(dot(r.v, normal)) + r.a);
    for (int v = 0; v < kNumVars; ++v) f[v] -= 0.5 * lambda * (ur[v] - ul[v]);
  }
  return f;
}

}  // namespace dgles
