#pragma once

#include <string_view>

#include "dgles/types.hpp"

namespace dgles {

/// Calorically perfect gas in solver units: rho_inf = U_inf = 1, gas constant
/// R = 1 (so T = p / rho), constant dynamic viscosity mu = 1 / Re.
struct GasModel {
  double gamma = 1.4;
  double prandtl = 0.72;
  double turbulent_prandtl = 0.9;
  double mach = 0.1;
  double reynolds = 0.0;  // 0 means inviscid
  double mu = 0.0;

  static GasModel from_references(double mach, double reynolds, double gamma = 1.4,
                                  double prandtl = 0.72);

  double cp() const { return gamma / (gamma - 1.0); }
  double kappa() const { return mu * cp() / prandtl; }
  double kappa_turbulent(double mu_t) const { return mu_t * cp() / turbulent_prandtl; }
  /// Free-stream pressure for unit density and velocity at the reference Mach.
  double reference_pressure() const { return 1.0 / (gamma * mach * mach); }
  void validate() const;
};

struct PrimitiveState {
  double rho;
  Vec3 v;
  double p;
  double T;
  double a;
  double H;
};

/// Throws StateError on non-positive density or pressure.
PrimitiveState to_primitive(const State& u, const GasModel& gas);
State from_primitive(double rho, const Vec3& v, double p, const GasModel& gas);
double pressure(const State& u, const GasModel& gas);

/// alpha[i][j] = d v_j / d x_i, grad_t[i] = dT / dx_i.
struct VelocityGradient {
  Mat3 alpha{};
  Vec3 grad_t{};
};

/// Cartesian flux vectors (F, G, H).
using Fluxes = std::array<State, 3>;

Fluxes euler_flux(const State& u, const GasModel& gas);

inline constexpr double kVremanConstant = 0.07;
inline constexpr double kVremanDenominatorGuard = 1e-30;

/// Vreman eddy viscosity; zero when alpha_ij alpha_ij <= 1e-30.
double vreman_mu_t(const Mat3& alpha, double rho, double delta,
                   double c_v = kVremanConstant);

/// Delta = V^(1/3) / (N + 1).
double filter_width(double element_volume, int order);

Fluxes viscous_flux(const State& u, const VelocityGradient& grad, double mu_t,
                    const GasModel& gas);

/// Kennedy-Gruber two-point flux along a unit direction.
State kg_two_point_flux(const State& ul, const State& ur, const Vec3& direction,
                        const GasModel& gas);

enum class InterfaceScheme { CentralKG, KGLaxFriedrichs, Upwind };
std::string_view to_string(InterfaceScheme scheme);
InterfaceScheme parse_interface_scheme(std::string_view name);

State interface_flux(const State& ul, const State& ur, const Vec3& normal,
                     const GasModel& gas, InterfaceScheme scheme);

// Allocation-free building blocks used by the solver kernels.
namespace kernels {

struct NodeState {
  double rho;
  Vec3 v;
  double p;
  double e;  // rho E / rho
  double a;
};

NodeState node_state(const State& u, double gamma);
/// Kennedy-Gruber flux, linear in the (not necessarily unit) direction.
void kg_flux(const NodeState& l, const NodeState& r, const Vec3& dir, double* out);
/// Pointwise Euler flux along a direction vector.
void euler_flux_dir(const State& u, const NodeState& s, const Vec3& dir, double* out);

}  // namespace kernels

}  // namespace dgles
