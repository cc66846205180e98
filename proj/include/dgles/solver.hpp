#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgles/basis.hpp"
#include "dgles/mesh.hpp"
#include "dgles/physics.hpp"

namespace dgles {

enum class Formulation { ExplicitLES_Vreman_Gauss, ImplicitLES_KG_GaussLobatto };

std::string_view to_string(Formulation f);
Formulation parse_formulation(std::string_view name);
NodeKind node_kind(Formulation f);

/// Per-node gradient storage: g[4*i + j] = d w_j / d x_i with
/// w = (v1, v2, v3, T).
using NodeGradient = std::array<double, 12>;
VelocityGradient to_velocity_gradient(const NodeGradient& g);

/// Nodal conservative state plus co-located gradients and eddy viscosity.
struct SolutionField {
  int order = 0;
  std::size_t elements = 0;
  std::vector<State> u;
  std::vector<NodeGradient> grad;
  std::vector<double> mu_t;

  SolutionField() = default;
  SolutionField(std::size_t num_elements, int order);

  int nodes_per_element() const { return (order + 1) * (order + 1) * (order + 1); }
  State& at(std::size_t e, int node) { return u[e * nodes_per_element() + node]; }
  const State& at(std::size_t e, int node) const { return u[e * nodes_per_element() + node]; }
};

struct BoundaryData {
  State inflow_state{1.0, 1.0, 0.0, 0.0, 1.0};
  /// Overrides inflow_state when set (manufactured solutions).
  std::function<State(const Vec3& x, double t)> inflow_function;
  double outlet_pressure = 1.0;
  Vec3 wall_velocity{0.0, 0.0, 0.0};
};

struct SchemeConfig {
  Formulation formulation = Formulation::ImplicitLES_KG_GaussLobatto;
  InterfaceScheme interface_scheme = InterfaceScheme::KGLaxFriedrichs;
  double vreman_constant = kVremanConstant;
  GasModel gas;
  /// Keyed by mesh patch name.
  std::map<std::string, BoundaryData> boundaries;

  bool uses_vreman() const { return formulation == Formulation::ExplicitLES_Vreman_Gauss; }
  bool viscous() const { return gas.mu > 0.0 || uses_vreman(); }
  /// Throws ConfigError when the basis node family does not match the formulation.
  void check_node_kind(NodeKind kind) const;
};

/// Exterior (ghost) state for a boundary face node.
State apply_boundary_state(const State& interior, BCKind kind, const BoundaryData& data,
                           const Vec3& normal, double t, const Vec3& x,
                           const GasModel& gas);

struct ParallelOptions {
  int threads = 1;
  bool deterministic = true;
};

/// Williamson three-stage, 2N-storage Runge-Kutta.
struct RK3Scheme {
  static constexpr std::array<double, 3> a{0.0, -5.0 / 9.0, -153.0 / 128.0};
  static constexpr std::array<double, 3> b{1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0};
  static constexpr std::array<double, 3> c{0.0, 1.0 / 3.0, 3.0 / 4.0};

  /// Advances q in place; rhs(q, t, dq) fills dq; check(q, stage) may throw.
  template <class Rhs, class Check>
  static void step(std::span<double> q, double t, double dt, std::vector<double>& g,
                   std::vector<double>& dq, Rhs&& rhs, Check&& check) {
    g.assign(q.size(), 0.0);
    dq.resize(q.size());
    for (int s = 0; s < 3; ++s) {
      rhs(std::span<const double>(q), t + c[s] * dt, std::span<double>(dq));
      for (std::size_t i = 0; i < q.size(); ++i) {
        g[i] = a[s] * g[i] + dt * dq[i];
        q[i] += b[s] * g[i];
      }
      check(s);
    }
  }
};

struct Totals {
  State conserved{};  // integral of J w u
  State magnitude{};  // integral of J w |u| (scale for relative drift)
  double kinetic_energy = 0.0;
  double volume = 0.0;
};

struct RunControl {
  std::optional<double> t_end;
  std::optional<long> n_steps;
  std::optional<double> fixed_dt;
  double cfl = 0.5;
  double start_time = 0.0;
  long start_step = 0;
  /// Convective time unit length c / U in solver time.
  double ctu = 1.0;
};

struct StepInfo {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
};

struct RunReport {
  long iterations = 0;
  double final_time = 0.0;
  long final_step = 0;
  double wall_seconds = 0.0;
  double seconds_per_iteration = 0.0;
  double mean_dt = 0.0;
  double min_dt = 0.0;
  /// Wall hours to advance one CTU at the mean time step.
  double hours_per_ctu = 0.0;
};

class Solver {
 public:
  inline static constexpr double kViscousDtConstant = 2.5;

  /// `mesh` must carry metrics computed with `basis`.
  Solver(const Mesh& mesh, const BasisSet& basis, SchemeConfig scheme,
         ParallelOptions parallel = {});

  const Mesh& mesh() const { return mesh_; }
  const BasisSet& basis() const { return basis_; }
  const SchemeConfig& scheme() const { return scheme_; }
  const ParallelOptions& parallel() const { return parallel_; }
  void set_threads(int threads) { parallel_.threads = std::max(1, threads); }

  SolutionField make_field() const;

  /// Sets every node to fn(x).
  void project(SolutionField& q, const std::function<State(const Vec3&)>& fn) const;

  /// BR1 gradients of velocity and temperature (and eddy viscosity) into q.
  void compute_gradients(SolutionField& q, double t) const;

  /// dq/dt for the configured formulation; also refreshes q's gradients.
  void spatial_operator(SolutionField& q, double t, std::vector<State>& dqdt) const;

  double compute_dt(const SolutionField& q, double cfl) const;

  /// One RK3 step; throws DivergenceError (q left as the failed stage).
  void rk3_step(SolutionField& q, double t, double dt, long step = 0) const;

  /// Advances q. Callbacks are excluded from the timing. On divergence, q is
  /// restored to the last accepted state and DivergenceError is rethrown.
  /// The callback may refresh gradients but must not change the state.
  RunReport run(SolutionField& q, const RunControl& control,
                const std::function<void(const StepInfo&, SolutionField&)>&
                    on_step = {}) const;

  Totals totals(const SolutionField& q) const;

  /// Throws StateError naming element and node on the first invalid state.
  void check_state(const SolutionField& q) const;

  const BoundaryData& boundary_data(int patch) const;

 private:
  struct FaceLink {
    int elem_l, side_l, elem_r, side_r;
    int patch;
    std::vector<int> perm;  // left face node -> right face node
  };

  void face_traces(const SolutionField& q) const;
  void inviscid_face_fluxes(double t) const;
  void viscous_face_fluxes() const;
  void gradients_impl(SolutionField& q, double t, bool faces_ready) const;

  int side_offset(std::size_t e, int s) const { return (int(e) * kNumSides + s) * nf_; }

  Mesh mesh_;
  BasisSet basis_;
  SchemeConfig scheme_;
  ParallelOptions parallel_;
  int n_ = 0;
  int nf_ = 0;
  int n3_ = 0;
  std::vector<FaceLink> links_;
  std::vector<const BoundaryData*> patch_data_;
  std::vector<double> dx_eff_;
  std::vector<double> delta_;  // Vreman filter width per element
  std::array<std::vector<int>, kNumSides> face_volume_node_;
  std::vector<double> weights3_;

  // Workspace, one slot per element side and face node.
  mutable std::vector<State> uf_;
  mutable std::vector<std::array<double, 4>> wf_;
  mutable std::vector<State> fstar_;
  mutable std::vector<std::array<double, 4>> wstar_;
  mutable std::vector<NodeGradient> qf_;
  mutable std::vector<double> muf_;
  mutable std::vector<State> vstar_;
  mutable std::vector<int> bad_;
};

}  // namespace dgles
