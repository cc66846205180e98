#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dgles/cases.hpp"
#include "dgles/error.hpp"
#include "dgles/solver.hpp"

using namespace dgles;

namespace {

const std::array<Interval, 3> kUnit{Interval{0, 1}, Interval{0, 1}, Interval{0, 1}};
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const std::array<Interval, 3> kTgv{Interval{0, kTwoPi}, Interval{0, kTwoPi}, Interval{0, kTwoPi}};

Solver make_solver(const Mesh& raw, Formulation f, int order, const GasModel& gas,
                   InterfaceScheme scheme = InterfaceScheme::KGLaxFriedrichs,
                   std::map<std::string, BoundaryData> bcs = {}, int threads = 1) {
  const BasisSet b(node_kind(f), order);
  SchemeConfig sc;
  sc.formulation = f;
  sc.interface_scheme = scheme;
  sc.gas = gas;
  sc.boundaries = std::move(bcs);
  return Solver(compute_metrics(raw, b), b, sc, ParallelOptions{threads, true});
}

double max_abs(const std::vector<State>& v) {
  double m = 0.0;
  for (const auto& s : v)
    for (double x : s) m = std::max(m, std::abs(x));
  return m;
}

const Formulation kBoth[] = {Formulation::ExplicitLES_Vreman_Gauss,
                             Formulation::ImplicitLES_KG_GaussLobatto};

// Term-by-term Kennedy-Gruber flux along a (scaled) direction.
State kg_oracle(const State& a, const State& b, const Vec3& n, double gamma) {
  auto p_of = [&](const State& u) {
    return (gamma - 1.0) * (u[4] - 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0]);
  };
  const double rho = 0.5 * (a[0] + b[0]);
  const double e = 0.5 * (a[4] / a[0] + b[4] / b[0]);
  const double p = 0.5 * (p_of(a) + p_of(b));
  Vec3 v;
  for (int k = 0; k < 3; ++k) v[k] = 0.5 * (a[1 + k] / a[0] + b[1 + k] / b[0]);
  const double vn = dot(v, n);
  return {rho * vn, rho * vn * v[0] + p * n[0], rho * vn * v[1] + p * n[1],
          rho * vn * v[2] + p * n[2], rho * vn * e + p * vn};
}

int node_id(int i, int j, int k, int n) { return i + n * (j + n * k); }

}  // namespace

TEST(Solver, FormulationNodeKindMismatchIsRejected) {
  const BasisSet gl(NodeKind::GaussLobatto, 3);
  const Mesh m = compute_metrics(build_box_mesh(1, 1, 1, kUnit, {true, true, true}, 1), gl);
  SchemeConfig sc;
  sc.formulation = Formulation::ExplicitLES_Vreman_Gauss;
  EXPECT_THROW(Solver(m, gl, sc), ConfigError);
  sc.formulation = Formulation::ImplicitLES_KG_GaussLobatto;
  EXPECT_NO_THROW(Solver(m, gl, sc));
}

TEST(Solver, FormulationNames) {
  for (auto f : kBoth) EXPECT_EQ(parse_formulation(to_string(f)), f);
  EXPECT_EQ(parse_formulation("eLES"), Formulation::ExplicitLES_Vreman_Gauss);
  EXPECT_EQ(parse_formulation("iLES"), Formulation::ImplicitLES_KG_GaussLobatto);
  EXPECT_THROW(parse_formulation("DNS"), ConfigError);
  EXPECT_EQ(node_kind(Formulation::ExplicitLES_Vreman_Gauss), NodeKind::Gauss);
  EXPECT_EQ(node_kind(Formulation::ImplicitLES_KG_GaussLobatto), NodeKind::GaussLobatto);
}

TEST(Solver, UniformFieldHasZeroGradients) {
  const GasModel gas = GasModel::from_references(0.1, 100.0);
  for (auto f : kBoth) {
    Solver s = make_solver(build_deformed_box_mesh(2, 2, 2, kUnit, {true, true, true}, 2, 0.04),
                           f, 3, gas);
    SolutionField q = s.make_field();
    s.project(q, [&](const Vec3&) { return cases::uniform(gas, {0.4, -0.1, 0.2}); });
    s.compute_gradients(q, 0.0);
    double m = 0.0;
    for (const auto& g : q.grad)
      for (double x : g) m = std::max(m, std::abs(x));
    EXPECT_LE(m, 1e-11);
    for (double mu : q.mu_t) EXPECT_LE(mu, 1e-12);
  }
}

TEST(Solver, LinearAndPolynomialGradientsAreExact) {
  const GasModel gas = GasModel::from_references(0.1, 100.0);
  // v1 = x, T = y, plus a degree-3 polynomial in v2; the boundary ghost carries
  // the same field so BR1 averages are exact.
  auto field = [&](const Vec3& x, double) {
    const double T = 1.0 + x[1];
    const Vec3 v{x[0], x[0] * x[1] * x[2] + x[2] * x[2], 0.3};
    return from_primitive(1.0, v, T, gas);
  };
  std::map<std::string, BoundaryData> bcs;
  for (const char* side : kBoxSideNames) {
    BoundaryData d;
    d.inflow_function = field;
    bcs[side] = d;
  }
  BoxMeshSpec spec;
  spec.cells = {2, 3, 2};
  spec.extents = {Interval{0, 1}, Interval{-0.5, 1}, Interval{0, 2}};
  spec.side_kinds = {BCKind::Inflow, BCKind::Inflow, BCKind::Inflow,
                     BCKind::Inflow, BCKind::Inflow, BCKind::Inflow};
  for (auto f : kBoth) {
    Solver s = make_solver(build_box_mesh(spec), f, 3, gas, InterfaceScheme::KGLaxFriedrichs, bcs);
    SolutionField q = s.make_field();
    s.project(q, [&](const Vec3& x) { return field(x, 0.0); });
    s.compute_gradients(q, 0.0);
    const auto& mesh = s.mesh();
    double err = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
      for (std::size_t p = 0; p < mesh.metrics[e].x.size(); ++p) {
        const Vec3& x = mesh.metrics[e].x[p];
        const NodeGradient& g = q.grad[e * mesh.metrics[e].x.size() + p];
        // g[4 i + j] = d w_j / d x_i, w = (v1, v2, v3, T)
        const NodeGradient exact{1.0, x[1] * x[2], 0.0, 0.0,
                                 0.0, x[0] * x[2], 0.0, 1.0,
                                 0.0, x[0] * x[1] + 2.0 * x[2], 0.0, 0.0};
        for (int c = 0; c < 12; ++c) err = std::max(err, std::abs(g[c] - exact[c]));
      }
    EXPECT_LE(err, 1e-11) << to_string(f);
  }
}

TEST(Solver, FreeStreamResidualOnCurvedMesh) {
  // Roundoff in the residual grows with the flux magnitude (p ~ 1/M^2), so each
  // component is measured against the largest flux component it sums.
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  const State u0 = cases::uniform(gas, {1.0, 0.3, -0.2});
  const auto pr = to_primitive(u0, gas);
  State flux_scale{};
  for (const State& f : euler_flux(u0, gas))
    for (int v = 0; v < kNumVars; ++v) flux_scale[v] = std::max(flux_scale[v], std::abs(f[v]));
  EXPECT_GT(flux_scale[4], 100.0 * pr.rho);
  for (auto f : kBoth) {
    Solver s = make_solver(build_deformed_box_mesh(2, 2, 2, kUnit, {true, true, true}, 3, 0.05),
                           f, 4, gas);
    SolutionField q = s.make_field();
    s.project(q, [&](const Vec3&) { return u0; });
    std::vector<State> dq;
    s.spatial_operator(q, 0.0, dq);
    for (const State& r : dq)
      for (int v = 0; v < kNumVars; ++v)
        ASSERT_LE(std::abs(r[v]), 1e-11 * std::max(1.0, flux_scale[v])) << to_string(f) << " " << v;
  }
}

TEST(Solver, FreeStreamStateIsPreservedOverSteps) {
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  for (auto f : kBoth) {
    Solver s = make_solver(build_deformed_box_mesh(2, 2, 2, kUnit, {true, true, true}, 3, 0.05),
                           f, 4, gas);
    SolutionField q = s.make_field();
    s.project(q, [&](const Vec3&) { return cases::uniform(gas, {1.0, 0.3, -0.2}); });
    const auto u0 = q.u;
    RunControl rc;
    rc.n_steps = 100;
    s.run(q, rc);
    double dev = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i)
      for (int v = 0; v < kNumVars; ++v) dev = std::max(dev, std::abs(q.u[i][v] - u0[i][v]));
    EXPECT_LE(dev, 1e-11) << to_string(f);
  }
}

TEST(Solver, SplitFormMatchesNaiveFluxDifferencingOracle) {
  const GasModel gas = GasModel::from_references(0.3, 0.0);
  const int N = 4, n = N + 1;
  Solver s = make_solver(build_deformed_box_mesh(2, 2, 2, kUnit, {true, true, true}, 2, 0.04),
                         Formulation::ImplicitLES_KG_GaussLobatto, N, gas,
                         InterfaceScheme::CentralKG);
  SolutionField q = s.make_field();
  s.project(q, [&](const Vec3& x) {
    return cases::isentropic_vortex(Vec3{4 * x[0], 4 * x[1], x[2]}, gas, {2.0, 2.0, 0.0}, 2.0,
                                    {0.5, 0.2, 0.1});
  });
  std::vector<State> dq;
  s.spatial_operator(q, 0.0, dq);

  const Mesh& mesh = s.mesh();
  const BasisSet& b = s.basis();
  const int n3 = n * n * n;
  // Periodic neighbour lookup by position.
  auto wrap = [](double v) {
    v -= std::floor(v + 1e-12);
    return v < 1e-9 || v > 1 - 1e-9 ? 0.0 : v;
  };
  auto same = [&](const Vec3& a, const Vec3& c) {
    for (int k = 0; k < 3; ++k)
      if (std::abs(wrap(a[k]) - wrap(c[k])) > 1e-9) return false;
    return true;
  };
  double worst = 0.0, scale = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& em = mesh.metrics[e];
    std::vector<State> r(n3, State{}), mag(n3, State{});
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int p = node_id(i, j, k, n);
          const int c[3] = {i, j, k};
          const State& up = q.at(e, p);
          for (int d = 0; d < 3; ++d) {
            for (int m = 0; m < n; ++m) {
              int cc[3] = {i, j, k};
              cc[d] = m;
              const int pm = node_id(cc[0], cc[1], cc[2], n);
              const Vec3 avg = 0.5 * (em.ja[p][d] + em.ja[pm][d]);
              const State f = kg_oracle(up, q.at(e, pm), avg, gas.gamma);
              r[p] = r[p] - (2.0 * b.diff(c[d], m)) * f;
              for (int v = 0; v < kNumVars; ++v) mag[p][v] += std::abs(2.0 * b.diff(c[d], m) * f[v]);
            }
            for (int end : {0, N}) {
              if (c[d] != end) continue;
              const double sgn = end == 0 ? -1.0 : 1.0;
              const Vec3 nout = sgn * em.ja[p][d];
              // The face-centre node identifies the neighbour element; edge and
              // corner nodes are shared by more than two elements.
              int cc[3] = {N / 2, N / 2, N / 2};
              cc[d] = end;
              const Vec3& centre = em.x[node_id(cc[0], cc[1], cc[2], n)];
              const State* nb = nullptr;
              for (std::size_t e2 = 0; e2 < mesh.num_elements() && !nb; ++e2) {
                if (e2 == e) continue;
                int oc[3] = {N / 2, N / 2, N / 2};
                oc[d] = N - end;
                if (!same(mesh.metrics[e2].x[node_id(oc[0], oc[1], oc[2], n)], centre)) continue;
                for (int p2 = 0; p2 < n3 && !nb; ++p2)
                  if (same(mesh.metrics[e2].x[p2], em.x[p])) nb = &q.at(e2, p2);
              }
              ASSERT_NE(nb, nullptr);
              const State fstar = kg_oracle(up, *nb, nout, gas.gamma);
              const State fin = kg_oracle(up, up, nout, gas.gamma);
              r[p] = r[p] - (1.0 / b.weights()[end]) * (fstar - fin);
              for (int v = 0; v < kNumVars; ++v)
                mag[p][v] += (std::abs(fstar[v]) + std::abs(fin[v])) / b.weights()[end];
            }
          }
        }
    for (int p = 0; p < n3; ++p)
      for (int v = 0; v < kNumVars; ++v) {
        const double expect = r[p][v] / em.jac[p];
        scale = std::max(scale, std::abs(expect));
        // Relative to the summed term magnitudes, which set the roundoff level.
        worst = std::max(worst, std::abs(dq[e * n3 + p][v] - expect) * em.jac[p] / mag[p][v]);
      }
  }
  EXPECT_GT(scale, 1e-2);
  EXPECT_LE(worst, 1e-13);
}

TEST(Solver, BoundaryStateExamples) {
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  const double p0 = gas.reference_pressure();
  BoundaryData d;
  const Vec3 n{0.0, 1.0, 0.0};
  // Free slip with v = n reflects to -n.
  {
    const State u = from_primitive(1.0, n, p0, gas);
    const State g = apply_boundary_state(u, BCKind::FreeSlipWall, d, n, 0.0, {}, gas);
    const auto pg = to_primitive(g, gas);
    EXPECT_NEAR(pg.v[1], -1.0, 1e-15);
    EXPECT_NEAR(0.5 * (pg.v[1] + 1.0), 0.0, 1e-15);
    EXPECT_NEAR(pg.p, p0, 1e-12);
    EXPECT_EQ(g[0], u[0]);
  }
  // Moving wall at its own velocity is a fixed point.
  {
    d.wall_velocity = {1.0, 0.0, 0.0};
    const State u = from_primitive(1.1, {1.0, 0.0, 0.0}, p0, gas);
    const State g = apply_boundary_state(u, BCKind::MovingWall, d, n, 0.0, {}, gas);
    for (int v = 0; v < kNumVars; ++v) EXPECT_NEAR(g[v], u[v], 1e-13 * std::abs(u[v]) + 1e-15);
  }
  // No slip mirrors the velocity.
  {
    const State u = from_primitive(1.0, {0.3, 0.2, -0.1}, p0, gas);
    const auto pg = to_primitive(apply_boundary_state(u, BCKind::NoSlipWall, d, n, 0, {}, gas), gas);
    EXPECT_NEAR(pg.v[0], -0.3, 1e-15);
    EXPECT_NEAR(pg.v[2], 0.1, 1e-15);
  }
  // Outflow at the reference pressure is the identity.
  {
    d.outlet_pressure = p0;
    const State u = from_primitive(0.9, {0.8, 0.1, 0.0}, p0, gas);
    const State g = apply_boundary_state(u, BCKind::Outflow, d, n, 0.0, {}, gas);
    for (int v = 0; v < kNumVars; ++v) EXPECT_NEAR(g[v], u[v], 1e-13 * std::abs(u[v]) + 1e-15);
    d.outlet_pressure = 2.0 * p0;
    EXPECT_NEAR(pressure(apply_boundary_state(u, BCKind::Outflow, d, n, 0.0, {}, gas), gas),
                2.0 * p0, 1e-12);
  }
  // Inflow carries the prescribed state.
  {
    d.inflow_state = from_primitive(1.0, {1.0, 0.0, 0.0}, p0, gas);
    const State u = from_primitive(2.0, {0.0, 0.0, 0.0}, 3.0 * p0, gas);
    EXPECT_EQ(apply_boundary_state(u, BCKind::Inflow, d, n, 0.0, {}, gas), d.inflow_state);
  }
  EXPECT_THROW(apply_boundary_state(cases::uniform(gas), BCKind::Periodic, d, n, 0, {}, gas),
               ConfigError);
}

TEST(Solver, MissingMovingWallDataIsConfigError) {
  const GasModel gas = GasModel::from_references(0.1, 100.0);
  EXPECT_THROW(make_solver(build_channel_mesh(2, 2, 1, 1.0, 1.0, 1.0, 1),
                           Formulation::ImplicitLES_KG_GaussLobatto, 2, gas),
               ConfigError);
}

TEST(Solver, TimeStepExamples) {
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  auto quiescent = [&](const Vec3&) { return from_primitive(1.0, {0, 0, 0}, 1.0 / gas.gamma, gas); };
  for (auto f : kBoth) {
    Solver s = make_solver(build_box_mesh(1, 1, 1, kUnit, {true, true, true}, 1), f, 4, gas);
    SolutionField q = s.make_field();
    s.project(q, quiescent);
    // dx_eff = (J wbar^3)^(1/3) / (N + 1) with J = 1/8 and wbar = 2 / (N + 1).
    const double dx = 0.5 * (2.0 / 5.0) / 5.0;
    EXPECT_NEAR(s.compute_dt(q, 1.0), dx, 1e-15);
    EXPECT_DOUBLE_EQ(s.compute_dt(q, 2.0), 2.0 * s.compute_dt(q, 1.0));
    EXPECT_EQ(s.compute_dt(q, 1.0), s.compute_dt(q, 1.0));

    Solver h = make_solver(build_box_mesh(2, 2, 2, kUnit, {true, true, true}, 1), f, 4, gas);
    SolutionField qh = h.make_field();
    h.project(qh, quiescent);
    EXPECT_NEAR(h.compute_dt(qh, 1.0), 0.5 * s.compute_dt(q, 1.0), 1e-15);
  }
}

TEST(Solver, ViscousTimeStepLimit) {
  const GasModel gas = GasModel::from_references(0.1, 0.01);  // mu = 100
  Solver s = make_solver(build_box_mesh(1, 1, 1, kUnit, {true, true, true}, 1),
                         Formulation::ImplicitLES_KG_GaussLobatto, 4, gas);
  SolutionField q = s.make_field();
  s.project(q, [&](const Vec3&) { return cases::uniform(gas, {0, 0, 0}); });
  const double dx = 0.04;
  EXPECT_NEAR(s.compute_dt(q, 1.0), dx * dx / (Solver::kViscousDtConstant * 100.0), 1e-15);
}

TEST(RK3, ZeroDerivativeIsABitwiseFixedPoint) {
  std::vector<double> q{1.0, -2.5, 3.25e-7, 1e300}, q0 = q, g, dq;
  RK3Scheme::step(std::span<double>(q), 0.0, 0.1, g, dq,
                  [](std::span<const double>, double, std::span<double> out) {
                    for (double& x : out) x = 0.0;
                  },
                  [](int) {});
  EXPECT_EQ(q, q0);
}

TEST(RK3, ThirdOrderOnScalarOde) {
  auto solve = [](int steps) {
    std::vector<double> y{1.0}, g, dq;
    const double dt = 1.0 / steps;
    for (int s = 0; s < steps; ++s)
      RK3Scheme::step(std::span<double>(y), s * dt, dt, g, dq,
                      [](std::span<const double> u, double, std::span<double> out) { out[0] = -u[0]; },
                      [](int) {});
    return std::abs(y[0] - std::exp(-1.0));
  };
  double prev = solve(10);
  for (int steps : {20, 40, 80}) {
    const double e = solve(steps);
    EXPECT_GE(std::log2(prev / e), 2.9);
    prev = e;
  }
}

TEST(RK3, ResolvedAdvectionTemporalRatio) {
  // Fine spatial resolution, so the time-stepping error dominates.
  const GasModel gas = GasModel::from_references(0.5, 0.0);
  const std::array<Interval, 3> e{Interval{0, kTwoPi}, Interval{0, 1}, Interval{0, 1}};
  Solver s = make_solver(build_box_mesh(4, 1, 1, e, {true, true, true}, 1),
                         Formulation::ImplicitLES_KG_GaussLobatto, 6, gas,
                         InterfaceScheme::KGLaxFriedrichs);
  SolutionField q0 = s.make_field();
  s.project(q0, [&](const Vec3& x) { return cases::density_wave(x, 0.0, gas, 0.1, 1.0, 1.0); });
  auto advance = [&](int steps) {
    SolutionField q = q0;
    RunControl rc;
    rc.fixed_dt = 0.4 / steps;
    rc.n_steps = steps;
    s.run(q, rc);
    return q;
  };
  const SolutionField ref = advance(1280);
  auto err = [&](const SolutionField& q) {
    double m = 0.0;
    for (std::size_t i = 0; i < q.u.size(); ++i) m = std::max(m, std::abs(q.u[i][0] - ref.u[i][0]));
    return m;
  };
  const double e1 = err(advance(40)), e2 = err(advance(80));
  EXPECT_GE(e1 / e2, 7.0);
  EXPECT_LE(e1 / e2, 9.0);
}

TEST(Solver, ZeroStepsReturnsInput) {
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  Solver s = make_solver(build_box_mesh(2, 2, 2, kTgv, {true, true, true}, 1),
                         Formulation::ImplicitLES_KG_GaussLobatto, 3, gas);
  SolutionField q = s.make_field();
  s.project(q, [&](const Vec3& x) { return cases::taylor_green(x, gas); });
  const auto u0 = q.u;
  RunControl rc;
  rc.n_steps = 0;
  const RunReport r = s.run(q, rc);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(q.u, u0);
}

TEST(Solver, ExcessiveCflRaisesDivergenceAndRestores) {
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  for (auto f : kBoth) {
    Solver s = make_solver(build_box_mesh(2, 2, 2, kTgv, {true, true, true}, 1), f, 3, gas);
    SolutionField q = s.make_field();
    s.project(q, [&](const Vec3& x) { return cases::taylor_green(x, gas); });
    RunControl rc;
    rc.n_steps = 50;
    rc.cfl = 20.0;
    try {
      s.run(q, rc);
      FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
      EXPECT_GE(e.stage(), 0);
      EXPECT_LE(e.stage(), 2);
    }
    EXPECT_NO_THROW(s.check_state(q));
  }
}

TEST(Solver, InvalidStateNamesElementAndNode) {
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  Solver s = make_solver(build_box_mesh(2, 1, 1, kUnit, {true, true, true}, 1),
                         Formulation::ImplicitLES_KG_GaussLobatto, 2, gas);
  SolutionField q = s.make_field();
  s.project(q, [&](const Vec3&) { return cases::uniform(gas); });
  q.at(1, 5)[0] = -1.0;
  try {
    s.check_state(q);
    FAIL();
  } catch (const StateError& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("element 1"), std::string::npos) << w;
    EXPECT_NE(w.find("node 5"), std::string::npos) << w;
  }
  EXPECT_THROW(s.compute_gradients(q, 0.0), StateError);
}

TEST(Solver, PeriodicConservationPerStep) {
  const GasModel gas = GasModel::from_references(0.1, 400.0);
  for (auto f : kBoth) {
    Solver s = make_solver(build_deformed_box_mesh(2, 2, 2, kTgv, {true, true, true}, 2, 0.1), f,
                           3, gas);
    SolutionField q = s.make_field();
    s.project(q, [&](const Vec3& x) { return cases::taylor_green(x, gas); });
    const Totals t0 = s.totals(q);
    RunControl rc;
    rc.n_steps = 10;
    rc.cfl = 0.5;
    s.run(q, rc);
    const Totals t1 = s.totals(q);
    // Momentum components with zero total are measured against the largest
    // momentum magnitude.
    const double mom = std::max({t0.magnitude[1], t0.magnitude[2], t0.magnitude[3]});
    for (int v = 0; v < kNumVars; ++v) {
      const double scale = v >= 1 && v <= 3 ? mom : t0.magnitude[v];
      EXPECT_LE(std::abs(t1.conserved[v] - t0.conserved[v]) / scale, 10 * 1e-12)
          << to_string(f) << " var " << v;
    }
  }
}

TEST(Solver, DeterministicAcrossThreadCounts) {
  const GasModel gas = GasModel::from_references(0.1, 1600.0);
  for (auto f : kBoth) {
    std::vector<State> first;
    double ke = 0.0;
    for (int threads : {1, 2, 3}) {
      Solver s = make_solver(build_box_mesh(3, 3, 3, kTgv, {true, true, true}, 1), f, 3, gas,
                             InterfaceScheme::KGLaxFriedrichs, {}, threads);
      SolutionField q = s.make_field();
      s.project(q, [&](const Vec3& x) { return cases::taylor_green(x, gas); });
      RunControl rc;
      rc.n_steps = 5;
      s.run(q, rc);
      if (first.empty()) {
        first = q.u;
        ke = s.totals(q).kinetic_energy;
      } else {
        EXPECT_EQ(q.u, first) << threads;
        EXPECT_EQ(s.totals(q).kinetic_energy, ke);
      }
    }
  }
}

TEST(Solver, ViscousTgvKineticEnergyDecays) {
  const GasModel gas = GasModel::from_references(0.1, 200.0);
  for (auto f : kBoth) {
    Solver s = make_solver(build_box_mesh(3, 3, 3, kTgv, {true, true, true}, 1), f, 3, gas);
    SolutionField q = s.make_field();
    s.project(q, [&](const Vec3& x) { return cases::taylor_green(x, gas); });
    double prev = s.totals(q).kinetic_energy;
    RunControl rc;
    rc.n_steps = 30;
    s.run(q, rc, [&](const StepInfo&, SolutionField& field) {
      const double ke = s.totals(field).kinetic_energy;
      EXPECT_LT(ke, prev);
      prev = ke;
    });
  }
}

TEST(Solver, MeanRunReport) {
  const GasModel gas = GasModel::from_references(0.1, 0.0);
  Solver s = make_solver(build_box_mesh(2, 2, 2, kTgv, {true, true, true}, 1),
                         Formulation::ImplicitLES_KG_GaussLobatto, 2, gas);
  SolutionField q = s.make_field();
  s.project(q, [&](const Vec3& x) { return cases::taylor_green(x, gas); });
  RunControl rc;
  rc.t_end = 0.05;
  rc.ctu = 2.0;
  const RunReport r = s.run(q, rc);
  EXPECT_GT(r.iterations, 0);
  EXPECT_NEAR(r.final_time, 0.05, 1e-15);
  EXPECT_NEAR(r.mean_dt, 0.05 / r.iterations, 1e-15);
  EXPECT_NEAR(r.hours_per_ctu, rc.ctu / r.mean_dt * r.seconds_per_iteration / 3600.0,
              1e-12 * r.hours_per_ctu + 1e-300);
}
