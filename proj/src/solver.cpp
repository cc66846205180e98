#include "dgles/solver.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dgles/error.hpp"
#include "tensor.hpp"

namespace dgles {

using detail::idx3;

std::string_view to_string(Formulation f) {
  return f == Formulation::ExplicitLES_Vreman_Gauss ? "ExplicitLES_Vreman_Gauss"
                                                    : "ImplicitLES_KG_GaussLobatto";
}

Formulation parse_formulation(std::string_view name) {
  if (name == "ExplicitLES_Vreman_Gauss" || name == "eLES")
    return Formulation::ExplicitLES_Vreman_Gauss;
  if (name == "ImplicitLES_KG_GaussLobatto" || name == "iLES")
    return Formulation::ImplicitLES_KG_GaussLobatto;
  throw ConfigError("unknown formulation '" + std::string(name) +
                    "'; expected ExplicitLES_Vreman_Gauss or ImplicitLES_KG_GaussLobatto");
}

NodeKind node_kind(Formulation f) {
  return f == Formulation::ExplicitLES_Vreman_Gauss ? NodeKind::Gauss
                                                    : NodeKind::GaussLobatto;
}

VelocityGradient to_velocity_gradient(const NodeGradient& g) {
  VelocityGradient v;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) v.alpha[i][j] = g[4 * i + j];
    v.grad_t[i] = g[4 * i + 3];
  }
  return v;
}

SolutionField::SolutionField(std::size_t num_elements, int order_)
    : order(order_), elements(num_elements) {
  const std::size_t total = num_elements * nodes_per_element();
  u.assign(total, State{});
  grad.assign(total, NodeGradient{});
  mu_t.assign(total, 0.0);
}

void SchemeConfig::check_node_kind(NodeKind kind) const {
  if (kind != node_kind(formulation))
    throw ConfigError(std::string(to_string(formulation)) + " requires " +
                      std::string(to_string(node_kind(formulation))) +
                      " nodes, basis uses " + std::string(to_string(kind)));
}

State apply_boundary_state(const State& interior, BCKind kind, const BoundaryData& data,
                           const Vec3& normal, double t, const Vec3& x,
                           const GasModel& gas) {
  const double rho = interior[0];
  const Vec3 v{interior[1] / rho, interior[2] / rho, interior[3] / rho};
  const double p = pressure(interior, gas);
  switch (kind) {
    case BCKind::Inflow:
      return data.inflow_function ? data.inflow_function(x, t) : data.inflow_state;
    case BCKind::Outflow:
      return from_primitive(rho, v, data.outlet_pressure, gas);
    case BCKind::FreeSlipWall: {
      const double vn = dot(v, normal);
      return from_primitive(rho, v - (2.0 * vn) * normal, p, gas);
    }
    case BCKind::NoSlipWall:
      return from_primitive(rho, Vec3{-v[0], -v[1], -v[2]}, p, gas);
    case BCKind::MovingWall:
      return from_primitive(rho, 2.0 * data.wall_velocity - v, p, gas);
    case BCKind::Periodic:
      break;
  }
  throw ConfigError("boundary kind " + std::string(to_string(kind)) +
                    " cannot be applied to a boundary face");
}

namespace {

// w = (v1, v2, v3, T) from a conservative state (R = 1).
std::array<double, 4> primitive_w(const State& u, double gamma) {
  const double inv = 1.0 / u[0];
  const double v1 = u[1] * inv, v2 = u[2] * inv, v3 = u[3] * inv;
  const double p = (gamma - 1.0) * (u[4] - 0.5 * u[0] * (v1 * v1 + v2 * v2 + v3 * v3));
  return {v1, v2, v3, p * inv};
}

// Viscous flux projected on `dir`. `velocity` is the velocity used in the
// energy row; the heat flux is dropped when `heat` is false.
void viscous_flux_dir(const Vec3& velocity, const NodeGradient& g, double mu_t,
                      const GasModel& gas, const Vec3& dir, bool heat, double* out) {
  const double mu = gas.mu + mu_t;
  const double k = heat ? gas.kappa() + gas.kappa_turbulent(mu_t) : 0.0;
  const double div = g[0] + g[5] + g[10];
  double tau[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      tau[i][j] = mu * (g[4 * i + j] + g[4 * j + i]) - (i == j ? 2.0 / 3.0 * mu * div : 0.0);
  out[0] = 0.0;
  double energy = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double tn = tau[0][j] * dir[0] + tau[1][j] * dir[1] + tau[2][j] * dir[2];
    out[1 + j] = tn;
    energy += velocity[j] * tn;
  }
  out[4] = energy + k * (g[3] * dir[0] + g[7] * dir[1] + g[11] * dir[2]);
}

bool valid_state(const State& u, double gamma) {
  if (!(u[0] > 0.0) || !std::isfinite(u[0])) return false;
  for (double c : u)
    if (!std::isfinite(c)) return false;
  const double p = (gamma - 1.0) * (u[4] - 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0]);
  return p > 0.0;
}

double vreman_from_gradient(const NodeGradient& g, double rho, double delta, double c_v) {
  Mat3 alpha;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) alpha[i][j] = g[4 * i + j];
  return vreman_mu_t(alpha, rho, delta, c_v);
}

}  // namespace

Solver::Solver(const Mesh& mesh, const BasisSet& basis, SchemeConfig scheme,
               ParallelOptions parallel)
    : mesh_(mesh), basis_(basis), scheme_(std::move(scheme)), parallel_(parallel) {
  scheme_.gas.validate();
  scheme_.check_node_kind(basis_.kind());
  if (!mesh_.metric_kind || *mesh_.metric_kind != basis_.kind() ||
      mesh_.metric_order != basis_.order())
    throw ConfigError("mesh metrics were not computed for this basis");
  parallel_.threads = std::max(1, parallel_.threads);
  n_ = basis_.size();
  nf_ = n_ * n_;
  n3_ = nf_ * n_;

  patch_data_.assign(mesh_.patches.size(), nullptr);
  for (std::size_t p = 0; p < mesh_.patches.size(); ++p) {
    const auto it = scheme_.boundaries.find(mesh_.patches[p].name);
    if (it != scheme_.boundaries.end()) patch_data_[p] = &it->second;
  }
  for (const Face& f : mesh_.faces) {
    FaceLink link{f.left_elem, f.left_side, f.right_elem, f.right_side, f.patch, {}};
    if (!f.is_boundary()) {
      link.perm.resize(nf_);
      for (int b = 0; b < n_; ++b)
        for (int a = 0; a < n_; ++a) link.perm[a + n_ * b] = map_face_node(a, b, f.orientation, n_);
    } else {
      const BCKind kind = mesh_.patches[f.patch].kind;
      if (kind == BCKind::Periodic)
        throw ConfigError("patch '" + mesh_.patches[f.patch].name +
                          "' is Periodic but has unpaired faces");
      if ((kind == BCKind::Inflow || kind == BCKind::Outflow || kind == BCKind::MovingWall) &&
          patch_data_[f.patch] == nullptr)
        throw ConfigError("no boundary data configured for patch '" +
                          mesh_.patches[f.patch].name + "' (" +
                          std::string(to_string(kind)) + ")");
    }
    links_.push_back(std::move(link));
  }

  for (int s = 0; s < kNumSides; ++s) {
    const int d = side_direction(s);
    const auto [t1, t2] = tangent_directions(d);
    face_volume_node_[s].resize(nf_);
    for (int b = 0; b < n_; ++b)
      for (int a = 0; a < n_; ++a) {
        int c[3];
        c[d] = 0;
        c[t1] = a;
        c[t2] = b;
        face_volume_node_[s][a + n_ * b] = idx3(c[0], c[1], c[2], n_);
      }
  }

  const auto w = basis_.weights();
  weights3_.resize(n3_);
  for (int k = 0; k < n_; ++k)
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i) weights3_[idx3(i, j, k, n_)] = w[i] * w[j] * w[k];

  const std::size_t ne = mesh_.num_elements();
  dx_eff_.resize(ne * n3_);
  delta_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& em = mesh_.metrics[e];
    delta_[e] = filter_width(em.volume, basis_.order());
    // Mean quadrature weight 2/(N+1) per direction, so that both node families
    // map a given CFL to the same dt on the same mesh.
    const double wbar = 2.0 / (basis_.order() + 1.0);
    for (int p = 0; p < n3_; ++p)
      dx_eff_[e * n3_ + p] = std::cbrt(em.jac[p]) * wbar / (basis_.order() + 1.0);
  }

  const std::size_t slots = ne * kNumSides * nf_;
  uf_.resize(slots);
  wf_.resize(slots);
  fstar_.resize(slots);
  wstar_.resize(slots);
  qf_.resize(slots);
  muf_.resize(slots);
  vstar_.resize(slots);
  bad_.resize(ne);
}

const BoundaryData& Solver::boundary_data(int patch) const {
  static const BoundaryData kDefault{};
  return patch_data_[patch] ? *patch_data_[patch] : kDefault;
}

SolutionField Solver::make_field() const {
  return SolutionField(mesh_.num_elements(), basis_.order());
}

void Solver::project(SolutionField& q, const std::function<State(const Vec3&)>& fn) const {
  for (std::size_t e = 0; e < mesh_.num_elements(); ++e)
    for (int p = 0; p < n3_; ++p) q.at(e, p) = fn(mesh_.metrics[e].x[p]);
}

void Solver::check_state(const SolutionField& q) const {
  const double gamma = scheme_.gas.gamma;
  for (std::size_t e = 0; e < mesh_.num_elements(); ++e)
    for (int p = 0; p < n3_; ++p) {
      const State& u = q.at(e, p);
      if (!valid_state(u, gamma)) {
        std::ostringstream os;
        os << "invalid state at element " << e << ", node " << p << ": density " << u[0]
           << ", pressure " << pressure(u, scheme_.gas);
        throw StateError(os.str(), u[0], pressure(u, scheme_.gas));
      }
    }
}

// Phase 1: state validity and interior traces of u and w on every element side.
void Solver::face_traces(const SolutionField& q) const {
  const double gamma = scheme_.gas.gamma;
  const bool lobatto = basis_.kind() == NodeKind::GaussLobatto;
  const auto lm = basis_.left_interp();
  const auto lp = basis_.right_interp();
  const int ne = static_cast<int>(mesh_.num_elements());
  bool any_bad = false;
#pragma omp parallel num_threads(parallel_.threads)
  {
    std::vector<std::array<double, 4>> w(n3_);
#pragma omp for schedule(static) reduction(|| : any_bad)
    for (int e = 0; e < ne; ++e) {
      const State* u = &q.u[std::size_t(e) * n3_];
      bad_[e] = -1;
      for (int p = 0; p < n3_; ++p) {
        if (bad_[e] < 0 && !valid_state(u[p], gamma)) bad_[e] = p;
        w[p] = primitive_w(u[p], gamma);
      }
      if (bad_[e] >= 0) any_bad = true;
      for (int s = 0; s < kNumSides; ++s) {
        const int d = side_direction(s);
        const int stride = d == 0 ? 1 : (d == 1 ? n_ : nf_);
        const int off = side_offset(e, s);
        const auto& ends = s % 2 == 0 ? lm : lp;
        for (int f = 0; f < nf_; ++f) {
          const int base = face_volume_node_[s][f];
          if (lobatto) {
            const int node = base + (s % 2 == 0 ? 0 : (n_ - 1) * stride);
            uf_[off + f] = u[node];
            wf_[off + f] = w[node];
          } else {
            State us{};
            std::array<double, 4> ws{};
            for (int m = 0; m < n_; ++m) {
              const double c = ends[m];
              const State& um = u[base + m * stride];
              const auto& wm = w[base + m * stride];
              for (int v = 0; v < kNumVars; ++v) us[v] += c * um[v];
              for (int v = 0; v < 4; ++v) ws[v] += c * wm[v];
            }
            uf_[off + f] = us;
            wf_[off + f] = ws;
          }
        }
      }
    }
  }
  if (any_bad) {
    for (int e = 0; e < ne; ++e)
      if (bad_[e] >= 0) {
        const State& u = q.at(e, bad_[e]);
        std::ostringstream os;
        os << "invalid state at element " << e << ", node " << bad_[e] << ": density "
           << u[0] << ", pressure " << pressure(u, scheme_.gas);
        throw StateError(os.str(), u[0], pressure(u, scheme_.gas));
      }
  }
}

// Phase 2: inviscid numerical fluxes and BR1 interface values of w.
void Solver::inviscid_face_fluxes(double t) const {
  const GasModel& gas = scheme_.gas;
  const InterfaceScheme scheme = scheme_.interface_scheme;
  const int nl = static_cast<int>(links_.size());
#pragma omp parallel for schedule(static) num_threads(parallel_.threads)
  for (int li = 0; li < nl; ++li) {
    const FaceLink& L = links_[li];
    const FaceMetrics& fm = mesh_.metrics[L.elem_l].faces[L.side_l];
    const int offl = side_offset(L.elem_l, L.side_l);
    const bool boundary = L.elem_r < 0;
    const int offr = boundary ? -1 : side_offset(L.elem_r, L.side_r);
    const BCKind kind = boundary ? mesh_.patches[L.patch].kind : BCKind::Periodic;
    static const BoundaryData kNone{};
    const BoundaryData& data = boundary ? boundary_data(L.patch) : kNone;
    for (int f = 0; f < nf_; ++f) {
      const State& ul = uf_[offl + f];
      const Vec3& nrm = fm.normal[f];
      const double area = fm.area[f];
      State ur;
      std::array<double, 4> wr;
      if (boundary) {
        ur = apply_boundary_state(ul, kind, data, nrm, t, fm.x[f], gas);
        wr = primitive_w(ur, gas.gamma);
      } else {
        ur = uf_[offr + L.perm[f]];
        wr = wf_[offr + L.perm[f]];
      }
      const auto sl = kernels::node_state(ul, gas.gamma);
      const auto sr = kernels::node_state(ur, gas.gamma);
      State flux;
      const Vec3& sn = fm.scaled_normal[f];
      if (scheme == InterfaceScheme::Upwind) {
        State fl, fr;
        kernels::euler_flux_dir(ul, sl, sn, fl.data());
        kernels::euler_flux_dir(ur, sr, sn, fr.data());
        for (int v = 0; v < kNumVars; ++v) flux[v] = 0.5 * (fl[v] + fr[v]);
      } else {
        kernels::kg_flux(sl, sr, sn, flux.data());
      }
      if (scheme != InterfaceScheme::CentralKG) {
        const double lambda =
            std::max(std::abs(dot(sl.v, nrm)) + sl.a, std::abs(dot(sr.v, nrm)) + sr.a);
        for (int v = 0; v < kNumVars; ++v) flux[v] -= 0.5 * lambda * area * (ur[v] - ul[v]);
      }

      const auto& wl = wf_[offl + f];
      std::array<double, 4> wstar;
      if (boundary && (kind == BCKind::NoSlipWall || kind == BCKind::MovingWall)) {
        const Vec3 vw = kind == BCKind::MovingWall ? data.wall_velocity : Vec3{0, 0, 0};
        wstar = {vw[0], vw[1], vw[2], wl[3]};
      } else if (boundary && kind == BCKind::FreeSlipWall) {
        const double vn = wl[0] * nrm[0] + wl[1] * nrm[1] + wl[2] * nrm[2];
        wstar = {wl[0] - vn * nrm[0], wl[1] - vn * nrm[1], wl[2] - vn * nrm[2], wl[3]};
      } else {
        for (int v = 0; v < 4; ++v) wstar[v] = 0.5 * (wl[v] + wr[v]);
      }

      fstar_[offl + f] = flux;
      wstar_[offl + f] = wstar;
      if (!boundary) {
        fstar_[offr + L.perm[f]] = -1.0 * flux;
        wstar_[offr + L.perm[f]] = wstar;
      }
    }
  }
}

// Phase 3: BR1 lifted gradients, eddy viscosity and their face traces.
void Solver::gradients_impl(SolutionField& q, double t, bool faces_ready) const {
  if (!faces_ready) {
    face_traces(q);
    inviscid_face_fluxes(t);
  }
  const double gamma = scheme_.gas.gamma;
  const bool lobatto = basis_.kind() == NodeKind::GaussLobatto;
  const bool vreman = scheme_.uses_vreman();
  const double cv = scheme_.vreman_constant;
  const auto dmat = basis_.diff_matrix();
  const auto wts = basis_.weights();
  const auto lm = basis_.left_interp();
  const auto lp = basis_.right_interp();
  const int ne = static_cast<int>(mesh_.num_elements());
#pragma omp parallel num_threads(parallel_.threads)
  {
    std::vector<std::array<double, 4>> w(n3_);
    std::vector<NodeGradient> jq(n3_);
#pragma omp for schedule(static)
    for (int e = 0; e < ne; ++e) {
      const auto& em = mesh_.metrics[e];
      const State* u = &q.u[std::size_t(e) * n3_];
      for (int p = 0; p < n3_; ++p) w[p] = primitive_w(u[p], gamma);
      // Volume term: sum_d J a^d (D_d w).
      for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j)
          for (int i = 0; i < n_; ++i) {
            const int p = idx3(i, j, k, n_);
            double dw[3][4] = {};
            for (int m = 0; m < n_; ++m) {
              const double d0 = dmat[i * n_ + m];
              const double d1 = dmat[j * n_ + m];
              const double d2 = dmat[k * n_ + m];
              const auto& w0 = w[idx3(m, j, k, n_)];
              const auto& w1 = w[idx3(i, m, k, n_)];
              const auto& w2 = w[idx3(i, j, m, n_)];
              for (int v = 0; v < 4; ++v) {
                dw[0][v] += d0 * w0[v];
                dw[1][v] += d1 * w1[v];
                dw[2][v] += d2 * w2[v];
              }
            }
            NodeGradient& g = jq[p];
            for (int x = 0; x < 3; ++x)
              for (int v = 0; v < 4; ++v)
                g[4 * x + v] = em.ja[p][0][x] * dw[0][v] + em.ja[p][1][x] * dw[1][v] +
                               em.ja[p][2][x] * dw[2][v];
          }
      // Surface lifting of (w* - w^-).
      for (int s = 0; s < kNumSides; ++s) {
        const int d = side_direction(s);
        const int stride = d == 0 ? 1 : (d == 1 ? n_ : nf_);
        const int off = side_offset(e, s);
        const auto& fm = em.faces[s];
        const auto& ends = s % 2 == 0 ? lm : lp;
        for (int f = 0; f < nf_; ++f) {
          const auto& ws = wstar_[off + f];
          const auto& wm = wf_[off + f];
          double jump[3][4];
          for (int x = 0; x < 3; ++x)
            for (int v = 0; v < 4; ++v) jump[x][v] = (ws[v] - wm[v]) * fm.scaled_normal[f][x];
          const int base = face_volume_node_[s][f];
          for (int m = 0; m < n_; ++m) {
            const double c = ends[m] / wts[m];
            if (c == 0.0) continue;
            NodeGradient& g = jq[base + m * stride];
            for (int x = 0; x < 3; ++x)
              for (int v = 0; v < 4; ++v) g[4 * x + v] += c * jump[x][v];
          }
        }
      }
      for (int p = 0; p < n3_; ++p) {
        const double inv = 1.0 / em.jac[p];
        NodeGradient& g = q.grad[std::size_t(e) * n3_ + p];
        for (int c = 0; c < 12; ++c) g[c] = jq[p][c] * inv;
        q.mu_t[std::size_t(e) * n3_ + p] =
            vreman ? vreman_from_gradient(g, u[p][0], delta_[e], cv) : 0.0;
      }
      // Face traces of the gradient.
      const NodeGradient* gq = &q.grad[std::size_t(e) * n3_];
      for (int s = 0; s < kNumSides; ++s) {
        const int d = side_direction(s);
        const int stride = d == 0 ? 1 : (d == 1 ? n_ : nf_);
        const int off = side_offset(e, s);
        const auto& ends = s % 2 == 0 ? lm : lp;
        for (int f = 0; f < nf_; ++f) {
          const int base = face_volume_node_[s][f];
          const double* mt = &q.mu_t[std::size_t(e) * n3_];
          NodeGradient gs{};
          double ms = 0.0;
          if (lobatto) {
            const int node = base + (s % 2 == 0 ? 0 : (n_ - 1) * stride);
            gs = gq[node];
            ms = mt[node];
          } else {
            for (int m = 0; m < n_; ++m) {
              const double c = ends[m];
              const auto& gm = gq[base + m * stride];
              for (int v = 0; v < 12; ++v) gs[v] += c * gm[v];
              ms += c * mt[base + m * stride];
            }
          }
          qf_[off + f] = gs;
          muf_[off + f] = vreman ? std::max(ms, 0.0) : 0.0;
        }
      }
    }
  }
}

void Solver::compute_gradients(SolutionField& q, double t) const {
  gradients_impl(q, t, false);
}

// Phase 4: BR1 viscous interface fluxes (outward, scaled by J_s).
void Solver::viscous_face_fluxes() const {
  const GasModel& gas = scheme_.gas;
  const int nl = static_cast<int>(links_.size());
#pragma omp parallel for schedule(static) num_threads(parallel_.threads)
  for (int li = 0; li < nl; ++li) {
    const FaceLink& L = links_[li];
    const FaceMetrics& fm = mesh_.metrics[L.elem_l].faces[L.side_l];
    const int offl = side_offset(L.elem_l, L.side_l);
    const bool boundary = L.elem_r < 0;
    const int offr = boundary ? -1 : side_offset(L.elem_r, L.side_r);
    const BCKind kind = boundary ? mesh_.patches[L.patch].kind : BCKind::Periodic;
    for (int f = 0; f < nf_; ++f) {
      const Vec3& nrm = fm.scaled_normal[f];
      State flux{};
      const auto& wl = wstar_[offl + f];
      if (!boundary) {
        const int fr = offr + L.perm[f];
        const auto& wa = wf_[offl + f];
        const auto& wb = wf_[fr];
        State fa, fb;
        viscous_flux_dir({wa[0], wa[1], wa[2]}, qf_[offl + f], muf_[offl + f], gas, nrm, true,
                         fa.data());
        viscous_flux_dir({wb[0], wb[1], wb[2]}, qf_[fr], muf_[fr], gas, nrm, true, fb.data());
        for (int v = 0; v < kNumVars; ++v) flux[v] = 0.5 * (fa[v] + fb[v]);
      } else if (kind == BCKind::FreeSlipWall) {
        // zero shear and heat flux
      } else {
        const bool heat = !(kind == BCKind::NoSlipWall || kind == BCKind::MovingWall);
        viscous_flux_dir({wl[0], wl[1], wl[2]}, qf_[offl + f], muf_[offl + f], gas, nrm, heat,
                         flux.data());
      }
      vstar_[offl + f] = flux;
      if (!boundary) vstar_[offr + L.perm[f]] = -1.0 * flux;
    }
  }
}

void Solver::spatial_operator(SolutionField& q, double t, std::vector<State>& dqdt) const {
  const GasModel& gas = scheme_.gas;
  const bool viscous = scheme_.viscous();
  const bool lobatto = basis_.kind() == NodeKind::GaussLobatto;
  face_traces(q);
  inviscid_face_fluxes(t);
  if (viscous) {
    gradients_impl(q, t, true);
    viscous_face_fluxes();
  }
  dqdt.resize(q.u.size());
  const auto dmat = basis_.diff_matrix();
  const auto wts = basis_.weights();
  const auto lm = basis_.left_interp();
  const auto lp = basis_.right_interp();
  std::vector<double> dhat(nf_);
  for (int i = 0; i < n_; ++i)
    for (int m = 0; m < n_; ++m) dhat[i * n_ + m] = basis_.diff_hat(i, m);
  const int ne = static_cast<int>(mesh_.num_elements());
  const int n = n_;

#pragma omp parallel num_threads(parallel_.threads)
  {
    // Contravariant volume fluxes per direction (weak-form part).
    std::vector<State> ft(3 * n3_);
    std::vector<kernels::NodeState> ns(n3_);
    std::vector<State> res(n3_);
#pragma omp for schedule(static)
    for (int e = 0; e < ne; ++e) {
      const auto& em = mesh_.metrics[e];
      const State* u = &q.u[std::size_t(e) * n3_];
      const NodeGradient* g = &q.grad[std::size_t(e) * n3_];
      const double* mut = &q.mu_t[std::size_t(e) * n3_];
      for (int p = 0; p < n3_; ++p) {
        res[p] = State{};
        ns[p] = kernels::node_state(u[p], gas.gamma);
      }

      // Weak-form volume flux: Euler (Gauss only) minus viscous.
      const bool weak_any = !lobatto || viscous;
      if (weak_any) {
        for (int p = 0; p < n3_; ++p) {
          for (int d = 0; d < 3; ++d) {
            State& fd = ft[d * n3_ + p];
            const Vec3& ja = em.ja[p][d];
            if (!lobatto) {
              kernels::euler_flux_dir(u[p], ns[p], ja, fd.data());
            } else {
              fd = State{};
            }
            if (viscous) {
              State fv;
              viscous_flux_dir(ns[p].v, g[p], mut[p], gas, ja, true, fv.data());
              for (int v = 1; v < kNumVars; ++v) fd[v] -= fv[v];
            }
          }
        }
        // res_i -= sum_m Dhat_im Ft_m along each direction.
        for (int k = 0; k < n; ++k)
          for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
              State acc{};
              for (int m = 0; m < n; ++m) {
                const double c0 = dhat[i * n + m];
                const double c1 = dhat[j * n + m];
                const double c2 = dhat[k * n + m];
                const State& f0 = ft[0 * n3_ + idx3(m, j, k, n)];
                const State& f1 = ft[1 * n3_ + idx3(i, m, k, n)];
                const State& f2 = ft[2 * n3_ + idx3(i, j, m, n)];
                for (int v = 0; v < kNumVars; ++v) acc[v] += c0 * f0[v] + c1 * f1[v] + c2 * f2[v];
              }
              State& r = res[idx3(i, j, k, n)];
              for (int v = 0; v < kNumVars; ++v) r[v] -= acc[v];
            }
      }

      if (lobatto) {
        // Split-form volume term: sum_m 2 D_im F#(u_i, u_m; {{J a^d}}).
        double fl[kNumVars];
        for (int d = 0; d < 3; ++d) {
          const int stride = d == 0 ? 1 : (d == 1 ? n : nf_);
          const auto [t1, t2] = tangent_directions(d);
          const int s1 = t1 == 0 ? 1 : (t1 == 1 ? n : nf_);
          const int s2 = t2 == 0 ? 1 : (t2 == 1 ? n : nf_);
          for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
              const int base = a * s1 + b * s2;
              for (int i = 0; i < n; ++i) {
                const int pi = base + i * stride;
                const Vec3& jai = em.ja[pi][d];
                const double dii = dmat[i * n + i];
                if (dii != 0.0) {
                  kernels::kg_flux(ns[pi], ns[pi], jai, fl);
                  for (int v = 0; v < kNumVars; ++v) res[pi][v] -= 2.0 * dii * fl[v];
                }
                for (int m = i + 1; m < n; ++m) {
                  const int pm = base + m * stride;
                  const Vec3& jam = em.ja[pm][d];
                  const Vec3 avg{0.5 * (jai[0] + jam[0]), 0.5 * (jai[1] + jam[1]),
                                 0.5 * (jai[2] + jam[2])};
                  kernels::kg_flux(ns[pi], ns[pm], avg, fl);
                  const double cim = 2.0 * dmat[i * n + m];
                  const double cmi = 2.0 * dmat[m * n + i];
                  for (int v = 0; v < kNumVars; ++v) {
                    res[pi][v] -= cim * fl[v];
                    res[pm][v] -= cmi * fl[v];
                  }
                }
              }
            }
        }
      }

      // Surface terms.
      for (int s = 0; s < kNumSides; ++s) {
        const int d = side_direction(s);
        const int stride = d == 0 ? 1 : (d == 1 ? n : nf_);
        const int off = side_offset(e, s);
        const auto& ends = s % 2 == 0 ? lm : lp;
        const double sign = side_sign(s);
        for (int f = 0; f < nf_; ++f) {
          const int base = face_volume_node_[s][f];
          const State& fs = fstar_[off + f];
          if (lobatto) {
            const int pn = base + (s % 2 == 0 ? 0 : (n - 1) * stride);
            const double c = 1.0 / wts[s % 2 == 0 ? 0 : n - 1];
            const Vec3& ja = em.ja[pn][d];
            double fp[kNumVars];
            kernels::euler_flux_dir(u[pn], ns[pn], Vec3{sign * ja[0], sign * ja[1], sign * ja[2]},
                                    fp);
            for (int v = 0; v < kNumVars; ++v) res[pn][v] -= c * (fs[v] - fp[v]);
            if (viscous) {
              const State& vs = vstar_[off + f];
              for (int v = 0; v < kNumVars; ++v) res[pn][v] += c * vs[v];
            }
          } else {
            State tot = fs;
            if (viscous) tot = tot - vstar_[off + f];
            for (int m = 0; m < n; ++m) {
              const double c = ends[m] / wts[m];
              State& r = res[base + m * stride];
              for (int v = 0; v < kNumVars; ++v) r[v] -= c * tot[v];
            }
          }
        }
      }

      State* out = &dqdt[std::size_t(e) * n3_];
      for (int p = 0; p < n3_; ++p) {
        const double inv = 1.0 / em.jac[p];
        for (int v = 0; v < kNumVars; ++v) out[p][v] = res[p][v] * inv;
      }
    }
  }
}

double Solver::compute_dt(const SolutionField& q, double cfl) const {
  const GasModel& gas = scheme_.gas;
  const int ne = static_cast<int>(mesh_.num_elements());
  std::vector<double> emin(ne, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static) num_threads(parallel_.threads)
  for (int e = 0; e < ne; ++e) {
    double best = std::numeric_limits<double>::infinity();
    for (int p = 0; p < n3_; ++p) {
      const std::size_t idx = std::size_t(e) * n3_ + p;
      const State& u = q.u[idx];
      const auto s = kernels::node_state(u, gas.gamma);
      const double dx = dx_eff_[idx];
      best = std::min(best, dx / (norm(s.v) + s.a));
      const double nu = (gas.mu + q.mu_t[idx]) / s.rho;
      if (nu > 0.0) best = std::min(best, dx * dx / (kViscousDtConstant * nu));
    }
    emin[e] = best;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double v : emin) best = std::min(best, v);
  return cfl * best;
}

void Solver::rk3_step(SolutionField& q, double t, double dt, long step) const {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  std::vector<State> dq;
  std::vector<double> g;
  std::vector<double> dqflat;
  auto qspan = std::span<double>(reinterpret_cast<double*>(q.u.data()), q.u.size() * kNumVars);
  const double gamma = scheme_.gas.gamma;
  RK3Scheme::step(
      qspan, t, dt, g, dqflat,
      [&](std::span<const double>, double ts, std::span<double> out) {
        try {
          spatial_operator(q, ts, dq);
        } catch (const StateError& err) {
          throw DivergenceError(std::string("divergence: ") + err.what(), -1, step);
        }
        std::copy_n(reinterpret_cast<const double*>(dq.data()), out.size(), out.data());
      },
      [&](int stage) {
        for (std::size_t i = 0; i < q.u.size(); ++i)
          if (!valid_state(q.u[i], gamma)) {
            std::ostringstream os;
            os << "divergence at step " << step << ", RK stage " << stage << ": element "
               << i / n3_ << ", node " << i % n3_ << " has density " << q.u[i][0]
               << ", pressure " << pressure(q.u[i], scheme_.gas);
            throw DivergenceError(os.str(), stage, step);
          }
      });
}

Totals Solver::totals(const SolutionField& q) const {
  const int ne = static_cast<int>(mesh_.num_elements());
  std::vector<Totals> part(ne);
  auto element = [&](int e) {
    Totals t;
    const auto& em = mesh_.metrics[e];
    for (int p = 0; p < n3_; ++p) {
      const double jw = em.jac[p] * weights3_[p];
      const State& u = q.at(e, p);
      for (int v = 0; v < kNumVars; ++v) {
        t.conserved[v] += jw * u[v];
        t.magnitude[v] += jw * std::abs(u[v]);
      }
      t.kinetic_energy += jw * 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / u[0];
      t.volume += jw;
    }
    return t;
  };
  auto add = [](Totals& a, const Totals& b) {
    for (int v = 0; v < kNumVars; ++v) {
      a.conserved[v] += b.conserved[v];
      a.magnitude[v] += b.magnitude[v];
    }
    a.kinetic_energy += b.kinetic_energy;
    a.volume += b.volume;
  };
  Totals sum;
  if (parallel_.deterministic) {
#pragma omp parallel for schedule(static) num_threads(parallel_.threads)
    for (int e = 0; e < ne; ++e) part[e] = element(e);
    for (const auto& t : part) add(sum, t);
  } else {
#pragma omp parallel num_threads(parallel_.threads)
    {
      Totals local;
#pragma omp for schedule(static) nowait
      for (int e = 0; e < ne; ++e) add(local, element(e));
#pragma omp critical
      add(sum, local);
    }
  }
  return sum;
}

RunReport Solver::run(
    SolutionField& q, const RunControl& control,
    const std::function<void(const StepInfo&, SolutionField&)>& on_step) const {
  using clock = std::chrono::steady_clock;
  RunReport report;
  double t = control.start_time;
  long step = control.start_step;
  if (control.fixed_dt && !(*control.fixed_dt > 0.0))
    throw ConfigError("fixed time step must be positive");
  SolutionField last = q;
  double dt_sum = 0.0;
  report.min_dt = std::numeric_limits<double>::infinity();
  double wall = 0.0;
  constexpr double kTimeEps = 1e-12;
  while (true) {
    if (control.n_steps && report.iterations >= *control.n_steps) break;
    if (control.t_end && t >= *control.t_end * (1.0 - kTimeEps)) break;
    if (!control.n_steps && !control.t_end) break;
    const auto t0 = clock::now();
    double dt = control.fixed_dt ? *control.fixed_dt : compute_dt(q, control.cfl);
    if (control.t_end && t + dt > *control.t_end) dt = *control.t_end - t;
    last.u = q.u;
    try {
      rk3_step(q, t, dt, step);
    } catch (const DivergenceError&) {
      q.u = last.u;
      throw;
    }
    wall += std::chrono::duration<double>(clock::now() - t0).count();
    t += dt;
    ++step;
    ++report.iterations;
    dt_sum += dt;
    report.min_dt = std::min(report.min_dt, dt);
    if (on_step) on_step(StepInfo{step, t, dt}, q);
  }
  report.final_time = t;
  report.final_step = step;
  report.wall_seconds = wall;
  if (report.iterations > 0) {
    report.seconds_per_iteration = wall / report.iterations;
    report.mean_dt = dt_sum / report.iterations;
    report.hours_per_ctu = control.ctu / report.mean_dt * report.seconds_per_iteration / 3600.0;
  } else {
    report.min_dt = 0.0;
  }
  return report;
}

}  // namespace dgles
