#include "dgles/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "dgles/error.hpp"
#include "tensor.hpp"

namespace dgles {

using detail::idx3;

void CompensatedSum::add(double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x))
    comp += (sum - t) + x;
  else
    comp += (x - t) + sum;
  sum = t;
}

void CompensatedSum::merge(const CompensatedSum& other) {
  add(other.sum);
  comp += other.comp;
}

StatisticsAccumulator::StatisticsAccumulator(std::size_t num_nodes)
    : num_nodes_(num_nodes), sums_(num_nodes * kChannels) {}

void StatisticsAccumulator::add_sample(std::span<const double> values, double time) {
  if (values.size() != num_nodes_ * kChannels)
    throw ConfigError("statistics sample has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(num_nodes_ * kChannels));
  for (std::size_t i = 0; i < values.size(); ++i) sums_[i].add(values[i]);
  if (count_ == 0) start_time_ = time;
  stop_time_ = time;
  ++count_;
}

void StatisticsAccumulator::accumulate(const SolutionField& q, const GasModel& gas,
                                       double time) {
  if (q.u.size() != num_nodes_)
    throw ConfigError("statistics accumulator size does not match the field");
  const bool have_grad = q.grad.size() == q.u.size();
  for (std::size_t n = 0; n < num_nodes_; ++n) {
    const State& u = q.u[n];
    const double rho = u[0];
    const double vx = u[1] / rho, vy = u[2] / rho, vz = u[3] / rho;
    CompensatedSum* s = &sums_[n * kChannels];
    s[0].add(vx);
    s[1].add(vy);
    s[2].add(vz);
    s[kUU].add(vx * vx);
    s[kVV].add(vy * vy);
    s[kWW].add(vz * vz);
    s[kUV].add(vx * vy);
    s[kUW].add(vx * vz);
    s[kVW].add(vy * vz);
    s[kP].add(pressure(u, gas));
    s[kRho].add(rho);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s[kGrad + 3 * i + j].add(have_grad ? q.grad[n][4 * i + j] : 0.0);
  }
  if (count_ == 0) start_time_ = time;
  stop_time_ = time;
  ++count_;
}

void StatisticsAccumulator::merge(const StatisticsAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.num_nodes_ != num_nodes_)
    throw ConfigError("cannot merge statistics over different node sets");
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].merge(other.sums_[i]);
  start_time_ = std::min(start_time_, other.start_time_);
  stop_time_ = std::max(stop_time_, other.stop_time_);
  count_ += other.count_;
}

double StatisticsAccumulator::mean(std::size_t node, int channel) const {
  return count_ > 0 ? sums_[node * kChannels + channel].value() / double(count_) : 0.0;
}

void StatisticsAccumulator::restore(std::size_t num_nodes, long count, double start,
                                    double stop, std::vector<CompensatedSum> sums) {
  if (sums.size() != num_nodes * kChannels)
    throw ValidationError("statistics block has the wrong size");
  num_nodes_ = num_nodes;
  count_ = count;
  start_time_ = start;
  stop_time_ = stop;
  sums_ = std::move(sums);
}

MeanFields finalize(const StatisticsAccumulator& acc) {
  if (acc.count() < 2)
    throw InsufficientDataError("statistics need at least 2 samples, have " +
                                std::to_string(acc.count()));
  using A = StatisticsAccumulator;
  const std::size_t nn = acc.num_nodes();
  MeanFields out;
  out.samples = acc.count();
  out.velocity.resize(nn);
  out.reynolds_stress.resize(nn);
  out.u_rms.resize(nn);
  out.tke.resize(nn);
  out.pressure.resize(nn);
  out.density.resize(nn);
  out.gradient.assign(nn, NodeGradient{});
  for (std::size_t n = 0; n < nn; ++n) {
    const Vec3 m{acc.mean(n, 0), acc.mean(n, 1), acc.mean(n, 2)};
    out.velocity[n] = m;
    auto& r = out.reynolds_stress[n];
    r[0] = std::max(0.0, acc.mean(n, A::kUU) - m[0] * m[0]);
    r[1] = std::max(0.0, acc.mean(n, A::kVV) - m[1] * m[1]);
    r[2] = std::max(0.0, acc.mean(n, A::kWW) - m[2] * m[2]);
    r[3] = acc.mean(n, A::kUV) - m[0] * m[1];
    r[4] = acc.mean(n, A::kUW) - m[0] * m[2];
    r[5] = acc.mean(n, A::kVW) - m[1] * m[2];
    out.u_rms[n] = std::sqrt(r[0]);
    out.tke[n] = 0.5 * (r[0] + r[1] + r[2]);
    out.pressure[n] = acc.mean(n, A::kP);
    out.density[n] = acc.mean(n, A::kRho);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.gradient[n][4 * i + j] = acc.mean(n, A::kGrad + 3 * i + j);
  }
  return out;
}

double pressure_coefficient(double p, const FlowReference& ref) {
  return (p - ref.pressure) / (0.5 * ref.rho * ref.velocity * ref.velocity);
}

double skin_friction_coefficient(double tau_w, const FlowReference& ref) {
  return 2.0 * tau_w / (ref.rho * ref.velocity * ref.velocity);
}

namespace {

bool is_wall(BCKind kind) {
  return kind == BCKind::NoSlipWall || kind == BCKind::MovingWall ||
         kind == BCKind::FreeSlipWall;
}

// Viscous stress tensor from alpha[i][j] = d v_j / d x_i (no bulk viscosity).
Mat3 viscous_stress(const NodeGradient& g, double mu) {
  const double div = g[0] + g[5] + g[10];
  Mat3 tau{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      tau[i][j] = mu * (g[4 * i + j] + g[4 * j + i]) - (i == j ? 2.0 / 3.0 * mu * div : 0.0);
  return tau;
}

Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

NodeGradient operator+(const NodeGradient& a, const NodeGradient& b) {
  NodeGradient r;
  for (int i = 0; i < 12; ++i) r[i] = a[i] + b[i];
  return r;
}
NodeGradient operator*(double s, const NodeGradient& a) {
  NodeGradient r;
  for (int i = 0; i < 12; ++i) r[i] = s * a[i];
  return r;
}

// Interpolation of nodal data of element e onto the face nodes of side s.
struct FaceSampler {
  const BasisSet& basis;
  int n;
  int nf;

  template <class T, class Get>
  T at(int s, int a, int b, Get&& get) const {
    const int d = side_direction(s);
    const auto [t1, t2] = tangent_directions(d);
    const auto& ends = s % 2 == 0 ? basis.left_interp() : basis.right_interp();
    T acc{};
    for (int m = 0; m < n; ++m) {
      const double c = ends[m];
      if (c == 0.0) continue;
      int idx[3];
      idx[d] = m;
      idx[t1] = a;
      idx[t2] = b;
      acc = acc + c * get(idx3(idx[0], idx[1], idx[2], n));
    }
    return acc;
  }
};

// Boundary faces on the named patches as (face index, patch position).
std::vector<std::pair<int, int>> selected_faces(const Mesh& mesh,
                                                const std::vector<std::string>& patches,
                                                bool walls_only) {
  if (patches.empty()) throw ConfigError("no patches selected");
  std::vector<int> ids;
  for (const auto& name : patches) {
    const int id = mesh.patch_index(name);
    if (id < 0) throw ConfigError("unknown patch '" + name + "'");
    if (walls_only && !is_wall(mesh.patches[id].kind))
      throw ConfigError("patch '" + name + "' is " +
                        std::string(to_string(mesh.patches[id].kind)) + ", not a wall");
    ids.push_back(id);
  }
  std::vector<std::pair<int, int>> out;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    if (!face.is_boundary()) continue;
    for (std::size_t k = 0; k < ids.size(); ++k)
      if (face.patch == ids[k]) out.emplace_back(int(f), int(k));
  }
  return out;
}

}  // namespace

SurfaceRecord build_surface_record(const Mesh& mesh, const BasisSet& basis,
                                   const std::vector<std::string>& patches,
                                   std::span<const double> pressure,
                                   std::span<const double> density,
                                   std::span<const NodeGradient> gradient, double mu,
                                   const SurfaceFrame& frame) {
  const auto faces = selected_faces(mesh, patches, true);
  const int n = basis.size();
  const int n3 = n * n * n;
  const FaceSampler fs{basis, n, n * n};
  const auto w = basis.weights();
  const bool lobatto = basis.kind() == NodeKind::GaussLobatto;
  SurfaceRecord rec;
  rec.patch_names = patches;
  for (const auto& [fid, pk] : faces) {
    const Face& face = mesh.faces[fid];
    const int e = face.left_elem;
    const int s = face.left_side;
    const int d = side_direction(s);
    const auto [t1, t2] = tangent_directions(d);
    const auto& em = mesh.metrics[e];
    const auto& fm = em.faces[s];
    const std::size_t base = std::size_t(e) * n3;
    const bool slip = mesh.patches[face.patch].kind == BCKind::FreeSlipWall;
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        const int f = a + n * b;
        SurfaceNode node;
        node.patch = pk;
        node.x = fm.x[f];
        node.normal = -1.0 * fm.normal[f];
        node.weight = fm.area[f] * w[a] * w[b];
        node.x_over_c = dot(node.x - frame.origin, frame.flow_axis) / frame.chord;
        node.pressure = fs.at<double>(s, a, b, [&](int p) { return pressure[base + p]; });
        node.density = density.empty()
                           ? 1.0
                           : fs.at<double>(s, a, b, [&](int p) { return density[base + p]; });
        if (!slip && !gradient.empty()) {
          const NodeGradient g =
              fs.at<NodeGradient>(s, a, b, [&](int p) { return gradient[base + p]; });
          const Vec3 t = mat_vec(viscous_stress(g, mu), node.normal);
          node.tau_w = t - dot(t, node.normal) * node.normal;
        }
        Vec3 stream = frame.flow_axis - dot(frame.flow_axis, node.normal) * node.normal;
        const double sn = norm(stream);
        node.tau_signed = sn > 0.0 ? dot(node.tau_w, (1.0 / sn) * stream) : 0.0;

        // Wall-normal line: second Lobatto node, first Gauss node.
        int idx[3];
        idx[t1] = a;
        idx[t2] = b;
        const int m = lobatto ? 1 : 0;
        idx[d] = s % 2 == 0 ? m : n - 1 - m;
        const Vec3 xn = em.x[idx3(idx[0], idx[1], idx[2], n)];
        node.wall_distance = std::abs(dot(xn - node.x, node.normal));

        // Spacing to the neighbouring face node along the tangent closest to the flow.
        if (n > 1) {
          const int an = a + 1 < n ? a + 1 : a - 1;
          const int bn = b + 1 < n ? b + 1 : b - 1;
          const Vec3 da = fm.x[an + n * b] - node.x;
          const Vec3 db = fm.x[a + n * bn] - node.x;
          const double ca = std::abs(dot(da, frame.flow_axis)) / std::max(norm(da), 1e-300);
          const double cb = std::abs(dot(db, frame.flow_axis)) / std::max(norm(db), 1e-300);
          node.streamwise_spacing = ca >= cb ? norm(da) : norm(db);
        }
        rec.nodes.push_back(node);
      }
  }
  return rec;
}

std::vector<double> surface_cp(const SurfaceRecord& record, const FlowReference& ref) {
  if (!(ref.rho > 0.0) || !(ref.velocity > 0.0))
    throw ConfigError("reference density and velocity must be positive");
  std::vector<double> out;
  out.reserve(record.nodes.size());
  for (const auto& n : record.nodes) out.push_back(pressure_coefficient(n.pressure, ref));
  return out;
}

std::vector<double> surface_cf(const SurfaceRecord& record, const FlowReference& ref) {
  if (!(ref.rho > 0.0) || !(ref.velocity > 0.0))
    throw ConfigError("reference density and velocity must be positive");
  std::vector<double> out;
  out.reserve(record.nodes.size());
  for (const auto& n : record.nodes) out.push_back(skin_friction_coefficient(n.tau_signed, ref));
  return out;
}

std::vector<std::array<double, 2>> wall_units(const SurfaceRecord& record, double mu) {
  std::vector<std::array<double, 2>> out;
  out.reserve(record.nodes.size());
  for (const auto& n : record.nodes) {
    if (mu <= 0.0) {
      out.push_back({0.0, 0.0});
      continue;
    }
    const double u_tau = std::sqrt(norm(n.tau_w) / n.density);
    const double nu = mu / n.density;
    out.push_back({u_tau * n.wall_distance / nu, u_tau * n.streamwise_spacing / nu});
  }
  return out;
}

SurfaceCoefficients span_average(const SurfaceRecord& record, const FlowReference& ref,
                                 double mu, const SurfaceFrame& frame) {
  const auto cp = surface_cp(record, ref);
  const auto cf = surface_cf(record, ref);
  const auto wu = wall_units(record, mu);
  struct Acc {
    double cp = 0, cf = 0, yp = 0, xp = 0, xc = 0;
    int count = 0;
  };
  // Key: patch, then position with the span coordinate removed, rounded.
  using Key = std::tuple<int, long long, long long, long long>;
  std::map<Key, Acc> groups;
  const double scale = 1e9 / std::max(frame.chord, 1e-300);
  for (std::size_t i = 0; i < record.nodes.size(); ++i) {
    const auto& nd = record.nodes[i];
    const Vec3 r = nd.x - frame.origin;
    const Vec3 planar = r - dot(r, frame.span_axis) * frame.span_axis;
    const Key key{nd.patch, std::llround(planar[0] * scale), std::llround(planar[1] * scale),
                  std::llround(planar[2] * scale)};
    Acc& acc = groups[key];
    acc.cp += cp[i];
    acc.cf += cf[i];
    acc.yp += wu[i][0];
    acc.xp += wu[i][1];
    acc.xc += nd.x_over_c;
    ++acc.count;
  }
  std::vector<std::pair<std::pair<int, double>, Acc>> rows;
  for (const auto& [key, acc] : groups)
    rows.push_back({{std::get<0>(key), acc.xc / acc.count}, acc});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  SurfaceCoefficients out;
  for (const auto& [k, acc] : rows) {
    const double c = acc.count;
    out.patch.push_back(k.first);
    out.x_over_c.push_back(k.second);
    out.cp.push_back(acc.cp / c);
    out.cf.push_back(acc.cf / c);
    out.yplus.push_back(acc.yp / c);
    out.xplus.push_back(acc.xp / c);
  }
  return out;
}

ForceCoefficients integrate_forces(const Mesh& mesh, const BasisSet& basis,
                                   const std::vector<std::string>& patches,
                                   std::span<const double> pressure,
                                   std::span<const NodeGradient> gradient, double mu,
                                   const ForceReference& ref, const SurfaceFrame& frame) {
  const auto faces = selected_faces(mesh, patches, false);
  const int n = basis.size();
  const int n3 = n * n * n;
  const FaceSampler fs{basis, n, n * n};
  const auto w = basis.weights();
  ForceCoefficients out;
  out.patches = patches;
  out.force.assign(patches.size(), Vec3{0, 0, 0});
  for (const auto& [fid, pk] : faces) {
    const Face& face = mesh.faces[fid];
    const int e = face.left_elem;
    const int s = face.left_side;
    const auto& fm = mesh.metrics[e].faces[s];
    const std::size_t base = std::size_t(e) * n3;
    Vec3 sum{0, 0, 0};
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        const int f = a + n * b;
        const double p = fs.at<double>(s, a, b, [&](int q) { return pressure[base + q]; });
        Vec3 traction = p * fm.normal[f];
        if (!gradient.empty() && mu > 0.0) {
          const NodeGradient g =
              fs.at<NodeGradient>(s, a, b, [&](int q) { return gradient[base + q]; });
          traction = traction - mat_vec(viscous_stress(g, mu), fm.normal[f]);
        }
        sum = sum + (fm.area[f] * w[a] * w[b]) * traction;
      }
    out.force[pk] = out.force[pk] + sum;
  }
  const double qa = 0.5 * ref.rho * ref.velocity * ref.velocity * ref.area;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    out.cd.push_back(dot(out.force[k], frame.flow_axis) / qa);
    out.cl.push_back(dot(out.force[k], frame.lift_axis) / qa);
    out.total_force = out.total_force + out.force[k];
    out.cd_total += out.cd.back();
    out.cl_total += out.cl.back();
  }
  return out;
}

ForceCoefficients integrate_forces(const Mesh& mesh, const BasisSet& basis,
                                   const std::vector<std::string>& patches,
                                   const SolutionField& q, const GasModel& gas,
                                   const ForceReference& ref, const SurfaceFrame& frame) {
  std::vector<double> p(q.u.size());
  for (std::size_t i = 0; i < q.u.size(); ++i) p[i] = pressure(q.u[i], gas);
  return integrate_forces(mesh, basis, patches, p, q.grad, gas.mu, ref, frame);
}

namespace {

struct Bounds {
  Vec3 lo, hi;
};

Bounds element_bounds(const std::vector<Vec3>& nodes) {
  Bounds b{nodes[0], nodes[0]};
  for (const auto& x : nodes)
    for (int c = 0; c < 3; ++c) {
      b.lo[c] = std::min(b.lo[c], x[c]);
      b.hi[c] = std::max(b.hi[c], x[c]);
    }
  // Curved edges can bulge past the control nodes.
  double ext = 0.0;
  for (int c = 0; c < 3; ++c) ext = std::max(ext, b.hi[c] - b.lo[c]);
  for (int c = 0; c < 3; ++c) {
    b.lo[c] -= 0.25 * ext;
    b.hi[c] += 0.25 * ext;
  }
  return b;
}

bool solve3(const Mat3& a, const Vec3& r, Vec3& x) {
  const double det = dot(a[0], cross(a[1], a[2]));
  if (std::abs(det) < 1e-300) return false;
  // Columns of the inverse via Cramer's rule on rows.
  const Vec3 c0 = cross(a[1], a[2]), c1 = cross(a[2], a[0]), c2 = cross(a[0], a[1]);
  for (int i = 0; i < 3; ++i) x[i] = (c0[i] * r[0] + c1[i] * r[1] + c2[i] * r[2]) / det;
  return true;
}

}  // namespace

std::optional<PointLocation> locate_point(const Mesh& mesh, const Vec3& x) {
  constexpr double kTol = 1e-10;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Bounds bb = element_bounds(mesh.geometry[e]);
    bool inside = true;
    for (int c = 0; c < 3; ++c)
      if (x[c] < bb.lo[c] || x[c] > bb.hi[c]) inside = false;
    if (!inside) continue;
    Vec3 xi{0, 0, 0};
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const Vec3 r = mesh.map_point(e, xi) - x;
      double scale = 0.0;
      for (int c = 0; c < 3; ++c) scale = std::max(scale, bb.hi[c] - bb.lo[c]);
      if (norm(r) <= 1e-14 * scale) {
        ok = true;
        break;
      }
      // Rows: d x_c / d xi_k arranged so that J dxi = -r.
      Mat3 jac{};
      constexpr double h = 1e-6;
      for (int k = 0; k < 3; ++k) {
        Vec3 xp = xi, xm = xi;
        xp[k] += h;
        xm[k] -= h;
        const Vec3 dx = (1.0 / (2.0 * h)) * (mesh.map_point(e, xp) - mesh.map_point(e, xm));
        for (int c = 0; c < 3; ++c) jac[c][k] = dx[c];
      }
      Vec3 step;
      if (!solve3(jac, -1.0 * r, step)) break;
      xi = xi + step;
      if (norm(xi) > 10.0) break;
      if (norm(step) < 1e-15) {
        ok = true;
        break;
      }
    }
    if (!ok) continue;
    if (std::abs(xi[0]) <= 1.0 + kTol && std::abs(xi[1]) <= 1.0 + kTol &&
        std::abs(xi[2]) <= 1.0 + kTol) {
      for (double& c : xi) c = std::clamp(c, -1.0, 1.0);
      return PointLocation{e, xi};
    }
  }
  return std::nullopt;
}

double evaluate_at(const BasisSet& basis, std::span<const double> field,
                   const PointLocation& loc) {
  const int n = basis.size();
  const auto l0 = basis.lagrange_at(loc.xi[0]);
  const auto l1 = basis.lagrange_at(loc.xi[1]);
  const auto l2 = basis.lagrange_at(loc.xi[2]);
  const std::size_t base = loc.element * std::size_t(n * n * n);
  double acc = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double c = l1[j] * l2[k];
      for (int i = 0; i < n; ++i) acc += l0[i] * c * field[base + idx3(i, j, k, n)];
    }
  return acc;
}

std::vector<WakeProfile> sample_wake_profiles(const Mesh& mesh, const BasisSet& basis,
                                              const MeanFields& stats, const WakeLine& line,
                                              const SurfaceFrame& frame, double u_inf) {
  if (line.points < 2) throw ConfigError("wake line needs at least 2 points");
  std::vector<double> ux(stats.velocity.size());
  for (std::size_t i = 0; i < ux.size(); ++i) ux[i] = dot(stats.velocity[i], frame.flow_axis);
  std::vector<WakeProfile> out;
  for (double station : line.stations) {
    WakeProfile prof;
    prof.station = station;
    for (int k = 0; k < line.points; ++k) {
      const double yc = line.y_min + (line.y_max - line.y_min) * k / (line.points - 1);
      const Vec3 x = frame.origin + (station * frame.chord) * frame.flow_axis +
                     (yc * frame.chord) * frame.lift_axis + line.span_position * frame.span_axis;
      const auto loc = locate_point(mesh, x);
      if (!loc)
        throw RangeError("wake station x/c = " + std::to_string(station) +
                         " point y/c = " + std::to_string(yc) + " lies outside the mesh");
      prof.y_over_c.push_back(yc);
      prof.u_over_uinf.push_back(evaluate_at(basis, ux, *loc) / u_inf);
      prof.u_rms.push_back(evaluate_at(basis, stats.u_rms, *loc));
      prof.tke.push_back(evaluate_at(basis, stats.tke, *loc));
    }
    out.push_back(std::move(prof));
  }
  return out;
}

double q_criterion(const VelocityGradient& g) {
  // G_ij = d v_i / d x_j = alpha[j][i]
  double s2 = 0.0, o2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double gij = g.alpha[j][i];
      const double gji = g.alpha[i][j];
      const double s = 0.5 * (gij + gji);
      const double o = 0.5 * (gij - gji);
      s2 += s * s;
      o2 += o * o;
    }
  return 0.5 * (o2 - s2);
}

std::vector<double> q_criterion(const SolutionField& q) {
  std::vector<double> out(q.grad.size());
  for (std::size_t i = 0; i < q.grad.size(); ++i)
    out[i] = q_criterion(to_velocity_gradient(q.grad[i]));
  return out;
}

}  // namespace dgles
