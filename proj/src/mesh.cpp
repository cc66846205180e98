#include "dgles/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "dgles/error.hpp"
#include "tensor.hpp"

namespace dgles {

using detail::idx3;

namespace {
constexpr std::array<BCKind, 6> kAllKinds{BCKind::Inflow,       BCKind::Outflow,
                                          BCKind::FreeSlipWall, BCKind::NoSlipWall,
                                          BCKind::MovingWall,   BCKind::Periodic};
}

std::string_view to_string(BCKind kind) {
  switch (kind) {
    case BCKind::Inflow: return "Inflow";
    case BCKind::Outflow: return "Outflow";
    case BCKind::FreeSlipWall: return "FreeSlipWall";
    case BCKind::NoSlipWall: return "NoSlipWall";
    case BCKind::MovingWall: return "MovingWall";
    case BCKind::Periodic: return "Periodic";
  }
  return "?";
}

BCKind parse_bc_kind(std::string_view name) {
  for (BCKind k : kAllKinds)
    if (to_string(k) == name) return k;
  std::string legal;
  for (BCKind k : kAllKinds) {
    if (!legal.empty()) legal += ", ";
    legal += to_string(k);
  }
  throw ValidationError("unknown boundary condition tag '" + std::string(name) +
                        "'; legal tags: " + legal);
}

int map_face_node(int a, int b, int orientation, int n) {
  int p = a, q = b;
  if (orientation & 4) std::swap(p, q);
  if (orientation & 2) p = n - 1 - p;
  if (orientation & 1) q = n - 1 - q;
  return p + n * q;
}

int Mesh::num_periodic_faces() const {
  return static_cast<int>(
      std::count_if(faces.begin(), faces.end(), [](const Face& f) { return f.periodic; }));
}

int Mesh::patch_index(std::string_view name) const {
  for (std::size_t i = 0; i < patches.size(); ++i)
    if (patches[i].name == name) return static_cast<int>(i);
  return -1;
}

void Mesh::finalize() {
  const int ne = static_cast<int>(num_elements());
  const std::size_t ngeo = std::size_t(geometry_order + 1) * (geometry_order + 1) *
                           (geometry_order + 1);
  for (int e = 0; e < ne; ++e) {
    if (geometry[e].size() != ngeo)
      throw ValidationError("element " + std::to_string(e) + " has " +
                            std::to_string(geometry[e].size()) +
                            " geometry nodes, expected " + std::to_string(ngeo));
  }
  sides_.assign(ne, {});
  auto claim = [&](int f, int e, int s, bool left) {
    if (e < 0 || e >= ne)
      throw ValidationError("face " + std::to_string(f) +
                            " references nonexistent element " + std::to_string(e));
    if (s < 0 || s >= kNumSides)
      throw ValidationError("face " + std::to_string(f) + " references invalid side " +
                            std::to_string(s));
    auto& ref = sides_[e][s];
    if (ref.face >= 0)
      throw ValidationError("element " + std::to_string(e) + " side " +
                            std::to_string(s) + " is shared by faces " +
                            std::to_string(ref.face) + " and " + std::to_string(f));
    ref = {f, left};
  };
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const Face& face = faces[f];
    if (face.orientation < 0 || face.orientation > 7)
      throw ValidationError("face " + std::to_string(f) + " has invalid orientation " +
                            std::to_string(face.orientation));
    claim(f, face.left_elem, face.left_side, true);
    if (face.is_boundary()) {
      if (face.patch < 0 || face.patch >= static_cast<int>(patches.size()))
        throw ValidationError("boundary face " + std::to_string(f) +
                              " references nonexistent patch " +
                              std::to_string(face.patch));
      if (patches[face.patch].kind == BCKind::Periodic)
        throw ValidationError("boundary face " + std::to_string(f) +
                              " is tagged Periodic but has no partner");
      if (face.periodic)
        throw ValidationError("boundary face " + std::to_string(f) +
                              " is flagged periodic");
    } else {
      claim(f, face.right_elem, face.right_side, false);
    }
  }
  for (int e = 0; e < ne; ++e)
    for (int s = 0; s < kNumSides; ++s)
      if (sides_[e][s].face < 0)
        throw ValidationError("element " + std::to_string(e) + " side " +
                              std::to_string(s) + " is not covered by any face");
}

Vec3 Mesh::map_point(std::size_t elem, const Vec3& xi) const {
  const BasisSet geo(NodeKind::GaussLobatto, geometry_order);
  const int n = geo.size();
  const auto lx = geo.lagrange_at(xi[0]);
  const auto ly = geo.lagrange_at(xi[1]);
  const auto lz = geo.lagrange_at(xi[2]);
  Vec3 x{0, 0, 0};
  const auto& g = geometry[elem];
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double w = lx[i] * ly[j] * lz[k];
        const Vec3& p = g[idx3(i, j, k, n)];
        x[0] += w * p[0];
        x[1] += w * p[1];
        x[2] += w * p[2];
      }
  return x;
}

namespace {
struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  template <class T>
  void value(const T& v) {
    bytes(&v, sizeof(v));
  }
};
}  // namespace

std::uint64_t Mesh::hash() const {
  Fnv f;
  f.value(geometry_order);
  for (const auto& g : geometry) f.bytes(g.data(), g.size() * sizeof(Vec3));
  for (const Face& face : faces) {
    const std::int32_t v[7] = {face.left_elem, face.left_side,   face.right_elem,
                               face.right_side, face.orientation, face.patch,
                               face.periodic ? 1 : 0};
    f.bytes(v, sizeof(v));
  }
  for (const auto& p : patches) {
    f.bytes(p.name.data(), p.name.size());
    f.value(static_cast<int>(p.kind));
  }
  return f.h;
}

bool Mesh::same_topology_and_geometry(const Mesh& other) const {
  if (geometry_order != other.geometry_order || faces != other.faces ||
      patches != other.patches || geometry.size() != other.geometry.size())
    return false;
  for (std::size_t e = 0; e < geometry.size(); ++e) {
    if (geometry[e].size() != other.geometry[e].size()) return false;
    if (std::memcmp(geometry[e].data(), other.geometry[e].data(),
                    geometry[e].size() * sizeof(Vec3)) != 0)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Built-in generators

Mesh build_box_mesh(const BoxMeshSpec& spec) {
  for (int d = 0; d < 3; ++d) {
    if (spec.cells[d] < 1)
      throw ConfigError("box mesh needs at least one cell per direction");
    if (!(spec.extents[d].hi > spec.extents[d].lo))
      throw ConfigError("box mesh extent along axis " + std::to_string(d) +
                        " must be positive");
  }
  if (spec.geometry_order < 1) throw ConfigError("geometry order must be >= 1");
  const auto [nx, ny, nz] = spec.cells;
  auto removed = [&](int i, int j, int k) {
    if (!spec.hole) return false;
    const auto& h = *spec.hole;
    return i >= h[0][0] && i < h[0][1] && j >= h[1][0] && j < h[1][1] &&
           k >= h[2][0] && k < h[2][1];
  };

  Mesh mesh;
  mesh.geometry_order = spec.geometry_order;
  std::vector<int> id(std::size_t(nx) * ny * nz, -1);
  std::vector<std::array<int, 3>> cell_of;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (!removed(i, j, k)) {
          id[i + nx * (j + ny * k)] = static_cast<int>(cell_of.size());
          cell_of.push_back({i, j, k});
        }
  if (cell_of.empty()) throw ConfigError("box mesh hole removes every cell");

  const BasisSet geo(NodeKind::GaussLobatto, spec.geometry_order);
  const int ng = geo.size();
  const double len[3] = {spec.extents[0].hi - spec.extents[0].lo,
                         spec.extents[1].hi - spec.extents[1].lo,
                         spec.extents[2].hi - spec.extents[2].lo};
  for (const auto& c : cell_of) {
    std::vector<Vec3> g(ng * ng * ng);
    for (int k = 0; k < ng; ++k)
      for (int j = 0; j < ng; ++j)
        for (int i = 0; i < ng; ++i) {
          const int ref[3] = {i, j, k};
          Vec3 unit;  // position in [0,1]^3 over the whole box
          for (int d = 0; d < 3; ++d)
            unit[d] = (c[d] + 0.5 * (1.0 + geo.nodes()[ref[d]])) / spec.cells[d];
          Vec3 x;
          for (int d = 0; d < 3; ++d) x[d] = spec.extents[d].lo + len[d] * unit[d];
          if (spec.amplitude != 0.0) {
            const double s = std::sin(std::numbers::pi * unit[0]) *
                             std::sin(std::numbers::pi * unit[1]) *
                             std::sin(std::numbers::pi * unit[2]);
            x[0] += spec.amplitude * len[0] * s;
            x[1] -= spec.amplitude * len[1] * s;
            x[2] += spec.amplitude * len[2] * s;
          }
          g[idx3(i, j, k, ng)] = x;
        }
    mesh.geometry.push_back(std::move(g));
  }

  std::array<int, 6> side_patch{-1, -1, -1, -1, -1, -1};
  int hole_patch = -1;
  auto patch_for_side = [&](int side) {
    if (side_patch[side] < 0) {
      side_patch[side] = static_cast<int>(mesh.patches.size());
      mesh.patches.push_back({kBoxSideNames[side], spec.side_kinds[side]});
    }
    return side_patch[side];
  };
  auto patch_for_hole = [&]() {
    if (hole_patch < 0) {
      hole_patch = static_cast<int>(mesh.patches.size());
      mesh.patches.push_back({"body", spec.hole_kind});
    }
    return hole_patch;
  };
  for (int s = 0; s < 6; ++s)
    if (!spec.periodic[s / 2] && spec.side_kinds[s] == BCKind::Periodic)
      throw ConfigError(std::string("box side ") + kBoxSideNames[s] +
                        " tagged Periodic but the axis is not periodic");

  for (std::size_t e = 0; e < cell_of.size(); ++e) {
    const auto c = cell_of[e];
    for (int d = 0; d < 3; ++d) {
      // Each element owns its "+" face along d, plus its "-" face when that
      // face lies on a non-periodic domain boundary or borders the hole.
      std::array<int, 3> nb = c;
      nb[d] += 1;
      bool wrapped = false;
      if (nb[d] == spec.cells[d]) {
        if (spec.periodic[d]) {
          nb[d] = 0;
          wrapped = true;
        } else {
          Face f;
          f.left_elem = static_cast<int>(e);
          f.left_side = 2 * d + 1;
          f.patch = patch_for_side(2 * d + 1);
          mesh.faces.push_back(f);
          nb[d] = -1;
        }
      }
      if (nb[d] >= 0) {
        const int other = id[nb[0] + nx * (nb[1] + ny * nb[2])];
        Face f;
        f.left_elem = static_cast<int>(e);
        f.left_side = 2 * d + 1;
        if (other >= 0) {
          f.right_elem = other;
          f.right_side = 2 * d;
          f.periodic = wrapped;
        } else {
          f.patch = patch_for_hole();
        }
        mesh.faces.push_back(f);
      }
      std::array<int, 3> prev = c;
      prev[d] -= 1;
      if (prev[d] < 0) {
        if (!spec.periodic[d]) {
          Face f;
          f.left_elem = static_cast<int>(e);
          f.left_side = 2 * d;
          f.patch = patch_for_side(2 * d);
          mesh.faces.push_back(f);
        }
      } else if (id[prev[0] + nx * (prev[1] + ny * prev[2])] < 0) {
        Face f;
        f.left_elem = static_cast<int>(e);
        f.left_side = 2 * d;
        f.patch = patch_for_hole();
        mesh.faces.push_back(f);
      }
    }
  }
  mesh.finalize();
  if (spec.amplitude != 0.0) validate_jacobian(mesh);
  return mesh;
}

Mesh build_box_mesh(int nx, int ny, int nz, const std::array<Interval, 3>& extents,
                    const std::array<bool, 3>& periodic, int geometry_order) {
  BoxMeshSpec spec;
  spec.cells = {nx, ny, nz};
  spec.extents = extents;
  spec.periodic = periodic;
  spec.geometry_order = geometry_order;
  return build_box_mesh(spec);
}

Mesh build_deformed_box_mesh(int nx, int ny, int nz,
                             const std::array<Interval, 3>& extents,
                             const std::array<bool, 3>& periodic, int geometry_order,
                             double amplitude) {
  BoxMeshSpec spec;
  spec.cells = {nx, ny, nz};
  spec.extents = extents;
  spec.periodic = periodic;
  spec.geometry_order = geometry_order;
  spec.amplitude = amplitude;
  return build_box_mesh(spec);
}

Mesh build_channel_mesh(int nx, int ny, int nz, double length, double height,
                        double width, int geometry_order) {
  BoxMeshSpec spec;
  spec.cells = {nx, ny, nz};
  spec.extents = {Interval{0.0, length}, Interval{0.0, height}, Interval{0.0, width}};
  spec.periodic = {true, false, true};
  spec.geometry_order = geometry_order;
  spec.side_kinds[2] = BCKind::NoSlipWall;
  spec.side_kinds[3] = BCKind::MovingWall;
  return build_box_mesh(spec);
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

double det3(const Vec3& a, const Vec3& b, const Vec3& c) { return dot(a, cross(b, c)); }

}  // namespace

void validate_jacobian(const Mesh& mesh) {
  const BasisSet geo(NodeKind::GaussLobatto, mesh.geometry_order);
  const BasisSet probe(NodeKind::GaussLobatto, std::min(2 * mesh.geometry_order, kMaxOrder));
  const auto interp = geo.interpolation_matrix(probe.nodes());
  const auto dmat = probe.diff_matrix();
  const int n = probe.size();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto x = detail::interpolate3<Vec3>(mesh.geometry[e], interp, n, geo.size());
    const auto dx = detail::differentiate3<Vec3>(x, dmat, n, 0);
    const auto dy = detail::differentiate3<Vec3>(x, dmat, n, 1);
    const auto dz = detail::differentiate3<Vec3>(x, dmat, n, 2);
    for (std::size_t p = 0; p < x.size(); ++p) {
      const double j = det3(dx[p], dy[p], dz[p]);
      if (!(j > 0.0)) {
        std::ostringstream os;
        os << "element " << e << " has non-positive mapping Jacobian " << j
           << " at reference node " << p;
        throw MeshValidityError(os.str(), e);
      }
    }
  }
}

Mesh compute_metrics(Mesh mesh, const BasisSet& basis) {
  const int order = basis.order();
  if (mesh.geometry_order > order)
    throw ConfigError("geometry order " + std::to_string(mesh.geometry_order) +
                      " exceeds solution order " + std::to_string(order) +
                      "; metric products would not be representable");
  const BasisSet geo(NodeKind::GaussLobatto, mesh.geometry_order);
  const BasisSet lob(NodeKind::GaussLobatto, order);
  const int n = basis.size();
  const int ng = geo.size();

  const auto geo_to_lob = geo.interpolation_matrix(lob.nodes());
  const auto geo_to_sol = geo.interpolation_matrix(basis.nodes());
  const auto lob_to_sol = lob.interpolation_matrix(basis.nodes());
  const auto dlob = lob.diff_matrix();

  mesh.metrics.assign(mesh.num_elements(), {});
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    ElementMetrics& em = mesh.metrics[e];
    // Metrics are translation invariant; working relative to the element
    // centroid keeps roundoff in the curl form proportional to element size.
    Vec3 centre{0, 0, 0};
    for (const Vec3& g : mesh.geometry[e]) centre = centre + g;
    centre = (1.0 / static_cast<double>(mesh.geometry[e].size())) * centre;
    std::vector<Vec3> local(mesh.geometry[e].size());
    for (std::size_t p = 0; p < local.size(); ++p) local[p] = mesh.geometry[e][p] - centre;
    const auto xl = detail::interpolate3<Vec3>(local, geo_to_lob, n, ng);
    std::array<std::vector<Vec3>, 3> dxl;
    for (int d = 0; d < 3; ++d) dxl[d] = detail::differentiate3<Vec3>(xl, dlob, n, d);

    // Invariant curl form: J a^i_c = -1/2 e_i . curl_xi(X_l grad X_m - X_m grad X_l)
    // with (c, m, l) cyclic. Evaluated on the Lobatto grid of the solution order.
    std::vector<std::array<Vec3, 3>> ja_lob(xl.size());
    for (int c = 0; c < 3; ++c) {
      const int m = (c + 1) % 3;
      const int l = (c + 2) % 3;
      // v[j] = reference-direction-j component of the potential.
      std::array<std::vector<double>, 3> v;
      for (int j = 0; j < 3; ++j) {
        v[j].resize(xl.size());
        for (std::size_t p = 0; p < xl.size(); ++p)
          v[j][p] = 0.5 * (xl[p][l] * dxl[j][p][m] - xl[p][m] * dxl[j][p][l]);
      }
      for (int i = 0; i < 3; ++i) {
        const int a = (i + 1) % 3;
        const int b = (i + 2) % 3;
        const auto dav = detail::differentiate3<double>(v[b], dlob, n, a);
        const auto dbv = detail::differentiate3<double>(v[a], dlob, n, b);
        for (std::size_t p = 0; p < xl.size(); ++p) ja_lob[p][i][c] = -(dav[p] - dbv[p]);
      }
    }

    em.x = detail::interpolate3<Vec3>(mesh.geometry[e], geo_to_sol, n, ng);
    std::array<std::vector<Vec3>, 3> dxs;
    for (int d = 0; d < 3; ++d)
      dxs[d] = detail::interpolate3<Vec3>(dxl[d], lob_to_sol, n, n);
    em.jac.resize(em.x.size());
    for (std::size_t p = 0; p < em.x.size(); ++p) {
      em.jac[p] = det3(dxs[0][p], dxs[1][p], dxs[2][p]);
      if (!(em.jac[p] > 0.0)) {
        std::ostringstream os;
        os << "element " << e << " has non-positive Jacobian " << em.jac[p]
           << " at solution node " << p;
        throw MeshValidityError(os.str(), e);
      }
    }
    {
      // Interpolate each of the three contravariant vectors.
      em.ja.assign(em.x.size(), {});
      for (int d = 0; d < 3; ++d) {
        std::vector<Vec3> comp(ja_lob.size());
        for (std::size_t p = 0; p < ja_lob.size(); ++p) comp[p] = ja_lob[p][d];
        const auto out = detail::interpolate3<Vec3>(comp, lob_to_sol, n, n);
        for (std::size_t p = 0; p < out.size(); ++p) em.ja[p][d] = out[p];
      }
    }
    em.volume = 0.0;
    const auto w = basis.weights();
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) em.volume += em.jac[idx3(i, j, k, n)] * w[i] * w[j] * w[k];

    // Face metrics: the normal contravariant vector on the Lobatto face slice,
    // interpolated onto the solution face nodes.
    const auto lob_interp = lob.interpolation_matrix(basis.nodes());
    for (int s = 0; s < kNumSides; ++s) {
      const int d = side_direction(s);
      const auto [t1, t2] = tangent_directions(d);
      const int layer = s % 2 == 0 ? 0 : n - 1;  // Lobatto grid includes the ends
      FaceMetrics& fm = em.faces[s];
      fm.normal.assign(n * n, {});
      fm.area.assign(n * n, 0.0);
      fm.scaled_normal.assign(n * n, {});
      fm.x.assign(n * n, {});
      const auto& ends = s % 2 == 0 ? basis.left_interp() : basis.right_interp();
      for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
          Vec3 jan{0, 0, 0};
          for (int q = 0; q < n; ++q)
            for (int p = 0; p < n; ++p) {
              int c[3];
              c[d] = layer;
              c[t1] = p;
              c[t2] = q;
              const double wgt = lob_interp[a * n + p] * lob_interp[b * n + q];
              jan = jan + wgt * ja_lob[idx3(c[0], c[1], c[2], n)][d];
            }
          const Vec3 nv = side_sign(s) * jan;
          const double area = norm(nv);
          fm.area[a + n * b] = area;
          fm.scaled_normal[a + n * b] = nv;
          fm.normal[a + n * b] = (1.0 / area) * nv;
          Vec3 xf{0, 0, 0};
          for (int m = 0; m < n; ++m) {
            int c[3];
            c[d] = m;
            c[t1] = a;
            c[t2] = b;
            xf = xf + ends[m] * em.x[idx3(c[0], c[1], c[2], n)];
          }
          fm.x[a + n * b] = xf;
        }
    }
  }
  mesh.metric_kind = basis.kind();
  mesh.metric_order = order;
  return mesh;
}

double metric_identity_residual(const Mesh& mesh, const BasisSet& basis) {
  const int n = basis.size();
  const auto dmat = basis.diff_matrix();
  double worst = 0.0;
  for (const auto& em : mesh.metrics) {
    std::vector<Vec3> sum(em.ja.size(), Vec3{0, 0, 0});
    for (int d = 0; d < 3; ++d) {
      std::vector<Vec3> comp(em.ja.size());
      for (std::size_t p = 0; p < comp.size(); ++p) comp[p] = em.ja[p][d];
      const auto dd = detail::differentiate3<Vec3>(comp, dmat, n, d);
      for (std::size_t p = 0; p < comp.size(); ++p) sum[p] = sum[p] + dd[p];
    }
    for (const auto& v : sum)
      for (double c : v) worst = std::max(worst, std::abs(c));
  }
  return worst;
}

double face_normal_mismatch(const Mesh& mesh) {
  const int n = mesh.metric_order + 1;
  double worst = 0.0;
  for (const Face& f : mesh.faces) {
    if (f.is_boundary()) continue;
    const auto& fl = mesh.metrics[f.left_elem].faces[f.left_side];
    const auto& fr = mesh.metrics[f.right_elem].faces[f.right_side];
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        const int il = a + n * b;
        const int ir = map_face_node(a, b, f.orientation, n);
        const Vec3 s = fl.normal[il] + fr.normal[ir];
        worst = std::max(worst, norm(s));
        worst = std::max(worst, std::abs(fl.area[il] - fr.area[ir]) /
                                    std::max(1.0, fl.area[il]));
      }
  }
  return worst;
}

}  // namespace dgles
