#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgles/basis.hpp"
#include "dgles/types.hpp"

namespace dgles {

enum class BCKind { Inflow, Outflow, FreeSlipWall, NoSlipWall, MovingWall, Periodic };

std::string_view to_string(BCKind kind);
/// Throws ValidationError listing the legal tags on an unknown name.
BCKind parse_bc_kind(std::string_view name);

struct BoundaryPatch {
  std::string name;
  BCKind kind;
  bool operator==(const BoundaryPatch&) const = default;
};

// Element sides: 0 = xi-, 1 = xi+, 2 = eta-, 3 = eta+, 4 = zeta-, 5 = zeta+.
inline constexpr int kNumSides = 6;
inline int side_direction(int side) { return side / 2; }
inline double side_sign(int side) { return side % 2 == 0 ? -1.0 : 1.0; }
/// Reference directions spanning a face normal to `dir`, in increasing order.
inline std::array<int, 2> tangent_directions(int dir) {
  return dir == 0 ? std::array<int, 2>{1, 2}
                  : (dir == 1 ? std::array<int, 2>{0, 2} : std::array<int, 2>{0, 1});
}

/// Face node (a, b) on the left side maps to the right side's node
/// (a', b'): optionally swap, then optionally flip each coordinate.
/// orientation = 4*swap + 2*flip_first + flip_second.
int map_face_node(int a, int b, int orientation, int n);

struct Face {
  int left_elem = -1;
  int left_side = -1;
  int right_elem = -1;  // -1 on boundary faces
  int right_side = -1;
  int orientation = 0;
  int patch = -1;  // index into Mesh::patches for boundary faces
  bool periodic = false;

  bool is_boundary() const { return right_elem < 0; }
  bool operator==(const Face&) const = default;
};

struct FaceMetrics {
  std::vector<Vec3> normal;  // unit outward normal per face node
  std::vector<double> area;  // surface Jacobian J_s
  std::vector<Vec3> scaled_normal;  // J_s * normal, unrounded
  std::vector<Vec3> x;       // physical position
};

/// Metric terms of one element at the solution nodes of a basis.
struct ElementMetrics {
  std::vector<double> jac;               // J
  std::vector<std::array<Vec3, 3>> ja;   // ja[node][d] = J a^d
  std::vector<Vec3> x;                   // node positions
  std::array<FaceMetrics, kNumSides> faces;
  double volume = 0.0;
};

/// Conforming curvilinear hexahedral mesh. Geometry is stored per element as
/// (N_geo+1)^3 control nodes at the Gauss-Lobatto points of order N_geo.
class Mesh {
 public:
  int geometry_order = 1;
  std::vector<std::vector<Vec3>> geometry;
  std::vector<Face> faces;
  std::vector<BoundaryPatch> patches;

  // Populated by compute_metrics.
  std::optional<NodeKind> metric_kind;
  int metric_order = 0;
  std::vector<ElementMetrics> metrics;

  std::size_t num_elements() const { return geometry.size(); }
  int num_periodic_faces() const;
  int patch_index(std::string_view name) const;

  /// (face id, is_left) per element side, rebuilt by finalize().
  struct SideRef {
    int face = -1;
    bool is_left = true;
  };
  const std::array<SideRef, kNumSides>& sides(std::size_t elem) const {
    return sides_[elem];
  }

  /// Validates connectivity (watertight, no dangling references) and
  /// builds the side lookup. Throws ValidationError.
  void finalize();

  /// Geometry map evaluated at a reference point.
  Vec3 map_point(std::size_t elem, const Vec3& xi) const;

  std::uint64_t hash() const;

  bool same_topology_and_geometry(const Mesh& other) const;

 private:
  std::vector<std::array<SideRef, kNumSides>> sides_;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct BoxMeshSpec {
  std::array<int, 3> cells{1, 1, 1};
  std::array<Interval, 3> extents{};
  std::array<bool, 3> periodic{false, false, false};
  int geometry_order = 1;
  double amplitude = 0.0;
  /// BC kind per non-periodic box side (x_min, x_max, y_min, ...).
  std::array<BCKind, 6> side_kinds{BCKind::FreeSlipWall, BCKind::FreeSlipWall,
                                   BCKind::FreeSlipWall, BCKind::FreeSlipWall,
                                   BCKind::FreeSlipWall, BCKind::FreeSlipWall};
  /// Optional block of removed cells [lo, hi) per axis, walled as patch "body".
  std::optional<std::array<std::array<int, 2>, 3>> hole;
  BCKind hole_kind = BCKind::NoSlipWall;
};

inline constexpr std::array<const char*, 6> kBoxSideNames{
    "x_min", "x_max", "y_min", "y_max", "z_min", "z_max"};

Mesh build_box_mesh(const BoxMeshSpec& spec);
Mesh build_box_mesh(int nx, int ny, int nz, const std::array<Interval, 3>& extents,
                    const std::array<bool, 3>& periodic, int geometry_order);
Mesh build_deformed_box_mesh(int nx, int ny, int nz,
                             const std::array<Interval, 3>& extents,
                             const std::array<bool, 3>& periodic, int geometry_order,
                             double amplitude);

/// Channel between a stationary no-slip wall (y_min) and a moving wall
/// (y_max), periodic in x and z.
Mesh build_channel_mesh(int nx, int ny, int nz, double length, double height,
                        double width, int geometry_order);

/// Returns a copy of `mesh` with metric terms evaluated at the solution nodes
/// of `basis`. Throws ConfigError when N_geo > N and MeshValidityError when
/// J <= 0 at a node.
Mesh compute_metrics(Mesh mesh, const BasisSet& basis);

/// max over elements, nodes and Cartesian components of
/// |sum_d d(J a^d_k)/d xi_d| using the basis differentiation matrix.
double metric_identity_residual(const Mesh& mesh, const BasisSet& basis);

/// Largest mismatch of unit normals (n_L + n_R) and areas across interior faces.
double face_normal_mismatch(const Mesh& mesh);

/// Checks J > 0 on a sampling grid of the geometry map.
void validate_jacobian(const Mesh& mesh);

}  // namespace dgles
