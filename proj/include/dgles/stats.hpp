#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgles/basis.hpp"
#include "dgles/mesh.hpp"
#include "dgles/physics.hpp"
#include "dgles/solver.hpp"

namespace dgles {

/// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x);
  void merge(const CompensatedSum& other);
  double value() const { return sum + comp; }
};

/// Per-node running sums for time statistics.
/// Channels: u, v, w, uu, vv, ww, uv, uw, vw, p, rho, then the nine mean
/// velocity-gradient entries alpha[i][j] (row-major).
class StatisticsAccumulator {
 public:
  static constexpr int kChannels = 20;
  enum Channel {
    kU = 0, kUU = 3, kVV = 4, kWW = 5, kUV = 6, kUW = 7, kVW = 8,
    kP = 9, kRho = 10, kGrad = 11
  };

  StatisticsAccumulator() = default;
  explicit StatisticsAccumulator(std::size_t num_nodes);

  std::size_t num_nodes() const { return num_nodes_; }
  long count() const { return count_; }
  double start_time() const { return start_time_; }
  double stop_time() const { return stop_time_; }

  /// One sample of raw channel values, kChannels per node.
  void add_sample(std::span<const double> values, double time);
  /// Samples velocity, pressure, density and the velocity gradient of q.
  void accumulate(const SolutionField& q, const GasModel& gas, double time);
  /// Combines two disjoint sample streams over the same nodes.
  void merge(const StatisticsAccumulator& other);

  /// Mean of one channel at a node.
  double mean(std::size_t node, int channel) const;

  // Raw access for checkpointing.
  std::vector<CompensatedSum>& sums() { return sums_; }
  const std::vector<CompensatedSum>& sums() const { return sums_; }
  void restore(std::size_t num_nodes, long count, double start, double stop,
               std::vector<CompensatedSum> sums);

 private:
  std::size_t num_nodes_ = 0;
  long count_ = 0;
  double start_time_ = 0.0;
  double stop_time_ = 0.0;
  std::vector<CompensatedSum> sums_;
};

/// Finalized per-node statistics.
struct MeanFields {
  std::vector<Vec3> velocity;
  /// u'u', v'v', w'w', u'v', u'w', v'w'
  std::vector<std::array<double, 6>> reynolds_stress;
  std::vector<double> u_rms;
  std::vector<double> tke;
  std::vector<double> pressure;
  std::vector<double> density;
  std::vector<NodeGradient> gradient;  // velocity part only; temperature entries zero
  long samples = 0;
};

/// Throws InsufficientDataError with fewer than two samples.
MeanFields finalize(const StatisticsAccumulator& acc);

struct FlowReference {
  double rho = 1.0;
  double velocity = 1.0;
  double pressure = 0.0;
};

double pressure_coefficient(double p, const FlowReference& ref);
double skin_friction_coefficient(double tau_w, const FlowReference& ref);

/// Body geometry for surface and force reductions.
struct SurfaceFrame {
  Vec3 origin{0.0, 0.0, 0.0};   // leading edge
  double chord = 1.0;
  Vec3 flow_axis{1.0, 0.0, 0.0};
  Vec3 lift_axis{0.0, 1.0, 0.0};
  Vec3 span_axis{0.0, 0.0, 1.0};
};

struct SurfaceNode {
  int patch = -1;
  Vec3 x{};
  Vec3 normal{};  // unit normal pointing into the fluid
  double weight = 0.0;  // J_s w_a w_b
  double x_over_c = 0.0;
  double pressure = 0.0;
  Vec3 tau_w{};        // tangential wall traction
  double tau_signed = 0.0;  // tau_w along the streamwise tangent
  double density = 1.0;
  double wall_distance = 0.0;        // y of the second (GL) or first (Gauss) node
  double streamwise_spacing = 0.0;
};

struct SurfaceRecord {
  std::vector<std::string> patch_names;
  std::vector<SurfaceNode> nodes;
};

/// Collects wall-node data on the named patches from per-node pressure,
/// density and velocity gradient. Non-wall patches raise ConfigError.
SurfaceRecord build_surface_record(const Mesh& mesh, const BasisSet& basis,
                                   const std::vector<std::string>& patches,
                                   std::span<const double> pressure,
                                   std::span<const double> density,
                                   std::span<const NodeGradient> gradient, double mu,
                                   const SurfaceFrame& frame);

struct SurfaceCoefficients {
  std::vector<int> patch;
  std::vector<double> x_over_c;
  std::vector<double> cp;
  std::vector<double> cf;
  std::vector<double> yplus;
  std::vector<double> xplus;
};

std::vector<double> surface_cp(const SurfaceRecord& record, const FlowReference& ref);
std::vector<double> surface_cf(const SurfaceRecord& record, const FlowReference& ref);
/// y+ and x+ per node with u_tau = sqrt(|tau_w| / rho).
std::vector<std::array<double, 2>> wall_units(const SurfaceRecord& record, double mu);

/// Span-averaged coefficients: nodes with the same patch and the same
/// position once the span coordinate is removed are averaged. Sorted by
/// patch then x/c.
SurfaceCoefficients span_average(const SurfaceRecord& record, const FlowReference& ref,
                                 double mu, const SurfaceFrame& frame);

struct ForceReference {
  double rho = 1.0;
  double velocity = 1.0;
  double area = 1.0;
};

struct ForceCoefficients {
  std::vector<std::string> patches;
  std::vector<double> cl;
  std::vector<double> cd;
  std::vector<Vec3> force;
  double cl_total = 0.0;
  double cd_total = 0.0;
  Vec3 total_force{0.0, 0.0, 0.0};
};

/// Force exerted by the fluid on the selected patches:
/// F = sum (p n - tau . n) J_s w with n the element-outward normal. The
/// gradient span may be empty (pressure force only).
ForceCoefficients integrate_forces(const Mesh& mesh, const BasisSet& basis,
                                   const std::vector<std::string>& patches,
                                   std::span<const double> pressure,
                                   std::span<const NodeGradient> gradient, double mu,
                                   const ForceReference& ref, const SurfaceFrame& frame);

ForceCoefficients integrate_forces(const Mesh& mesh, const BasisSet& basis,
                                   const std::vector<std::string>& patches,
                                   const SolutionField& q, const GasModel& gas,
                                   const ForceReference& ref, const SurfaceFrame& frame);

/// Locates the element and reference coordinates containing x (Newton
/// inversion of the geometry map). Empty when x is outside the mesh.
struct PointLocation {
  std::size_t element = 0;
  Vec3 xi{};
};
std::optional<PointLocation> locate_point(const Mesh& mesh, const Vec3& x);

/// Evaluates a nodal field at a located point with the tensor Lagrange basis.
double evaluate_at(const BasisSet& basis, std::span<const double> field,
                   const PointLocation& loc);

struct WakeLine {
  std::vector<double> stations;  // x/c values
  double span_position = 0.0;    // coordinate along the span axis
  double y_min = -1.0;           // along the lift axis, in chords
  double y_max = 1.0;
  int points = 101;
};

struct WakeProfile {
  double station = 0.0;
  std::vector<double> y_over_c;
  std::vector<double> u_over_uinf;
  std::vector<double> u_rms;
  std::vector<double> tke;
};

/// Samples mean streamwise velocity, u_rms and TKE along lift-axis lines.
/// Stations outside the mesh raise RangeError.
std::vector<WakeProfile> sample_wake_profiles(const Mesh& mesh, const BasisSet& basis,
                                              const MeanFields& stats, const WakeLine& line,
                                              const SurfaceFrame& frame, double u_inf);

/// Q = 1/2 (|Omega|^2 - |S|^2) from a velocity gradient.
double q_criterion(const VelocityGradient& g);
std::vector<double> q_criterion(const SolutionField& q);

}  // namespace dgles
