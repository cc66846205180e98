#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgles/bench.hpp"
#include "dgles/mesh.hpp"
#include "dgles/physics.hpp"
#include "dgles/solver.hpp"
#include "dgles/spectral.hpp"
#include "dgles/stats.hpp"

namespace dgles {

struct MeshConfig {
  /// box, deformed_box, channel, tgv, or file
  std::string generator = "box";
  std::string file;  // mesh file (generator == file) or the cmd_mesh output
  std::array<int, 3> cells{4, 4, 4};
  std::array<Interval, 3> extents{};
  std::array<bool, 3> periodic{true, true, true};
  int geometry_order = 1;
  double amplitude = 0.0;
  /// BC tag per box side name (x_min ... z_max); periodic sides are ignored.
  std::map<std::string, std::string> boundaries;
  std::optional<std::array<std::array<int, 2>, 3>> hole;
  std::string hole_kind = "NoSlipWall";
};

struct PatchDataConfig {
  std::optional<std::array<double, 5>> inflow;  // rho, u, v, w, p (p <= 0: reference)
  std::optional<double> outlet_pressure;
  std::optional<Vec3> wall_velocity;
};

struct TimeConfig {
  double cfl = 0.5;
  std::optional<double> fixed_dt;
  double t_end_ctu = 48.0;
  std::optional<long> max_steps;
  double ctu_length = 1.0;  // chord / U_inf in solver time
};

struct StatisticsConfig {
  bool enabled = true;
  double start_ctu = 40.0;
  double duration_ctu = 8.0;
};

struct OutputConfig {
  std::string directory = "out";
  long checkpoint_interval = 0;  // steps, 0 = final only
  bool forces = true;
  bool energy = true;
};

struct InitialConfig {
  /// uniform, taylor_green, density_wave, isentropic_vortex, couette, rest
  std::string kind = "uniform";
  Vec3 velocity{1.0, 0.0, 0.0};
  double perturbation = 0.0;
};

struct WakeConfig {
  std::vector<double> stations;
  double span_position = 0.0;
  double y_min = -1.0;
  double y_max = 1.0;
  int points = 101;
};

struct PsdSettings {
  std::size_t segment_length = 62500;
  double overlap = 0.5;
  std::string window = "Hamming";
};

struct ReferenceConfig {
  double chord = 1.0;
  double area = 1.0;
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 drag_axis{1.0, 0.0, 0.0};
  Vec3 lift_axis{0.0, 1.0, 0.0};
  Vec3 span_axis{0.0, 0.0, 1.0};
  std::vector<std::string> force_patches;
  std::vector<std::string> surface_patches;
};

struct BenchConfig {
  double start = 0.5;
  double increment = 0.1;
  int probe_steps = 100;
  int warmup_steps = 5;
  std::vector<std::string> formulations{"ExplicitLES_Vreman_Gauss",
                                        "ImplicitLES_KG_GaussLobatto"};
};

struct RunConfig {
  std::string case_name = "case";
  std::string formulation = "ImplicitLES_KG_GaussLobatto";
  int order = 4;
  std::string interface_scheme = "KGLaxFriedrichs";
  double vreman_constant = kVremanConstant;
  double mach = 0.1;
  double reynolds = 0.0;
  double gamma = 1.4;
  double prandtl = 0.72;
  MeshConfig mesh;
  std::map<std::string, PatchDataConfig> boundary_data;
  TimeConfig time;
  StatisticsConfig statistics;
  OutputConfig output;
  InitialConfig initial;
  WakeConfig wake;
  PsdSettings psd;
  ReferenceConfig reference;
  BenchConfig bench;
  bool deterministic = true;
  int threads = 0;  // 0: machine default
  std::uint64_t seed = 0;

  /// Cross-field checks: statistics window inside the run window, known
  /// enumerations, positive sizes. Throws ConfigError naming the field.
  void validate() const;

  GasModel gas() const;
  SchemeConfig scheme() const;
  Formulation parsed_formulation() const;
};

/// Parses YAML text; unknown keys and malformed values are ConfigError with
/// the key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// Builds the mesh described by the config (without metrics).
Mesh build_mesh(const MeshConfig& config);

}  // namespace dgles
