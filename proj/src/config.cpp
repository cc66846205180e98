#include "dgles/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "dgles/error.hpp"
#include "dgles/mesh_io.hpp"

namespace dgles {

namespace {

using Handler = std::function<void(const YAML::Node&, const std::string&)>;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void visit_map(const YAML::Node& node, const std::string& path,
               const std::map<std::string, Handler>& handlers) {
  if (!node.IsMap())
    throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "' must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError("unknown key '" + join(path, key) + "'");
    it->second(kv.second, join(path, key));
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError("'" + path + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + path + "' has an invalid value '" + n.Scalar() + "'");
  }
}

template <class T>
Handler set(T& target) {
  return [&target](const YAML::Node& n, const std::string& p) { target = scalar<T>(n, p); };
}

template <class T>
Handler set_opt(std::optional<T>& target) {
  return [&target](const YAML::Node& n, const std::string& p) {
    if (n.IsNull())
      target.reset();
    else
      target = scalar<T>(n, p);
  };
}

template <class T, std::size_t N>
std::array<T, N> fixed_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != N)
    throw ConfigError("'" + path + "' must be a list of " + std::to_string(N) + " values");
  std::array<T, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = scalar<T>(n[i], path + "[" + std::to_string(i) + "]");
  return out;
}

template <class T>
std::vector<T> list(const YAML::Node& n, const std::string& path) {
  if (n.IsNull()) return {};
  if (!n.IsSequence()) throw ConfigError("'" + path + "' must be a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(scalar<T>(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Handler set_vec(Vec3& v) {
  return [&v](const YAML::Node& n, const std::string& p) { v = fixed_list<double, 3>(n, p); };
}

void parse_mesh(const YAML::Node& node, const std::string& path, MeshConfig& m) {
  visit_map(node, path,
            {{"generator", set(m.generator)},
             {"file", set(m.file)},
             {"cells", [&](const YAML::Node& n, const std::string& p) { m.cells = fixed_list<int, 3>(n, p); }},
             {"extents",
              [&](const YAML::Node& n, const std::string& p) {
                if (!n.IsSequence() || n.size() != 3)
                  throw ConfigError("'" + p + "' must be a list of 3 [lo, hi] pairs");
                for (std::size_t i = 0; i < 3; ++i) {
                  const auto lh = fixed_list<double, 2>(n[i], p + "[" + std::to_string(i) + "]");
                  m.extents[i] = Interval{lh[0], lh[1]};
                }
              }},
             {"periodic", [&](const YAML::Node& n, const std::string& p) { m.periodic = fixed_list<bool, 3>(n, p); }},
             {"geometry_order", set(m.geometry_order)},
             {"amplitude", set(m.amplitude)},
             {"boundaries",
              [&](const YAML::Node& n, const std::string& p) {
                if (!n.IsMap()) throw ConfigError("'" + p + "' must be a mapping");
                m.boundaries.clear();
                for (const auto& kv : n) {
                  const std::string side = kv.first.as<std::string>();
                  m.boundaries[side] = scalar<std::string>(kv.second, join(p, side));
                }
              }},
             {"hole",
              [&](const YAML::Node& n, const std::string& p) {
                if (n.IsNull()) {
                  m.hole.reset();
                  return;
                }
                if (!n.IsSequence() || n.size() != 3)
                  throw ConfigError("'" + p + "' must be a list of 3 [lo, hi) cell ranges");
                std::array<std::array<int, 2>, 3> h;
                for (std::size_t i = 0; i < 3; ++i)
                  h[i] = fixed_list<int, 2>(n[i], p + "[" + std::to_string(i) + "]");
                m.hole = h;
              }},
             {"hole_kind", set(m.hole_kind)}});
}

void parse_patch_data(const YAML::Node& node, const std::string& path, PatchDataConfig& d) {
  visit_map(node, path,
            {{"inflow",
              [&](const YAML::Node& n, const std::string& p) {
                if (n.IsNull())
                  d.inflow.reset();
                else
                  d.inflow = fixed_list<double, 5>(n, p);
              }},
             {"outlet_pressure", set_opt(d.outlet_pressure)},
             {"wall_velocity", [&](const YAML::Node& n, const std::string& p) {
                if (n.IsNull())
                  d.wall_velocity.reset();
                else
                  d.wall_velocity = fixed_list<double, 3>(n, p);
              }}});
}

// %.17g so that doubles survive the text round trip.
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void emit_vec(YAML::Emitter& e, const Vec3& v) {
  e << YAML::Flow << YAML::BeginSeq << num(v[0]) << num(v[1]) << num(v[2]) << YAML::EndSeq;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("config is not valid YAML: ") + ex.what());
  }
  RunConfig c;
  if (root.IsNull()) return c;
  visit_map(
      root, "",
      {{"case", set(c.case_name)},
       {"formulation", set(c.formulation)},
       {"order", set(c.order)},
       {"interface_scheme", set(c.interface_scheme)},
       {"vreman_constant", set(c.vreman_constant)},
       {"gas",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"mach", set(c.mach)},
                     {"reynolds", set(c.reynolds)},
                     {"gamma", set(c.gamma)},
                     {"prandtl", set(c.prandtl)}});
        }},
       {"mesh", [&](const YAML::Node& n, const std::string& p) { parse_mesh(n, p, c.mesh); }},
       {"boundary_data",
        [&](const YAML::Node& n, const std::string& p) {
          if (!n.IsMap()) throw ConfigError("'" + p + "' must be a mapping");
          for (const auto& kv : n) {
            const std::string name = kv.first.as<std::string>();
            parse_patch_data(kv.second, join(p, name), c.boundary_data[name]);
          }
        }},
       {"time",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"cfl", set(c.time.cfl)},
                     {"fixed_dt", set_opt(c.time.fixed_dt)},
                     {"t_end_ctu", set(c.time.t_end_ctu)},
                     {"max_steps", set_opt(c.time.max_steps)},
                     {"ctu_length", set(c.time.ctu_length)}});
        }},
       {"statistics",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"enabled", set(c.statistics.enabled)},
                     {"start_ctu", set(c.statistics.start_ctu)},
                     {"duration_ctu", set(c.statistics.duration_ctu)}});
        }},
       {"output",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"directory", set(c.output.directory)},
                     {"checkpoint_interval", set(c.output.checkpoint_interval)},
                     {"forces", set(c.output.forces)},
                     {"energy", set(c.output.energy)}});
        }},
       {"initial",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"kind", set(c.initial.kind)},
                     {"velocity", set_vec(c.initial.velocity)},
                     {"perturbation", set(c.initial.perturbation)}});
        }},
       {"wake",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"stations",
                      [&](const YAML::Node& s, const std::string& sp) {
                        c.wake.stations = list<double>(s, sp);
                      }},
                     {"span_position", set(c.wake.span_position)},
                     {"y_min", set(c.wake.y_min)},
                     {"y_max", set(c.wake.y_max)},
                     {"points", set(c.wake.points)}});
        }},
       {"psd",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"segment_length", set(c.psd.segment_length)},
                     {"overlap", set(c.psd.overlap)},
                     {"window", set(c.psd.window)}});
        }},
       {"reference",
        [&](const YAML::Node& n, const std::string& p) {
          auto& r = c.reference;
          visit_map(n, p,
                    {{"chord", set(r.chord)},
                     {"area", set(r.area)},
                     {"origin", set_vec(r.origin)},
                     {"drag_axis", set_vec(r.drag_axis)},
                     {"lift_axis", set_vec(r.lift_axis)},
                     {"span_axis", set_vec(r.span_axis)},
                     {"force_patches",
                      [&](const YAML::Node& s, const std::string& sp) {
                        r.force_patches = list<std::string>(s, sp);
                      }},
                     {"surface_patches", [&](const YAML::Node& s, const std::string& sp) {
                        r.surface_patches = list<std::string>(s, sp);
                      }}});
        }},
       {"bench",
        [&](const YAML::Node& n, const std::string& p) {
          visit_map(n, p,
                    {{"start", set(c.bench.start)},
                     {"increment", set(c.bench.increment)},
                     {"probe_steps", set(c.bench.probe_steps)},
                     {"warmup_steps", set(c.bench.warmup_steps)},
                     {"formulations", [&](const YAML::Node& s, const std::string& sp) {
                        c.bench.formulations = list<std::string>(s, sp);
                      }}});
        }},
       {"deterministic", set(c.deterministic)},
       {"threads", set(c.threads)},
       {"seed", set(c.seed)}});
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("config file not found: " + path.string(), path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "case" << YAML::Value << c.case_name;
  e << YAML::Key << "formulation" << YAML::Value << c.formulation;
  e << YAML::Key << "order" << YAML::Value << c.order;
  e << YAML::Key << "interface_scheme" << YAML::Value << c.interface_scheme;
  e << YAML::Key << "vreman_constant" << YAML::Value << num(c.vreman_constant);
  e << YAML::Key << "gas" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mach" << YAML::Value << num(c.mach);
  e << YAML::Key << "reynolds" << YAML::Value << num(c.reynolds);
  e << YAML::Key << "gamma" << YAML::Value << num(c.gamma);
  e << YAML::Key << "prandtl" << YAML::Value << num(c.prandtl);
  e << YAML::EndMap;

  const auto& m = c.mesh;
  e << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "generator" << YAML::Value << m.generator;
  e << YAML::Key << "file" << YAML::Value << m.file;
  e << YAML::Key << "cells" << YAML::Value << YAML::Flow << YAML::BeginSeq << m.cells[0]
    << m.cells[1] << m.cells[2] << YAML::EndSeq;
  e << YAML::Key << "extents" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& iv : m.extents) e << YAML::Flow << YAML::BeginSeq << num(iv.lo) << num(iv.hi) << YAML::EndSeq;
  e << YAML::EndSeq;
  e << YAML::Key << "periodic" << YAML::Value << YAML::Flow << YAML::BeginSeq << m.periodic[0]
    << m.periodic[1] << m.periodic[2] << YAML::EndSeq;
  e << YAML::Key << "geometry_order" << YAML::Value << m.geometry_order;
  e << YAML::Key << "amplitude" << YAML::Value << num(m.amplitude);
  e << YAML::Key << "boundaries" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : m.boundaries) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap;
  if (m.hole) {
    e << YAML::Key << "hole" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& r : *m.hole) e << YAML::Flow << YAML::BeginSeq << r[0] << r[1] << YAML::EndSeq;
    e << YAML::EndSeq;
  }
  e << YAML::Key << "hole_kind" << YAML::Value << m.hole_kind;
  e << YAML::EndMap;

  e << YAML::Key << "boundary_data" << YAML::Value << YAML::BeginMap;
  for (const auto& [name, d] : c.boundary_data) {
    e << YAML::Key << name << YAML::Value << YAML::BeginMap;
    if (d.inflow) {
      e << YAML::Key << "inflow" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double v : *d.inflow) e << num(v);
      e << YAML::EndSeq;
    }
    if (d.outlet_pressure) e << YAML::Key << "outlet_pressure" << YAML::Value << num(*d.outlet_pressure);
    if (d.wall_velocity) {
      e << YAML::Key << "wall_velocity" << YAML::Value;
      emit_vec(e, *d.wall_velocity);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "cfl" << YAML::Value << num(c.time.cfl);
  if (c.time.fixed_dt) e << YAML::Key << "fixed_dt" << YAML::Value << num(*c.time.fixed_dt);
  e << YAML::Key << "t_end_ctu" << YAML::Value << num(c.time.t_end_ctu);
  if (c.time.max_steps) e << YAML::Key << "max_steps" << YAML::Value << *c.time.max_steps;
  e << YAML::Key << "ctu_length" << YAML::Value << num(c.time.ctu_length);
  e << YAML::EndMap;

  e << YAML::Key << "statistics" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "enabled" << YAML::Value << c.statistics.enabled;
  e << YAML::Key << "start_ctu" << YAML::Value << num(c.statistics.start_ctu);
  e << YAML::Key << "duration_ctu" << YAML::Value << num(c.statistics.duration_ctu);
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "directory" << YAML::Value << c.output.directory;
  e << YAML::Key << "checkpoint_interval" << YAML::Value << c.output.checkpoint_interval;
  e << YAML::Key << "forces" << YAML::Value << c.output.forces;
  e << YAML::Key << "energy" << YAML::Value << c.output.energy;
  e << YAML::EndMap;

  e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << c.initial.kind;
  e << YAML::Key << "velocity" << YAML::Value;
  emit_vec(e, c.initial.velocity);
  e << YAML::Key << "perturbation" << YAML::Value << num(c.initial.perturbation);
  e << YAML::EndMap;

  e << YAML::Key << "wake" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "stations" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double s : c.wake.stations) e << num(s);
  e << YAML::EndSeq;
  e << YAML::Key << "span_position" << YAML::Value << num(c.wake.span_position);
  e << YAML::Key << "y_min" << YAML::Value << num(c.wake.y_min);
  e << YAML::Key << "y_max" << YAML::Value << num(c.wake.y_max);
  e << YAML::Key << "points" << YAML::Value << c.wake.points;
  e << YAML::EndMap;

  e << YAML::Key << "psd" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "segment_length" << YAML::Value << c.psd.segment_length;
  e << YAML::Key << "overlap" << YAML::Value << num(c.psd.overlap);
  e << YAML::Key << "window" << YAML::Value << c.psd.window;
  e << YAML::EndMap;

  const auto& r = c.reference;
  e << YAML::Key << "reference" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "chord" << YAML::Value << num(r.chord);
  e << YAML::Key << "area" << YAML::Value << num(r.area);
  e << YAML::Key << "origin" << YAML::Value;
  emit_vec(e, r.origin);
  e << YAML::Key << "drag_axis" << YAML::Value;
  emit_vec(e, r.drag_axis);
  e << YAML::Key << "lift_axis" << YAML::Value;
  emit_vec(e, r.lift_axis);
  e << YAML::Key << "span_axis" << YAML::Value;
  emit_vec(e, r.span_axis);
  e << YAML::Key << "force_patches" << YAML::Value << YAML::Flow << r.force_patches;
  e << YAML::Key << "surface_patches" << YAML::Value << YAML::Flow << r.surface_patches;
  e << YAML::EndMap;

  e << YAML::Key << "bench" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "start" << YAML::Value << num(c.bench.start);
  e << YAML::Key << "increment" << YAML::Value << num(c.bench.increment);
  e << YAML::Key << "probe_steps" << YAML::Value << c.bench.probe_steps;
  e << YAML::Key << "warmup_steps" << YAML::Value << c.bench.warmup_steps;
  e << YAML::Key << "formulations" << YAML::Value << YAML::Flow << c.bench.formulations;
  e << YAML::EndMap;

  e << YAML::Key << "deterministic" << YAML::Value << c.deterministic;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

Formulation RunConfig::parsed_formulation() const {
  try {
    return parse_formulation(formulation);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("formulation: ") + err.what());
  }
}

GasModel RunConfig::gas() const {
  GasModel g = GasModel::from_references(mach, reynolds, gamma, prandtl);
  g.validate();
  return g;
}

SchemeConfig RunConfig::scheme() const {
  SchemeConfig s;
  s.formulation = parsed_formulation();
  try {
    s.interface_scheme = parse_interface_scheme(interface_scheme);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("interface_scheme: ") + err.what());
  }
  s.vreman_constant = vreman_constant;
  s.gas = gas();
  const double p_ref = s.gas.reference_pressure();
  auto defaults = [&]() {
    BoundaryData d;
    d.inflow_state = from_primitive(1.0, initial.velocity, p_ref, s.gas);
    d.outlet_pressure = p_ref;
    return d;
  };
  for (const char* name : kBoxSideNames) s.boundaries[name] = defaults();
  s.boundaries["body"] = defaults();
  for (const auto& [name, cfg] : boundary_data) {
    BoundaryData d = defaults();
    if (cfg.inflow) {
      const auto& v = *cfg.inflow;
      d.inflow_state = from_primitive(v[0], {v[1], v[2], v[3]}, v[4] > 0.0 ? v[4] : p_ref, s.gas);
    }
    if (cfg.outlet_pressure) d.outlet_pressure = *cfg.outlet_pressure > 0.0 ? *cfg.outlet_pressure : p_ref;
    if (cfg.wall_velocity) d.wall_velocity = *cfg.wall_velocity;
    s.boundaries[name] = d;
  }
  return s;
}

void RunConfig::validate() const {
  parsed_formulation();
  if (order < kMinOrder || order > kMaxOrder)
    throw ConfigError("order: must lie in [" + std::to_string(kMinOrder) + ", " +
                      std::to_string(kMaxOrder) + "], got " + std::to_string(order));
  scheme();
  if (!(time.cfl > 0.0)) throw ConfigError("time.cfl: must be positive");
  if (time.fixed_dt && !(*time.fixed_dt > 0.0)) throw ConfigError("time.fixed_dt: must be positive");
  if (!(time.t_end_ctu >= 0.0)) throw ConfigError("time.t_end_ctu: must be non-negative");
  if (!(time.ctu_length > 0.0)) throw ConfigError("time.ctu_length: must be positive");
  if (time.max_steps && *time.max_steps < 0) throw ConfigError("time.max_steps: must be non-negative");
  if (statistics.enabled) {
    if (!(statistics.start_ctu >= 0.0) || !(statistics.duration_ctu > 0.0))
      throw ConfigError("statistics: start_ctu must be >= 0 and duration_ctu > 0");
    if (statistics.start_ctu + statistics.duration_ctu > time.t_end_ctu * (1.0 + 1e-12))
      throw ConfigError("statistics: window [" + num(statistics.start_ctu) + ", " +
                        num(statistics.start_ctu + statistics.duration_ctu) +
                        "] CTU lies outside the run window [0, " + num(time.t_end_ctu) + "] CTU");
  }
  if (output.checkpoint_interval < 0)
    throw ConfigError("output.checkpoint_interval: must be non-negative");
  static const char* kInitial[] = {"uniform", "taylor_green", "density_wave",
                                   "isentropic_vortex", "couette", "rest"};
  if (std::find(std::begin(kInitial), std::end(kInitial), initial.kind) == std::end(kInitial))
    throw ConfigError("initial.kind: unknown initial condition '" + initial.kind + "'");
  if (initial.perturbation < 0.0) throw ConfigError("initial.perturbation: must be non-negative");
  if (wake.points < 2) throw ConfigError("wake.points: must be at least 2");
  try {
    PsdConfig pc;
    pc.segment_length = psd.segment_length;
    pc.overlap_fraction = psd.overlap;
    pc.window = parse_window(psd.window);
    pc.validate();
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("psd: ") + err.what());
  }
  if (!(reference.chord > 0.0) || !(reference.area > 0.0))
    throw ConfigError("reference: chord and area must be positive");
  try {
    RampOptions ro{bench.start, bench.increment, bench.probe_steps, bench.warmup_steps};
    ro.validate();
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("bench: ") + err.what());
  }
  for (const auto& f : bench.formulations) {
    try {
      parse_formulation(f);
    } catch (const ConfigError& err) {
      throw ConfigError(std::string("bench.formulations: ") + err.what());
    }
  }
  if (threads < 0) throw ConfigError("threads: must be non-negative");
  static const char* kGenerators[] = {"box", "deformed_box", "channel", "tgv", "file"};
  if (std::find(std::begin(kGenerators), std::end(kGenerators), mesh.generator) == std::end(kGenerators))
    throw ConfigError("mesh.generator: unknown generator '" + mesh.generator + "'");
  for (const auto& [side, tag] : mesh.boundaries) {
    if (std::find(kBoxSideNames.begin(), kBoxSideNames.end(), side) == kBoxSideNames.end())
      throw ConfigError("mesh.boundaries: unknown side '" + side + "'");
    try {
      parse_bc_kind(tag);
    } catch (const ValidationError& err) {
      throw ConfigError("mesh.boundaries." + side + ": " + err.what());
    }
  }
}

Mesh build_mesh(const MeshConfig& m) {
  auto bc = [](const std::string& path, const std::string& tag) {
    try {
      return parse_bc_kind(tag);
    } catch (const ValidationError& err) {
      throw ConfigError(path + ": " + err.what());
    }
  };
  if (m.generator == "file") {
    if (m.file.empty()) throw ConfigError("mesh.file: required for the file generator");
    return read_mesh(std::filesystem::path(m.file));
  }
  if (m.generator == "channel") {
    return build_channel_mesh(m.cells[0], m.cells[1], m.cells[2],
                              m.extents[0].hi - m.extents[0].lo,
                              m.extents[1].hi - m.extents[1].lo,
                              m.extents[2].hi - m.extents[2].lo, m.geometry_order);
  }
  BoxMeshSpec spec;
  spec.cells = m.cells;
  spec.extents = m.extents;
  spec.periodic = m.periodic;
  spec.geometry_order = m.geometry_order;
  if (m.generator == "tgv") {
    const double L = 2.0 * std::numbers::pi;
    spec.extents = {Interval{0.0, L}, Interval{0.0, L}, Interval{0.0, L}};
    spec.periodic = {true, true, true};
  } else if (m.generator == "deformed_box") {
    spec.amplitude = m.amplitude;
  } else if (m.generator != "box") {
    throw ConfigError("mesh.generator: unknown generator '" + m.generator + "'");
  }
  for (const auto& [side, tag] : m.boundaries) {
    const auto it = std::find(kBoxSideNames.begin(), kBoxSideNames.end(), side);
    if (it == kBoxSideNames.end()) throw ConfigError("mesh.boundaries: unknown side '" + side + "'");
    spec.side_kinds[it - kBoxSideNames.begin()] = bc("mesh.boundaries." + side, tag);
  }
  spec.hole = m.hole;
  spec.hole_kind = bc("mesh.hole_kind", m.hole_kind);
  return build_box_mesh(spec);
}

}  // namespace dgles
