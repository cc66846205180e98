#include "dgles/app.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include "dgles/cases.hpp"
#include "dgles/checkpoint.hpp"
#include "dgles/error.hpp"
#include "dgles/mesh_io.hpp"
#include "dgles/output.hpp"

namespace dgles {

int exit_code_for(const std::exception& err) {
  if (dynamic_cast<const MissingInputError*>(&err)) return kExitMissingInput;
  if (dynamic_cast<const DivergenceError*>(&err)) return kExitDivergence;
  if (dynamic_cast<const ConfigError*>(&err) || dynamic_cast<const ValidationError*>(&err) ||
      dynamic_cast<const ParseError*>(&err) || dynamic_cast<const VersionError*>(&err) ||
      dynamic_cast<const MeshValidityError*>(&err))
    return kExitConfig;
  return kExitFailure;
}

int resolve_threads(const RunConfig& config, const AppOptions& options) {
  if (options.threads) {
    if (*options.threads < 1) throw ConfigError("--threads must be at least 1");
    return *options.threads;
  }
  if (const char* env = std::getenv(kThreadsEnv); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1)
      throw ConfigError(std::string(kThreadsEnv) + " must be a positive integer, got '" + env + "'");
    return static_cast<int>(v);
  }
  if (config.threads > 0) return config.threads;
  return std::max(1, omp_get_max_threads());
}

std::filesystem::path mesh_output_path(const RunConfig& config) {
  if (!config.mesh.file.empty()) return config.mesh.file;
  return std::filesystem::path(config.output.directory) / "mesh.dgmesh";
}

std::filesystem::path final_checkpoint_path(const RunConfig& config) {
  return std::filesystem::path(config.output.directory) / "final.chk";
}

std::filesystem::path checkpoint_path(const RunConfig& config, long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "checkpoint_%08ld.chk", step);
  return std::filesystem::path(config.output.directory) / buf;
}

namespace {

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

struct Setup {
  BasisSet basis;
  Solver solver;
};

Setup make_solver(const RunConfig& config, Formulation formulation, int threads,
                  bool deterministic, std::optional<InterfaceScheme> interface = {}) {
  SchemeConfig scheme = config.scheme();
  scheme.formulation = formulation;
  if (interface) scheme.interface_scheme = *interface;
  BasisSet basis(node_kind(formulation), config.order);
  Mesh mesh = compute_metrics(build_mesh(config.mesh), basis);
  return Setup{basis, Solver(mesh, basis, scheme, ParallelOptions{threads, deterministic})};
}

std::function<State(const Vec3&)> initial_state(const RunConfig& c, const GasModel& gas) {
  const std::string& kind = c.initial.kind;
  if (kind == "uniform") {
    const Vec3 v = c.initial.velocity;
    return [gas, v](const Vec3&) { return cases::uniform(gas, v); };
  }
  if (kind == "rest") return [gas](const Vec3&) { return cases::uniform(gas, {0.0, 0.0, 0.0}); };
  if (kind == "taylor_green") return [gas](const Vec3& x) { return cases::taylor_green(x, gas); };
  if (kind == "density_wave") {
    const double u = c.initial.velocity[0];
    return [gas, u](const Vec3& x) { return cases::density_wave(x, 0.0, gas, 0.1, u); };
  }
  if (kind == "isentropic_vortex") {
    const auto& e = c.mesh.extents;
    const Vec3 center{0.5 * (e[0].lo + e[0].hi), 0.5 * (e[1].lo + e[1].hi), 0.5 * (e[2].lo + e[2].hi)};
    const Vec3 v = c.initial.velocity;
    return [gas, center, v](const Vec3& x) { return cases::isentropic_vortex(x, gas, center, 0.5, v); };
  }
  if (kind == "couette") {
    double speed = 1.0;
    if (const auto it = c.boundary_data.find("y_max");
        it != c.boundary_data.end() && it->second.wall_velocity)
      speed = (*it->second.wall_velocity)[0];
    const double h = c.mesh.extents[1].hi - c.mesh.extents[1].lo;
    return [gas, speed, h](const Vec3& x) { return cases::couette(x, gas, speed, h); };
  }
  throw ConfigError("initial.kind: unknown initial condition '" + kind + "'");
}

SolutionField initial_field(const RunConfig& c, const Solver& solver) {
  SolutionField q = solver.make_field();
  const auto fn = initial_state(c, solver.scheme().gas);
  if (c.initial.perturbation > 0.0)
    cases::seeded_perturbation(solver, q, fn, c.initial.perturbation, c.seed);
  else
    solver.project(q, fn);
  solver.check_state(q);
  return q;
}

SurfaceFrame frame_of(const RunConfig& c) {
  SurfaceFrame f;
  f.origin = c.reference.origin;
  f.chord = c.reference.chord;
  f.flow_axis = c.reference.drag_axis;
  f.lift_axis = c.reference.lift_axis;
  f.span_axis = c.reference.span_axis;
  return f;
}

PsdConfig psd_config(const RunConfig& c) {
  PsdConfig pc;
  pc.segment_length = c.psd.segment_length;
  pc.overlap_fraction = c.psd.overlap;
  pc.window = parse_window(c.psd.window);
  // Series are stored in CTU, so frequencies are already Strouhal numbers.
  pc.chord = 1.0;
  pc.velocity = 1.0;
  return pc;
}

}  // namespace

std::filesystem::path cmd_mesh(const RunConfig& config, std::ostream& log) {
  config.validate();
  Mesh mesh = build_mesh(config.mesh);
  validate_jacobian(mesh);
  // Metric identities must hold at the configured order before writing.
  const BasisSet basis(NodeKind::GaussLobatto, config.order);
  if (mesh.geometry_order <= config.order) {
    const Mesh with = compute_metrics(mesh, basis);
    const double res = metric_identity_residual(with, basis);
    if (!(res <= 1e-10))
      throw MeshValidityError("metric identity residual " + std::to_string(res) +
                                  " exceeds 1e-10",
                              0);
    log << "metric identity residual " << res << "\n";
  }
  const auto path = mesh_output_path(config);
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  write_mesh(mesh, path);
  log << "wrote " << path.string() << " (" << mesh.num_elements() << " elements, "
      << mesh.faces.size() << " faces)\n";
  return path;
}

RunSummary cmd_run(const RunConfig& config, const AppOptions& options, std::ostream& log) {
  config.validate();
  const int threads = resolve_threads(config, options);
  const bool deterministic = config.deterministic || options.deterministic;
  Setup setup = make_solver(config, config.parsed_formulation(), threads, deterministic);
  const Solver& solver = setup.solver;
  const GasModel& gas = solver.scheme().gas;
  const double ctu = config.time.ctu_length;
  const std::filesystem::path dir = config.output.directory;
  ensure_directory(dir);

  SolutionField q;
  double t0 = 0.0;
  long step0 = 0;
  std::optional<StatisticsAccumulator> stats;
  if (options.resume) {
    Checkpoint ck = read_checkpoint(*options.resume);
    check_compatible(ck, solver);
    q = std::move(ck.field);
    t0 = ck.time;
    step0 = ck.step;
    stats = std::move(ck.statistics);
    solver.check_state(q);
    log << "resumed from " << options.resume->string() << " at step " << step0 << ", t = " << t0
        << "\n";
  } else {
    q = initial_field(config, solver);
  }
  const double stats_lo = config.statistics.start_ctu * ctu;
  const double stats_hi = (config.statistics.start_ctu + config.statistics.duration_ctu) * ctu;
  if (config.statistics.enabled && !stats) stats = StatisticsAccumulator(q.u.size());

  const auto& patches = config.reference.force_patches;
  const bool forces = config.output.forces && !patches.empty();
  std::optional<ForcesWriter> fw;
  if (forces) fw.emplace(dir / "forces.csv", patches, options.resume.has_value());
  std::optional<std::ofstream> energy;
  if (config.output.energy) {
    const auto path = dir / "energy.csv";
    const bool append = options.resume.has_value() && std::filesystem::exists(path);
    energy.emplace(path, append ? std::ios::app : std::ios::trunc);
    if (!append) *energy << csv_line(energy_csv_header());
  }
  const ForceReference fref{1.0, 1.0, config.reference.area};
  const SurfaceFrame frame = frame_of(config);

  auto record = [&](double t, SolutionField& field) {
    bool grads = false;
    auto need_gradients = [&]() {
      if (!grads) solver.compute_gradients(field, t);
      grads = true;
    };
    if (energy)
      *energy << csv_line({format_number(t / ctu), format_number(solver.totals(field).kinetic_energy)});
    if (forces) {
      if (gas.mu > 0.0) need_gradients();
      fw->write(t / ctu, integrate_forces(solver.mesh(), setup.basis, patches, field, gas, fref, frame));
    }
    if (stats && t >= stats_lo * (1.0 - 1e-12) && t <= stats_hi * (1.0 + 1e-12)) {
      need_gradients();
      stats->accumulate(field, gas, t);
    }
  };
  auto save = [&](const std::filesystem::path& path, long step, double t, const SolutionField& field) {
    Checkpoint ck;
    ck.step = step;
    ck.time = t;
    ck.formulation = solver.scheme().formulation;
    ck.order = solver.basis().order();
    ck.mesh_hash = solver.mesh().hash();
    ck.field = field;
    ck.field.grad.clear();
    ck.field.mu_t.clear();
    ck.statistics = stats;
    write_checkpoint(ck, path);
  };

  if (!options.resume) record(0.0, q);
  RunControl rc;
  rc.t_end = config.time.t_end_ctu * ctu;
  if (config.time.max_steps) rc.n_steps = std::max(0L, *config.time.max_steps - step0);
  rc.fixed_dt = config.time.fixed_dt;
  rc.cfl = config.time.cfl;
  rc.start_time = t0;
  rc.start_step = step0;
  rc.ctu = ctu;
  const long interval = config.output.checkpoint_interval;
  RunReport report;
  try {
    report = solver.run(q, rc, [&](const StepInfo& info, SolutionField& field) {
      record(info.time, field);
      if (interval > 0 && info.step % interval == 0)
        save(checkpoint_path(config, info.step), info.step, info.time, field);
    });
  } catch (const DivergenceError& err) {
    log << "divergence: " << err.what() << "\n";
    throw;
  }
  RunSummary summary;
  summary.report = report;
  summary.final_checkpoint = final_checkpoint_path(config);
  save(summary.final_checkpoint, report.final_step, report.final_time, q);
  log << "completed " << report.iterations << " steps to t = " << report.final_time / ctu
      << " CTU; " << report.seconds_per_iteration << " s/iteration, mean dt " << report.mean_dt
      << ", " << report.hours_per_ctu << " h/CTU\n";
  return summary;
}

void cmd_post(const RunConfig& config, const AppOptions& options, std::ostream& log) {
  config.validate();
  const auto ck_path = options.resume ? *options.resume : final_checkpoint_path(config);
  if (!std::filesystem::exists(ck_path))
    throw MissingInputError("checkpoint not found: " + ck_path.string(), ck_path.string());
  const int threads = resolve_threads(config, options);
  Setup setup = make_solver(config, config.parsed_formulation(), threads, true);
  const Solver& solver = setup.solver;
  const GasModel& gas = solver.scheme().gas;
  Checkpoint ck = read_checkpoint(ck_path);
  check_compatible(ck, solver);
  SolutionField q = std::move(ck.field);
  q.grad.assign(q.u.size(), NodeGradient{});
  q.mu_t.assign(q.u.size(), 0.0);
  solver.compute_gradients(q, ck.time);
  const std::filesystem::path dir = config.output.directory;

  std::vector<VtkPointField> scalars;
  std::vector<VtkVectorField> vectors;
  {
    VtkPointField rho{"density", {}}, p{"pressure", {}}, mut{"mu_t", q.mu_t};
    VtkVectorField vel{"velocity", {}};
    for (const State& u : q.u) {
      rho.values.push_back(u[0]);
      p.values.push_back(pressure(u, gas));
      vel.values.push_back({u[1] / u[0], u[2] / u[0], u[3] / u[0]});
    }
    scalars = {rho, p, {"q_criterion", q_criterion(q)}, mut};
    vectors = {vel};
  }
  std::optional<MeanFields> mean;
  if (ck.statistics && ck.statistics->count() >= 2) {
    mean = finalize(*ck.statistics);
    scalars.push_back({"tke", mean->tke});
    scalars.push_back({"u_rms", mean->u_rms});
    vectors.push_back({"mean_velocity", mean->velocity});
  } else {
    log << "note: checkpoint has fewer than 2 statistics samples; mean fields skipped\n";
  }
  {
    std::ofstream out(dir / "field.vtk");
    write_vtk(out, solver.mesh(), solver.basis().order(), scalars, vectors);
    log << "wrote " << (dir / "field.vtk").string() << "\n";
  }
  const SurfaceFrame frame = frame_of(config);
  if (mean && !config.reference.surface_patches.empty()) {
    const SurfaceRecord rec =
        build_surface_record(solver.mesh(), setup.basis, config.reference.surface_patches,
                             mean->pressure, mean->density, mean->gradient, gas.mu, frame);
    FlowReference ref{1.0, 1.0, gas.reference_pressure()};
    std::ofstream out(dir / "surface.csv");
    write_surface_csv(out, span_average(rec, ref, gas.mu, frame), rec.patch_names);
    log << "wrote " << (dir / "surface.csv").string() << "\n";
  } else {
    log << "note: no surface patches or statistics; surface.csv skipped\n";
  }
  if (mean && !config.wake.stations.empty()) {
    WakeLine line{config.wake.stations, config.wake.span_position, config.wake.y_min,
                  config.wake.y_max, config.wake.points};
    for (const auto& prof : sample_wake_profiles(solver.mesh(), setup.basis, *mean, line, frame, 1.0)) {
      std::ofstream out(dir / wake_file_name(prof.station));
      write_wake_csv(out, prof);
      log << "wrote " << (dir / wake_file_name(prof.station)).string() << "\n";
    }
  } else {
    log << "note: no wake stations configured; wake profiles skipped\n";
  }
  const auto forces = dir / "forces.csv";
  if (std::filesystem::exists(forces)) {
    const ForceSeries s = read_forces_csv(forces);
    if (s.time.size() >= config.psd.segment_length)
      cmd_psd(config, log);
    else
      log << "note: force series has " << s.time.size() << " samples, fewer than one PSD segment ("
          << config.psd.segment_length << "); psd.csv skipped\n";
  }
}

void cmd_psd(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::filesystem::path dir = config.output.directory;
  ForceSeries s = read_forces_csv(dir / "forces.csv");
  // A run ending on t_end clips its last step; that sample is dropped.
  if (const std::size_t n = s.time.size(); n >= 3) {
    const double last = s.time[n - 1] - s.time[n - 2];
    const double prev = s.time[n - 2] - s.time[n - 3];
    if (last < prev * (1.0 - 1e-6)) {
      s.time.pop_back();
      s.cl_total.pop_back();
      for (auto& c : s.cl) c.pop_back();
    }
  }
  const PsdConfig pc = psd_config(config);
  PsdResult total;
  std::vector<PsdResult> per;
  try {
    total = welch_psd(s.time, s.cl_total, pc);
    for (const auto& c : s.cl) per.push_back(welch_psd(s.time, c, pc));
  } catch (const SamplingError& err) {
    throw SamplingError(std::string(err.what()) +
                        "; spectra need a run with time.fixed_dt so samples are uniform");
  }
  std::ofstream out(dir / "psd.csv");
  write_psd_csv(out, total, s.patches, per);
  log << "wrote " << (dir / "psd.csv").string() << " (" << total.segments << " segments)\n";
  for (const auto& p : dominant_peaks(total, 3))
    log << "peak St = " << p.strouhal << " power " << p.power << "\n";
}

bool cmd_bench(const RunConfig& config, const AppOptions& options, std::ostream& log,
               std::vector<RampReport>* out_reports) {
  config.validate();
  const int threads = resolve_threads(config, options);
  RampOptions ro;
  ro.start = config.bench.start;
  ro.increment = config.bench.increment;
  ro.probe_steps = config.bench.probe_steps;
  ro.warmup_steps = config.bench.warmup_steps;
  std::vector<RampReport> reports;
  bool all_stable = true;
  for (const auto& name : config.bench.formulations) {
    const Formulation f = parse_formulation(name);
    // Each formulation is ramped with its own production interface flux.
    const InterfaceScheme interface = f == Formulation::ExplicitLES_Vreman_Gauss
                                          ? InterfaceScheme::Upwind
                                          : InterfaceScheme::KGLaxFriedrichs;
    Setup setup = make_solver(config, f, threads, true, interface);
    const SolutionField q0 = initial_field(config, setup.solver);
    RampReport rep = cfl_ramp(setup.solver, q0, ro, config.time.ctu_length);
    if (!rep.last_stable) {
      all_stable = false;
      log << name << ": unstable at the first CFL " << ro.start << "\n";
    } else {
      log << name << ": CFL_max " << *rep.last_stable << ", dt_max " << rep.dt_max << ", "
          << rep.sec_per_iter << " s/iteration, " << rep.hours_per_ctu << " h/CTU\n";
    }
    reports.push_back(std::move(rep));
  }
  ensure_directory(config.output.directory);
  {
    std::ofstream out(std::filesystem::path(config.output.directory) / "bench.csv");
    write_bench_csv(out, reports);
  }
  if (reports.size() >= 2 && all_stable) {
    const CostTable table = cost_report(reports);
    for (const auto& row : table.rows)
      log << to_string(row.formulation) << ": dt ratio " << row.dt_ratio << ", iteration cost ratio "
          << row.iter_ratio << ", CTU cost ratio " << row.ctu_ratio << "\n";
    const double cfl_ratio = table.rows[1].cfl_max / table.rows[0].cfl_max;
    log << "CFL_max ratio (GL / Gauss) " << cfl_ratio << "\n";
  } else {
    log << "note: comparison columns omitted (needs both formulations stable)\n";
  }
  if (out_reports) *out_reports = reports;
  return all_stable;
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const AppOptions& options, std::ostream& log, std::ostream& err) {
  try {
    RunConfig config = load_config(config_path);
    if (options.deterministic) config.deterministic = true;
    if (command == "mesh") {
      cmd_mesh(config, log);
    } else if (command == "run") {
      cmd_run(config, options, log);
    } else if (command == "post") {
      cmd_post(config, options, log);
    } else if (command == "psd") {
      cmd_psd(config, log);
    } else if (command == "bench") {
      if (!cmd_bench(config, options, log)) return kExitDivergence;
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace dgles
