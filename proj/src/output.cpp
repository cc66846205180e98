#include "dgles/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dgles/error.hpp"
#include "tensor.hpp"

namespace dgles {

std::vector<std::string> surface_csv_header() {
  return {"patch", "x_over_c", "cp", "cf", "yplus", "xplus"};
}

std::vector<std::string> forces_csv_header(const std::vector<std::string>& patches) {
  std::vector<std::string> h{"time", "cl_total", "cd_total"};
  for (const auto& p : patches) {
    h.push_back("cl_" + p);
    h.push_back("cd_" + p);
  }
  return h;
}

std::vector<std::string> wake_csv_header() { return {"y_over_c", "u_over_uinf", "u_rms", "tke"}; }

std::vector<std::string> psd_csv_header(const std::vector<std::string>& patches) {
  std::vector<std::string> h{"st", "psd_total"};
  for (const auto& p : patches) h.push_back("psd_" + p);
  return h;
}

std::vector<std::string> bench_csv_header() {
  return {"formulation", "cfl", "dt", "sec_per_iter", "hours_per_ctu", "stable"};
}

std::vector<std::string> energy_csv_header() { return {"time", "kinetic_energy"}; }

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + "\n";
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_surface_csv(std::ostream& out, const SurfaceCoefficients& c,
                       const std::vector<std::string>& patch_names) {
  out << csv_line(surface_csv_header());
  for (std::size_t i = 0; i < c.x_over_c.size(); ++i)
    out << csv_line({patch_names.at(c.patch[i]), format_number(c.x_over_c[i]),
                     format_number(c.cp[i]), format_number(c.cf[i]), format_number(c.yplus[i]),
                     format_number(c.xplus[i])});
}

void write_wake_csv(std::ostream& out, const WakeProfile& p) {
  out << csv_line(wake_csv_header());
  for (std::size_t i = 0; i < p.y_over_c.size(); ++i)
    out << csv_line({format_number(p.y_over_c[i]), format_number(p.u_over_uinf[i]),
                     format_number(p.u_rms[i]), format_number(p.tke[i])});
}

std::string wake_file_name(double station) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "wake_x%g.csv", station);
  return buf;
}

void write_psd_csv(std::ostream& out, const PsdResult& total,
                   const std::vector<std::string>& patches,
                   const std::vector<PsdResult>& per_patch) {
  if (per_patch.size() != patches.size())
    throw ConfigError("psd output needs one spectrum per patch");
  out << csv_line(psd_csv_header(patches));
  for (std::size_t k = 0; k < total.power.size(); ++k) {
    std::vector<std::string> row{format_number(total.strouhal[k]), format_number(total.power[k])};
    for (const auto& r : per_patch) row.push_back(format_number(r.power.at(k)));
    out << csv_line(row);
  }
}

void write_bench_csv(std::ostream& out, const std::vector<RampReport>& reports) {
  out << csv_line(bench_csv_header());
  for (const auto& rep : reports)
    for (const auto& r : rep.rungs) {
      const double hours = r.stable && r.dt > 0.0 ? rep.ctu / r.dt * r.sec_per_iter / 3600.0 : 0.0;
      out << csv_line({std::string(to_string(rep.formulation)), format_number(r.cfl),
                       format_number(r.dt), format_number(r.sec_per_iter), format_number(hours),
                       r.stable ? "1" : "0"});
    }
}

ForcesWriter::ForcesWriter(const std::filesystem::path& path,
                           const std::vector<std::string>& patches, bool append)
    : path_(path), patches_(patches) {
  const bool exists = append && std::filesystem::exists(path);
  std::ofstream out(path, exists ? std::ios::app : std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  if (!exists) out << csv_line(forces_csv_header(patches));
}

void ForcesWriter::write(double time, const ForceCoefficients& f) {
  std::ofstream out(path_, std::ios::app);
  std::vector<std::string> row{format_number(time), format_number(f.cl_total),
                               format_number(f.cd_total)};
  for (std::size_t k = 0; k < patches_.size(); ++k) {
    row.push_back(format_number(f.cl.at(k)));
    row.push_back(format_number(f.cd.at(k)));
  }
  out << csv_line(row);
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}
}  // namespace

ForceSeries read_forces_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("forces file not found: " + path.string(), path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty forces file: " + path.string(), 0);
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "time" || header[1] != "cl_total" ||
      header[2] != "cd_total" || (header.size() - 3) % 2 != 0)
    throw ParseError("unexpected forces header in " + path.string(), 0);
  ForceSeries s;
  for (std::size_t i = 3; i < header.size(); i += 2) s.patches.push_back(header[i].substr(3));
  s.cl.resize(s.patches.size());
  s.cd.resize(s.patches.size());
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("malformed forces row at byte offset " + std::to_string(offset), offset);
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      v[i] = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str())
        throw ParseError("malformed number in forces row at byte offset " + std::to_string(offset),
                         offset);
    }
    s.time.push_back(v[0]);
    s.cl_total.push_back(v[1]);
    s.cd_total.push_back(v[2]);
    for (std::size_t k = 0; k < s.patches.size(); ++k) {
      s.cl[k].push_back(v[3 + 2 * k]);
      s.cd[k].push_back(v[4 + 2 * k]);
    }
    offset += line.size() + 1;
  }
  return s;
}

void write_vtk(std::ostream& out, const Mesh& mesh, int order,
               const std::vector<VtkPointField>& scalars,
               const std::vector<VtkVectorField>& vectors) {
  const int n = order + 1;
  const std::size_t n3 = std::size_t(n) * n * n;
  const std::size_t ne = mesh.num_elements();
  if (mesh.metrics.size() != ne) throw ConfigError("VTK export needs mesh metrics");
  out << "# vtk DataFile Version 3.0\n"
      << "dgles field\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << ne * n3 << " double\n";
  for (const auto& em : mesh.metrics)
    for (const auto& x : em.x)
      out << format_number(x[0]) << ' ' << format_number(x[1]) << ' ' << format_number(x[2]) << '\n';
  const std::size_t sub = std::size_t(order) * order * order;
  const std::size_t cells = ne * sub;
  out << "CELLS " << cells << ' ' << cells * 9 << '\n';
  for (std::size_t e = 0; e < ne; ++e) {
    const std::size_t base = e * n3;
    for (int k = 0; k < order; ++k)
      for (int j = 0; j < order; ++j)
        for (int i = 0; i < order; ++i) {
          auto id = [&](int a, int b, int c) { return base + detail::idx3(i + a, j + b, k + c, n); };
          out << 8 << ' ' << id(0, 0, 0) << ' ' << id(1, 0, 0) << ' ' << id(1, 1, 0) << ' '
              << id(0, 1, 0) << ' ' << id(0, 0, 1) << ' ' << id(1, 0, 1) << ' ' << id(1, 1, 1)
              << ' ' << id(0, 1, 1) << '\n';
        }
  }
  out << "CELL_TYPES " << cells << '\n';
  for (std::size_t c = 0; c < cells; ++c) out << "12\n";
  out << "POINT_DATA " << ne * n3 << '\n';
  for (const auto& f : scalars) {
    if (f.values.size() != ne * n3) throw ConfigError("VTK field '" + f.name + "' has wrong size");
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values) out << format_number(v) << '\n';
  }
  for (const auto& f : vectors) {
    if (f.values.size() != ne * n3) throw ConfigError("VTK field '" + f.name + "' has wrong size");
    out << "VECTORS " << f.name << " double\n";
    for (const auto& v : f.values)
      out << format_number(v[0]) << ' ' << format_number(v[1]) << ' ' << format_number(v[2]) << '\n';
  }
}

}  // namespace dgles
