#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgles/bench.hpp"
#include "dgles/spectral.hpp"
#include "dgles/stats.hpp"

namespace dgles {

// CSV header contracts.
std::vector<std::string> surface_csv_header();
std::vector<std::string> forces_csv_header(const std::vector<std::string>& patches);
std::vector<std::string> wake_csv_header();
std::vector<std::string> psd_csv_header(const std::vector<std::string>& patches);
std::vector<std::string> bench_csv_header();
std::vector<std::string> energy_csv_header();

std::string csv_line(const std::vector<std::string>& cells);
std::string format_number(double v);

void write_surface_csv(std::ostream& out, const SurfaceCoefficients& coeffs,
                       const std::vector<std::string>& patch_names);
void write_wake_csv(std::ostream& out, const WakeProfile& profile);
/// File name for a wake station, e.g. wake_x2.5.csv.
std::string wake_file_name(double station);
/// psd_total plus one column per patch; every result shares one frequency axis.
void write_psd_csv(std::ostream& out, const PsdResult& total,
                   const std::vector<std::string>& patches,
                   const std::vector<PsdResult>& per_patch);
void write_bench_csv(std::ostream& out, const std::vector<RampReport>& reports);

/// Appends one row per call; writes the header when the stream is new.
class ForcesWriter {
 public:
  ForcesWriter(const std::filesystem::path& path, const std::vector<std::string>& patches,
               bool append);
  void write(double time, const ForceCoefficients& f);

 private:
  std::filesystem::path path_;
  std::vector<std::string> patches_;
};

struct ForceSeries {
  std::vector<std::string> patches;
  std::vector<double> time;
  std::vector<double> cl_total;
  std::vector<double> cd_total;
  std::vector<std::vector<double>> cl;  // per patch
  std::vector<std::vector<double>> cd;
};

/// Reads forces.csv; MissingInputError when absent, ParseError on bad rows.
ForceSeries read_forces_csv(const std::filesystem::path& path);

struct VtkPointField {
  std::string name;
  std::vector<double> values;  // one per node
};
struct VtkVectorField {
  std::string name;
  std::vector<Vec3> values;
};

/// Legacy ASCII VTK unstructured grid, N^3 hexahedral sub-cells per element.
void write_vtk(std::ostream& out, const Mesh& mesh, int order,
               const std::vector<VtkPointField>& scalars,
               const std::vector<VtkVectorField>& vectors);

}  // namespace dgles
