#include "dgles/mesh_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "dgles/error.hpp"

namespace dgles {

namespace {
constexpr const char* kMagic = "DGLES-MESH";
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << kMagic << '\n'
      << "version " << kMeshFormatVersion << '\n'
      << "geometry_order " << mesh.geometry_order << '\n'
      << "elements " << mesh.num_elements() << '\n'
      << "faces " << mesh.faces.size() << '\n'
      << "patches " << mesh.patches.size() << '\n';
  for (const auto& p : mesh.patches) out << "patch " << p.name << ' ' << to_string(p.kind) << '\n';
  out << "end_header\n";
  for (const auto& g : mesh.geometry)
    for (const Vec3& x : g)
      for (double c : x) detail::put(out, c);
  for (const Face& f : mesh.faces) {
    for (std::int32_t v : {f.left_elem, f.left_side, f.right_elem, f.right_side,
                           f.orientation, f.patch})
      detail::put(out, v);
    detail::put<std::int32_t>(out, f.periodic ? 1 : 0);
  }
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingInputError("cannot open mesh file for writing: " + path.string(), path.string());
  write_mesh(mesh, out);
}

namespace {

long header_value(detail::ByteReader& r, const std::string& key) {
  const std::size_t at = r.offset();
  const std::string line = r.line();
  std::istringstream is(line);
  std::string k;
  long v = 0;
  if (!(is >> k >> v) || k != key)
    throw ParseError("malformed header at byte offset " + std::to_string(at) +
                         ": expected '" + key + " <integer>', got '" + line + "'",
                     at);
  if (v < 0)
    throw ParseError("negative count for '" + key + "' at byte offset " + std::to_string(at), at);
  return v;
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  detail::ByteReader r(in);
  if (r.line() != kMagic) throw ParseError("malformed header: missing DGLES-MESH magic at byte offset 0", 0);
  const long version = header_value(r, "version");
  if (version != kMeshFormatVersion)
    throw VersionError("mesh format version " + std::to_string(version) +
                       " is not supported (expected " +
                       std::to_string(kMeshFormatVersion) + ")");
  Mesh mesh;
  mesh.geometry_order = static_cast<int>(header_value(r, "geometry_order"));
  if (mesh.geometry_order < 1 || mesh.geometry_order > kMaxOrder)
    throw ParseError("malformed header: geometry order out of range", r.offset());
  const long ne = header_value(r, "elements");
  const long nf = header_value(r, "faces");
  const long np = header_value(r, "patches");
  for (long i = 0; i < np; ++i) {
    const std::size_t at = r.offset();
    std::istringstream is(r.line());
    std::string key, name, kind;
    if (!(is >> key >> name >> kind) || key != "patch")
      throw ParseError("malformed patch entry at byte offset " + std::to_string(at), at);
    mesh.patches.push_back({name, parse_bc_kind(kind)});
  }
  {
    const std::size_t at = r.offset();
    if (r.line() != "end_header")
      throw ParseError("malformed header: missing end_header at byte offset " + std::to_string(at), at);
  }
  const int ng = mesh.geometry_order + 1;
  mesh.geometry.assign(ne, std::vector<Vec3>(std::size_t(ng) * ng * ng));
  for (auto& g : mesh.geometry)
    for (Vec3& x : g)
      for (double& c : x) c = r.get<double>("geometry node coordinate");
  mesh.faces.resize(nf);
  for (Face& f : mesh.faces) {
    f.left_elem = r.get<std::int32_t>("face record");
    f.left_side = r.get<std::int32_t>("face record");
    f.right_elem = r.get<std::int32_t>("face record");
    f.right_side = r.get<std::int32_t>("face record");
    f.orientation = r.get<std::int32_t>("face record");
    f.patch = r.get<std::int32_t>("face record");
    f.periodic = r.get<std::int32_t>("face record") != 0;
  }
  mesh.finalize();
  return mesh;
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("mesh file not found: " + path.string(), path.string());
  return read_mesh(in);
}

}  // namespace dgles
