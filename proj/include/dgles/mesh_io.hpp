#pragma once

#include <filesystem>
#include <iosfwd>

#include "dgles/mesh.hpp"

namespace dgles {

inline constexpr int kMeshFormatVersion = 1;

/// Mesh container: a text header (magic, version, counts, patch table)
/// terminated by "end_header\n", then little-endian float64 geometry nodes
/// and int32 face records. See docs/mesh_format.md.
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// Throws ParseError (with byte offset), VersionError or ValidationError.
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::filesystem::path& path);

}  // namespace dgles
