#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "dgles/solver.hpp"
#include "dgles/stats.hpp"

namespace dgles {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  long step = 0;
  double time = 0.0;
  Formulation formulation = Formulation::ImplicitLES_KG_GaussLobatto;
  int order = 0;
  std::uint64_t mesh_hash = 0;
  SolutionField field;  // state only; gradients are recomputed on demand
  std::optional<StatisticsAccumulator> statistics;
};

/// Text header (step, time as hexfloat, formulation, order, mesh hash, sizes)
/// followed by little-endian float64 nodal states and an optional
/// statistics block. Writing the same checkpoint twice gives identical bytes.
void write_checkpoint(const Checkpoint& ck, std::ostream& out);
void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);

/// Throws ParseError, VersionError; a missing file raises MissingInputError.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// ValidationError unless the checkpoint matches the solver's formulation,
/// order and mesh.
void check_compatible(const Checkpoint& ck, const Solver& solver);

}  // namespace dgles
