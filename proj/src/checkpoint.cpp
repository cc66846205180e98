#include "dgles/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "dgles/error.hpp"

namespace dgles {

namespace {

constexpr const char* kMagic = "DGLES-CHECKPOINT";

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

// "key value" header line; ParseError when the key differs.
std::string expect_key(detail::ByteReader& r, const std::string& key) {
  const std::size_t at = r.offset();
  const std::string line = r.line();
  if (line.rfind(key + " ", 0) != 0)
    throw ParseError("expected '" + key + "' at byte offset " + std::to_string(at) +
                         ", found '" + line + "'",
                     at);
  return line.substr(key.size() + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& key, std::size_t at) {
  std::istringstream is(text);
  T v{};
  if (!(is >> v))
    throw ParseError("malformed value for '" + key + "' at byte offset " + std::to_string(at),
                     at);
  return v;
}

}  // namespace

void write_checkpoint(const Checkpoint& ck, std::ostream& out) {
  const auto& f = ck.field;
  const int n3 = f.nodes_per_element();
  out << kMagic << "\n"
      << "version " << kCheckpointVersion << "\n"
      << "step " << ck.step << "\n"
      << "time " << hexfloat(ck.time) << "\n"
      << "formulation " << to_string(ck.formulation) << "\n"
      << "order " << ck.order << "\n";
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ck.mesh_hash));
  out << "mesh_hash " << hash << "\n"
      << "elements " << f.elements << "\n"
      << "nodes_per_element " << n3 << "\n"
      << "statistics " << (ck.statistics ? 1 : 0) << "\n"
      << "end_header\n";
  for (const State& u : f.u)
    for (double v : u) detail::put<double>(out, v);
  if (ck.statistics) {
    const auto& s = *ck.statistics;
    detail::put<std::int64_t>(out, static_cast<std::int64_t>(s.num_nodes()));
    detail::put<std::int64_t>(out, s.count());
    detail::put<double>(out, s.start_time());
    detail::put<double>(out, s.stop_time());
    detail::put<std::int32_t>(out, StatisticsAccumulator::kChannels);
    for (const auto& c : s.sums()) {
      detail::put<double>(out, c.sum);
      detail::put<double>(out, c.comp);
    }
  }
  if (!out) throw Error("failed to write checkpoint");
}

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_checkpoint(ck, out);
}

Checkpoint read_checkpoint(std::istream& in) {
  detail::ByteReader r(in);
  if (r.line() != kMagic) throw ParseError("not a checkpoint file (bad magic)", 0);
  {
    const std::size_t at = r.offset();
    const int version = parse_number<int>(expect_key(r, "version"), "version", at);
    if (version != kCheckpointVersion)
      throw VersionError("checkpoint version " + std::to_string(version) +
                         " is not supported (expected " +
                         std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  std::size_t at = r.offset();
  ck.step = parse_number<long>(expect_key(r, "step"), "step", at);
  at = r.offset();
  {
    const std::string t = expect_key(r, "time");
    char* end = nullptr;
    ck.time = std::strtod(t.c_str(), &end);
    if (end == t.c_str()) throw ParseError("malformed time at byte offset " + std::to_string(at), at);
  }
  ck.formulation = parse_formulation(expect_key(r, "formulation"));
  at = r.offset();
  ck.order = parse_number<int>(expect_key(r, "order"), "order", at);
  at = r.offset();
  {
    const std::string h = expect_key(r, "mesh_hash");
    try {
      ck.mesh_hash = std::stoull(h, nullptr, 16);
    } catch (const std::exception&) {
      throw ParseError("malformed mesh_hash at byte offset " + std::to_string(at), at);
    }
  }
  at = r.offset();
  const auto elements = parse_number<std::size_t>(expect_key(r, "elements"), "elements", at);
  at = r.offset();
  const int n3 = parse_number<int>(expect_key(r, "nodes_per_element"), "nodes_per_element", at);
  at = r.offset();
  const int has_stats = parse_number<int>(expect_key(r, "statistics"), "statistics", at);
  if (r.line() != "end_header") throw ParseError("missing end_header", r.offset());
  if (ck.order < kMinOrder || ck.order > kMaxOrder || (ck.order + 1) * (ck.order + 1) * (ck.order + 1) != n3)
    throw ParseError("inconsistent order and nodes_per_element", at);

  ck.field = SolutionField(elements, ck.order);
  for (State& u : ck.field.u)
    for (double& v : u) v = r.get<double>("state value");
  if (has_stats) {
    const auto nodes = r.get<std::int64_t>("statistics node count");
    const auto count = r.get<std::int64_t>("statistics sample count");
    const double start = r.get<double>("statistics start time");
    const double stop = r.get<double>("statistics stop time");
    const auto channels = r.get<std::int32_t>("statistics channel count");
    if (channels != StatisticsAccumulator::kChannels || nodes < 0)
      throw ParseError("statistics block layout does not match this build", r.offset());
    std::vector<CompensatedSum> sums(static_cast<std::size_t>(nodes) * channels);
    for (auto& c : sums) {
      c.sum = r.get<double>("statistics sum");
      c.comp = r.get<double>("statistics compensation");
    }
    StatisticsAccumulator acc;
    acc.restore(static_cast<std::size_t>(nodes), count, start, stop, std::move(sums));
    ck.statistics = std::move(acc);
  }
  return ck;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("checkpoint not found: " + path.string(), path.string());
  return read_checkpoint(in);
}

void check_compatible(const Checkpoint& ck, const Solver& solver) {
  if (ck.formulation != solver.scheme().formulation)
    throw ValidationError("checkpoint formulation " + std::string(to_string(ck.formulation)) +
                          " differs from the configured " +
                          std::string(to_string(solver.scheme().formulation)));
  if (ck.order != solver.basis().order())
    throw ValidationError("checkpoint order " + std::to_string(ck.order) +
                          " differs from the configured " +
                          std::to_string(solver.basis().order()));
  if (ck.mesh_hash != solver.mesh().hash() ||
      ck.field.elements != solver.mesh().num_elements())
    throw ValidationError("checkpoint was written for a different mesh");
}

}  // namespace dgles
