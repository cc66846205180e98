#include <CLI11.hpp>

#include <iostream>

#include "dgles/app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"DG spectral element LES solver"};
  cli.require_subcommand(1);

  std::string config_path;
  dgles::AppOptions options;
  std::optional<int> threads;
  std::string resume;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config_path, "YAML run configuration")->required();
    sub->add_option("--threads", threads, "OpenMP thread count");
  };
  auto* mesh = cli.add_subcommand("mesh", "generate and validate the mesh");
  auto* run = cli.add_subcommand("run", "advance the solution and collect statistics");
  auto* post = cli.add_subcommand("post", "surface, wake, field and spectral output");
  auto* psd = cli.add_subcommand("psd", "Welch PSD of the lift history");
  auto* bench = cli.add_subcommand("bench", "CFL ramp and cost per CTU");
  for (auto* sub : {mesh, run, post, psd, bench}) add_common(sub);
  for (auto* sub : {run, bench})
    sub->add_flag("--deterministic", options.deterministic, "ordered reductions");
  run->add_option("--resume", resume, "checkpoint to restart from");
  post->add_option("--checkpoint", resume, "checkpoint to post-process (default final.chk)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : dgles::kExitConfig;
  }
  options.threads = threads;
  if (!resume.empty()) options.resume = resume;
  const std::string command = cli.get_subcommands().front()->get_name();
  return dgles::run_command(command, config_path, options, std::cout, std::cerr);
}
