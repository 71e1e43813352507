#include <CLI11.hpp>

#include <iostream>

#include "nevgrowth/experiment.hpp"

namespace ex = nevgrowth::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Growth certificates for linear ODEs with meromorphic coefficients"};
  app.set_version_flag("--version", ex::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  double tol = 0.0;
  int threads = 1;
  std::uint64_t seed = 0;

  for (const char* name : {"nevanlinna", "certify", "density", "compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--tol", tol, "integration tolerance (overrides the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed recorded in the manifest");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  ex::ExperimentConfig cfg;
  try {
    cfg = ex::load_config(config);
  } catch (const nevgrowth::Error& e) {
    std::cerr << e.kind() << ": " << e.what() << '\n';
    return 2;
  }

  ex::RunOptions opt;
  opt.out_dir = out_dir;
  if (tol > 0.0) opt.tol = tol;
  opt.threads = threads;
  opt.seed = seed;
  try {
    const ex::RunResult res = ex::run(command, cfg, opt);
    for (const auto& t : res.tasks) std::cout << cfg.name << ' ' << t.id << ' ' << t.status << '\n';
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
