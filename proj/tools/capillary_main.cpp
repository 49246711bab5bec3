#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "capillary/config.hpp"
#include "capillary/run.hpp"

namespace {

capillary::RunConfig load(const std::string& config_path, std::int64_t seed_override) {
  capillary::RunConfig rc = capillary::parse_config(config_path);
  if (seed_override >= 0) rc.seed = static_cast<std::uint64_t>(seed_override);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for the compressible capillarity energy on 2-D cross-sections"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string field_path;
  std::int64_t seed = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
    cmd->add_option("--seed", seed, "random seed (overrides the config)");
  };

  CLI::App* solve = app.add_subcommand("solve", "minimize the energy and write the fields");
  add_common(solve);
  CLI::App* verify = app.add_subcommand("verify", "run diagnostics on a stored density field");
  add_common(verify);
  verify->add_option("--field", field_path, "density field CSV")->required();
  CLI::App* radial = app.add_subcommand("radial", "axisymmetric reference profile");
  add_common(radial);
  CLI::App* continuation =
      app.add_subcommand("continuation", "Dirichlet sub-problems on an interior ball");
  add_common(continuation);
  CLI::App* lemmas = app.add_subcommand("lemmas", "level-set iteration bounds");
  add_common(lemmas);

  CLI11_PARSE(app, argc, argv);

  try {
    const capillary::RunConfig rc = load(config_path, seed);
    const std::string dir = out_dir.empty() ? rc.output_dir : out_dir;
    if (solve->parsed()) return capillary::cmd_solve(rc, dir);
    if (verify->parsed()) return capillary::cmd_verify(rc, field_path, dir);
    if (radial->parsed()) return capillary::cmd_radial(rc, dir);
    if (continuation->parsed()) return capillary::cmd_continuation(rc, dir);
    if (lemmas->parsed()) return capillary::cmd_lemmas(rc, dir, std::cout);
  } catch (const capillary::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return capillary::exit_config_error;
  } catch (const capillary::io::IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return capillary::exit_config_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return capillary::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return capillary::exit_no_convergence;
  }
  return capillary::exit_config_error;
}
