#include "hyperbary/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace hyperbary;

int main(int argc, char** argv) {
  CLI::App app{"Barycenters of measures on hyperbolic space and the stochastic flows that transport them"};
  app.require_subcommand(1);

  cli::BarycenterArgs bary;
  auto* c_bary = app.add_subcommand("barycenter", "exponential barycenter of a measure with interior atoms");
  c_bary->add_option("file", bary.file, "measure file (JSON)")->required();
  c_bary->add_flag("--renormalize", bary.renormalize, "rescale weights that do not sum to 1");
  c_bary->add_flag("--json", bary.common.json, "machine-readable output");
  c_bary->add_option("--out", bary.common.out, "write output to this file");

  cli::BusemannArgs buse;
  auto* c_buse = app.add_subcommand("busemann", "Busemann barycenter of a measure on the ideal boundary");
  c_buse->add_option("file", buse.file, "measure file (JSON)")->required();
  c_buse->add_flag("--renormalize", buse.renormalize, "rescale weights that do not sum to 1");
  c_buse->add_flag("--oracle", buse.oracle, "compare with the closed form when one exists");
  c_buse->add_flag("--json", buse.common.json, "machine-readable output");
  c_buse->add_option("--out", buse.common.out, "write output to this file");

  cli::SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate particles and their barycenter");
  c_sim->add_option("kind", sim.kind, "two-particle | n-particle | geodesic")->required();
  c_sim->add_option("--config", sim.config, "simulation config (JSON)");
  c_sim->add_option("--seed", sim.seed, "random seed");
  c_sim->add_option("--out", sim.common.out, "CSV path; the report is written beside it with a .json extension");
  c_sim->add_flag("--json", sim.common.json, "print the report to stdout");
  c_sim->add_flag("--timing", sim.timing, "include wall-clock time in the report");

  cli::VerifyArgs ver;
  auto* c_ver = app.add_subcommand("verify", "run the self-verification checks");
  c_ver->add_option("--suite", ver.suite, "geometry | jacobi | barycenter | busemann | dynamics | harness | all")
      ->check(CLI::IsMember(verify::suites()));
  c_ver->add_option("--seed", ver.seed, "random seed");
  c_ver->add_flag("--json", ver.common.json, "machine-readable output");
  c_ver->add_option("--out", ver.common.out, "write output to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kRejected;
  }

  if (c_bary->parsed()) return cli::cmd_barycenter(bary, std::cout, std::cerr);
  if (c_buse->parsed()) return cli::cmd_busemann(buse, std::cout, std::cerr);
  if (c_sim->parsed()) return cli::cmd_simulate(sim, std::cout, std::cerr);
  return cli::cmd_verify(ver, std::cout, std::cerr);
}
