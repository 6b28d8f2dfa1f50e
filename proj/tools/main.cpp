// moyal: batch runner for the star-product experiments.
//
// Exit status: 0 all checks pass, 1 a check failed, 2 bad configuration, 3 an
// iterative method did not converge.

#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "moyal/errors.hpp"
#include "moyal/io.hpp"

using namespace moyal;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sc, Common& c) {
  sc->add_option("--config", c.config, "JSON config file");
  sc->add_option("--seed", c.seed, "RNG seed");
  sc->add_option("--out", c.out, "output directory");
  sc->add_option("--tol-override", c.overrides, "KEY=VAL, repeatable")->take_all();
}

cli::Run make_run(const std::string& name, const Common& c) {
  cli::Run run;
  run.command = name;
  run.seed = c.seed;
  run.out = c.out;
  if (!c.config.empty()) {
    try {
      run.config = io::read_json_file(c.config);
    } catch (const ArgumentError& e) {
      throw cli::ConfigError(e.what());
    }
    if (!run.config.is_object()) throw cli::ConfigError(c.config + ": expected a JSON object");
  }
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw cli::ConfigError("--tol-override expects KEY=VAL, got " + kv);
    try {
      size_t used = 0;
      const double v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing characters");
      run.tol_override[kv.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw cli::ConfigError("--tol-override: not a number in " + kv);
    }
  }
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl-Moyal star product experiments"};
  app.require_subcommand(1);

  Common common;
  std::string bundle_file, sigma0_file, emit = "invariants.csv";
  int samples = 0;

  auto* star = app.add_subcommand("star", "star product of two functions with residual checks");
  auto* norms = app.add_subcommand("norms", "operator norms against the L1 and seminorm bounds");
  auto* estimates = app.add_subcommand("estimates", "seminorm inequality sweep");
  auto* approx = app.add_subcommand("approx-id", "approximate identity convergence table");
  auto* bundle = app.add_subcommand("bundle", "finite-base functor round trips");
  auto* orbit = app.add_subcommand("orbit", "Lorentz orbit sampling and invariants");
  for (auto* sc : {star, norms, estimates, approx, bundle, orbit}) add_common(sc, common);
  bundle->add_option("--bundle", bundle_file, "bundle description JSON");
  orbit->add_option("--sigma0-file", sigma0_file, "Poisson JSON for the reference form");
  orbit->add_option("--samples", samples, "number of orbit points")->check(CLI::PositiveNumber);
  orbit->add_option("--emit", emit, "per-point CSV name inside --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  cli::Run run;
  run.command = name;
  run.out = common.out;
  try {
    run = make_run(name, common);
    cli::Outcome o;
    if (name == "star") o = cli::run_star(run);
    else if (name == "norms") o = cli::run_norms(run);
    else if (name == "estimates") o = cli::run_estimates(run);
    else if (name == "approx-id") o = cli::run_approx_id(run);
    else if (name == "bundle") o = cli::run_bundle(run, bundle_file);
    else o = cli::run_orbit(run, sigma0_file, samples, emit);
    const int rc = cli::write_outcome(run, o);
    for (const auto& f : o.failures) std::cerr << "FAIL " << f << '\n';
    return rc;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    cli::write_error_report(run, "numeric_error", e.what(), {{"lower", e.lower()}, {"upper", e.upper()}});
    return 3;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    cli::write_error_report(run, "config_error", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {  // ArgumentError, CommensurabilityError
    std::cerr << "config error: " << e.what() << '\n';
    cli::write_error_report(run, "config_error", e.what());
    return 2;
  } catch (const UnsupportedRepresentation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    cli::write_error_report(run, "config_error", e.what());
    return 2;
  } catch (const RankError& e) {
    std::cerr << "rank error: " << e.what() << '\n';
    cli::write_error_report(run, "fail", e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    cli::write_error_report(run, "config_error", e.what());
    return 2;
  }
}
