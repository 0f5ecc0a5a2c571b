#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "quadcable/errors.hpp"
#include "quadcable/scenario.hpp"

using namespace quadcable;

namespace {

// a path, or the name of a built-in scenario
ScenarioConfig resolve(const std::string& arg) {
  if (!std::filesystem::exists(arg)) {
    for (const auto& n : builtin_scenarios())
      if (n == arg) {
        ScenarioConfig c = builtin_scenario(n);
        c.validate();
        return c;
      }
  }
  return load_config(arg);
}

int cmd_run(const std::string& arg) {
  const ScenarioConfig c = resolve(arg);
  const RunReport r = run_scenario(c);
  std::cout << r.to_text();
  return r.failed ? 2 : 0;
}

int cmd_sweep(const std::string& arg, std::vector<double> eps) {
  const ScenarioConfig c = resolve(arg);
  if (eps.empty()) eps = c.sweep_eps;
  const SweepReport r = epsilon_sweep(c, eps);
  std::cout << r.to_text();
  for (const auto& e : r.entries)
    if (e.failed) return 2;
  return 0;
}

int cmd_certify(const std::string& arg) {
  const ScenarioConfig c = resolve(arg);
  const ResolvedGains g = resolve_gains(c);
  std::cout << g.certificate.to_text();
  if (!c.disturbance.zero()) {
    try {
      std::cout << "ultimate bound:\n"
                << ultimate_bound(g.gains, g.constants, c.params, c.disturbance, c.eps_young)
                       .to_text();
    } catch (const InvalidGains& e) {
      std::cout << "ultimate bound: " << e.what() << "\n";
    }
  }
  return g.certificate.verdict ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cable-suspended load transport: simulation, control and gain certificates"};
  app.require_subcommand(1);
  std::string cfg;
  std::vector<double> eps;
  auto* run = app.add_subcommand("run", "run a scenario and write its CSV log");
  run->add_option("config", cfg, "config file or built-in scenario name")->required();
  auto* sweep = app.add_subcommand("sweep", "full vs reduced model deviation over eps");
  sweep->add_option("config", cfg, "config file or built-in scenario name")->required();
  sweep->add_option("--eps", eps, "eps values")->delimiter(',');
  auto* cert = app.add_subcommand("certify", "print the gain certificate");
  cert->add_option("config", cfg, "config file or built-in scenario name")->required();
  auto* list = app.add_subcommand("list-scenarios", "print the built-in scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*list) {
      for (const auto& n : builtin_scenarios()) std::cout << n << "\n";
      return 0;
    }
    if (*run) return cmd_run(cfg);
    if (*sweep) return cmd_sweep(cfg, eps);
    if (*cert) return cmd_certify(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 1;
  } catch (const CertificationFailed& e) {
    std::cerr << "certification failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
