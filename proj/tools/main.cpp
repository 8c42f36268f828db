#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace cli = obliq::cli;

int main(int argc, char** argv) {
  CLI::App app{"Oblique reflection and competing particle solvers"};
  app.require_subcommand(1);

  cli::CommandOptions opts;
  std::uint64_t seed = 0;
  std::string method;
  std::size_t level = 0;
  double tol = 0.0;

  using Command = std::function<int(const cli::CommandOptions&, std::ostream&, std::ostream&)>;
  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"validate", {"Validate a reflection matrix or collision parameters", cli::cmd_validate}},
      {"solve", {"Solve a Skorokhod problem or competing particle system", cli::cmd_solve}},
      {"simulate-srbm", {"Simulate a reflected Brownian motion", cli::cmd_simulate_srbm}},
      {"simulate-cbp", {"Simulate competing Brownian particles", cli::cmd_simulate_cbp}},
      {"approximate", {"Emit the standard regular approximation of a sampled path", cli::cmd_approximate}},
      {"verify", {"Run comparison property suites", cli::cmd_verify}},
  };

  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opts.config, "JSON configuration file")->required();
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--method", method, "Solver route")
        ->check(CLI::IsMember({"exact", "continuous", "interpolated", "grid"}));
    sub->add_option("--level", level, "Regular approximation level");
    sub->add_option("--tol", tol, "Tolerance override");
    sub->add_flag("--compare", opts.compare,
                  "solve: also run the other route; simulate-cbp: cross-check the gap SRBM");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::config_error;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--method")) opts.method = method;
    if (sub->count("--level")) opts.level = level;
    if (sub->count("--tol")) opts.tol = tol;
    return commands.at(name).second(opts, std::cout, std::cerr);
  }
  return cli::config_error;
}
