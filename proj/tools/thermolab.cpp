#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "thermolab/cli/commands.hpp"
#include "thermolab/cli/config.hpp"
#include "thermolab/errors.hpp"
#include "thermolab/parallel.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* path;
  const char* help;
};

const std::map<std::string, std::vector<FlagSpec>>& command_flags() {
  static const std::map<std::string, std::vector<FlagSpec>> flags{
      {"pressure", {}},
      {"gibbs", {{"--max-length", "gibbs.max_length", "longest cylinder word"}}},
      {"normalize", {}},
      {"scan-b",
       {{"--bmin", "scan.bmin", "smallest |b|"},
        {"--bmax", "scan.bmax", "largest |b|"},
        {"--steps", "scan.steps", "number of b values"},
        {"--m", "scan.m", "operator power per b"}}},
      {"contraction", {{"--b", "b", "imaginary part"}, {"--m", "contraction.m", "largest power"}}},
      {"dolgopyat-check", {{"--b", "b", "imaginary part"}}},
      {"iterate", {{"--b", "b", "imaginary part"}, {"--steps", "iterate.steps", "iteration count"}}},
      {"correlate",
       {{"--tmax", "correlate.tmax", "last time"},
        {"--dt", "correlate.dt", "time step"},
        {"--samples", "correlate.samples", "Monte Carlo sample count"},
        {"--seed", "correlate.seed", "Monte Carlo seed"}}},
      {"decay",
       {{"--tmax", "correlate.tmax", "last time"},
        {"--dt", "correlate.dt", "time step"},
        {"--samples", "correlate.samples", "Monte Carlo sample count"},
        {"--seed", "correlate.seed", "Monte Carlo seed"},
        {"--noise-sigmas", "decay.noise_sigmas", "standard errors below which points are dropped"}}},
      {"orbits", {{"--n-max", "orbits.n_max", "longest orbit word"}}},
      {"zeta",
       {{"--n-max", "zeta.n_max", "trace-log truncation order"},
        {"--orbit-n-max", "zeta.orbit_n_max", "orbit-product truncation order"}}},
      {"poc",
       {{"--lambda-min", "poc.lambda_min", "first lambda"},
        {"--lambda-max", "poc.lambda_max", "last lambda"},
        {"--lambda-step", "poc.lambda_step", "lambda step"},
        {"--n-max", "poc.n_max", "longest orbit word (0: derived)"}}},
  };
  return flags;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace thermolab;
  CLI::App app{"thermolab: transfer operators, contraction estimates and orbit counting on subshifts"};
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  int threads = 0;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "configuration file");
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("--set", sets, "override a config entry, key.path=value");
  app.add_option("-j,--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "only print errors");
  app.require_subcommand(1);

  std::map<std::string, std::map<std::string, std::optional<std::string>>> values;
  for (const auto& name : cli::command_names()) {
    auto* sub = app.add_subcommand(name, "run " + name);
    sub->fallthrough();
    for (const auto& f : command_flags().at(name)) sub->add_option(f.flag, values[name][f.path], f.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }
  if (quiet) spdlog::set_level(spdlog::level::err);

  const std::string command = app.get_subcommands().front()->get_name();
  cli::Overrides overrides;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set expects key.path=value, got '" << s << "'\n";
      return cli::kExitUsage;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [path, v] : values[command])
    if (v) overrides.emplace_back(path, *v);

  try {
    const auto cfg = config_path.empty() ? cli::parse_config_text("{}", overrides)
                                         : cli::parse_config(config_path, overrides);
    if (threads > 0)
      set_thread_count(threads);
    else if (!std::getenv("THERMOLAB_THREADS") && cfg.threads)
      set_thread_count(static_cast<int>(*cfg.threads));
    if (out_dir.empty()) {
      const char* env = std::getenv("THERMOLAB_OUT_DIR");
      out_dir = env && *env ? env : cfg.out_dir;
    }
    const auto rec = cli::run_command(cfg, command, out_dir);
    if (!quiet) std::cout << cli::summary_text(rec);
    return cli::kExitOk;
  } catch (const ConfigError& e) {
    for (const auto& m : e.messages()) std::cerr << "error: " << m << "\n";
    return cli::kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
