#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sinkflow/error.hpp"
#include "sinkflow/run.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "override generator.seed");
  cmd->add_option("-o,--out", c.out, "override output_dir");
}

sinkflow::RunConfig resolve(const Common& c) {
  sinkflow::RunConfig config =
      c.config_path.empty() ? sinkflow::RunConfig{} : sinkflow::load_config(c.config_path);
  if (c.seed) config.generator.seed = *c.seed;
  if (c.out) config.output_dir = *c.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sinkhorn flow experiments: solver, flow integrator, spectral and decay certificates"};
  app.require_subcommand(1);

  Common common;
  std::optional<std::string> trace_path;
  sinkflow::PlanRequest plan;

  struct Entry {
    const char* name;
    const char* help;
    std::optional<sinkflow::Command> command;
  };
  const Entry entries[] = {
      {"generate", "write the generated problem", sinkflow::Command::generate},
      {"sinkhorn", "solve with Sinkhorn and write the half-step trace", sinkflow::Command::sinkhorn},
      {"flow", "integrate the Sinkhorn flow and write the trace", sinkflow::Command::flow},
      {"spectral", "Poincare constant and contraction rates", sinkflow::Command::spectral},
      {"certify", "flow plus certificates; exit 1 on failure", sinkflow::Command::certify},
      {"plan", "iterations needed to reach a target entropy", std::nullopt},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, common);
    subs.emplace_back(sub, &e);
    if (std::string(e.name) == "certify")
      sub->add_option("--trace", trace_path, "certify a saved trace.csv instead of running")
          ->check(CLI::ExistingFile);
    if (std::string(e.name) == "plan") {
      sub->add_option("--h0", plan.h0, "initial entropy H0");
      sub->add_option("--tau", plan.tau, "target entropy");
      sub->add_option("--lambda", plan.lambda, "LSI constant");
      sub->add_option("--gamma", plan.gamma, "step size");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sinkflow::kExitUsage;
  }

  try {
    const sinkflow::RunConfig config = resolve(common);
    for (const auto& [sub, entry] : subs) {
      if (!sub->parsed()) continue;
      sinkflow::RunResult result;
      if (!entry->command)
        result = sinkflow::run_plan(config, plan);
      else if (*entry->command == sinkflow::Command::certify && trace_path)
        result = sinkflow::run_certify_trace(config, *trace_path);
      else
        result = sinkflow::run(config, *entry->command);
      std::cout << result.report.dump(2) << '\n';
      return result.exit_code;
    }
  } catch (const sinkflow::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sinkflow::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sinkflow::kExitNumerical;
  }
  return sinkflow::kExitUsage;
}
