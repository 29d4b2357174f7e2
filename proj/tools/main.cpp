#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dcprox/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dcprox - difference-of-convex solvers with convergence diagnostics"};
  app.require_subcommand(1);

  bool quiet = false;
  std::optional<std::uint64_t> seed_override;
  app.add_flag("--quiet", quiet, "suppress informational output");
  app.add_option("--seed", seed_override, "override the problem seed");

  std::string run_config;
  auto* run = app.add_subcommand("run", "execute one configured solve");
  run->add_option("config", run_config, "config JSON (schema v1)")->required();

  std::string cmp_config;
  auto* cmp = app.add_subcommand("compare", "run all configured solvers side by side");
  cmp->add_option("config", cmp_config, "config JSON (schema v1)")->required();

  std::string check_trace, check_problem;
  auto* chk = app.add_subcommand("check", "re-verify a stored trace");
  chk->add_option("trace", check_trace, "trace CSV produced by run")->required();
  chk->add_option("--problem", check_problem, "config JSON the trace was produced with")
      ->required();

  std::string rates_trace;
  std::optional<double> fstar;
  auto* rts = app.add_subcommand("rates", "rate classification for a stored trace");
  rts->add_option("trace", rates_trace, "trace CSV produced by run")->required();
  rts->add_option("--fstar", fstar, "reference optimal value");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return dcprox::cmd_run(run_config, seed_override, quiet);
  if (cmp->parsed()) return dcprox::cmd_compare(cmp_config, seed_override, quiet);
  if (chk->parsed()) return dcprox::cmd_check(check_trace, check_problem, quiet);
  if (rts->parsed()) return dcprox::cmd_rates(rates_trace, fstar, quiet);
  return dcprox::kExitConfig;
}
