// ziber: fit, simulate and compare zero-inflated Bernoulli regression models.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ziber/cli.hpp"

namespace {

void add_data_flags(CLI::App* cmd, ziber::cli::DataArgs& d) {
  cmd->add_option("--data", d.data, "CSV file with a header row")->required();
  cmd->add_option("--y", d.y, "binary (0/1) response column")->required();
  cmd->add_option("--x", d.x, "event-submodel-only covariates")->delimiter(',');
  cmd->add_option("--z", d.z, "susceptible-probability covariates (also enter the event submodel)")
      ->delimiter(',');
}

template <class T>
void add_out(CLI::App* cmd, std::optional<T>& out) {
  cmd->add_option_function<std::string>("--out", [&out](const std::string& p) { out = p; },
                                        "write full-precision CSV to this path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-inflated Bernoulli regression with logit, probit, cloglog and GEV "
               "susceptible-probability links"};
  app.require_subcommand(1);

  ziber::cli::FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit one model and report estimates, ASEs and p-values");
  add_data_flags(fit_cmd, fit.data);
  fit_cmd->add_option("--link", fit.link, "logit|probit|cloglog|gev|plain-logit|plain-probit")
      ->capture_default_str();
  fit_cmd->add_option("--level", fit.level, "confidence level")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "seed for optimizer restarts")->capture_default_str();
  add_out(fit_cmd, fit.out);

  ziber::cli::SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the estimators");
  sim_cmd->add_option("--scenario", sim.scenario, "built-in name (case1-A..case2-D) or JSON file")
      ->required();
  sim_cmd->add_option("--n", sim.n, "sample size")->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "number of replications")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "study seed")->capture_default_str();
  sim_cmd->add_option("--level", sim.level, "confidence level for CP")->capture_default_str();
  add_out(sim_cmd, sim.out);

  ziber::cli::CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Vuong tests of the first model against the others");
  add_data_flags(cmp_cmd, cmp.data);
  cmp_cmd->add_option("--link", cmp.links, "model to fit; repeat for each model")->required();
  cmp_cmd->add_option("--seed", cmp.seed, "seed for optimizer restarts")->capture_default_str();
  add_out(cmp_cmd, cmp.out);

  ziber::cli::HistogramArgs hist;
  auto* hist_cmd = app.add_subcommand("histogram", "value frequencies of a count column");
  hist_cmd->add_option("--data", hist.data, "CSV file with a header row")->required();
  hist_cmd->add_option("--column", hist.column, "integer-valued column")->required();
  add_out(hist_cmd, hist.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*fit_cmd) return ziber::cli::cmd_fit(fit, std::cout, std::cerr);
  if (*sim_cmd) return ziber::cli::cmd_simulate(sim, std::cout, std::cerr);
  if (*cmp_cmd) return ziber::cli::cmd_compare(cmp, std::cout, std::cerr);
  if (*hist_cmd) return ziber::cli::cmd_histogram(hist, std::cout, std::cerr);
  return 1;
}
