// Command-line front end: analyze / simulate / sweep / reproduce-table1.
// Every command is a pure function of (spec file, flags); rerunning writes
// byte-identical outputs.
//
// Exit codes: 0 ok, 2 spec error, 3 numeric failure, 4 enumeration cap breach.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "randcollect/randcollect.hpp"

namespace {

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::size_t> parse_n_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoul(item)));
  }
  return out;
}

struct CommonArgs {
  std::string spec_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  std::optional<double> beta;
  std::optional<std::int64_t> horizon;
  std::optional<std::int64_t> burn_in;
  std::optional<double> alpha;
  std::string beta_grid;
  bool strict = false;
  bool dump_matrix = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool spec_required) {
  auto* opt = cmd->add_option("--spec", a.spec_path, "experiment spec JSON file");
  if (spec_required) opt->required();
  cmd->add_option("--out", a.out_dir, "output directory");
  cmd->add_option("--seed", a.seed, "override the spec's RNG seed");
  cmd->add_option("--eps", a.eps, "override the walk laziness");
  cmd->add_option("--beta", a.beta, "override the arrival rate");
  cmd->add_option("--horizon", a.horizon, "override the slot horizon");
  cmd->add_option("--burn-in", a.burn_in, "override the burn-in slots");
  cmd->add_option("--alpha", a.alpha, "override the latency-bound constant");
  cmd->add_option("--beta-grid", a.beta_grid, "comma-separated sweep grid");
  cmd->add_flag("--strict", a.strict, "treat enumeration cap breaches as errors");
  cmd->add_flag("--dump-matrix", a.dump_matrix, "also write transition_matrix.csv");
}

randcollect::ExperimentSpec resolve(const CommonArgs& a) {
  randcollect::ExperimentSpec spec;
  if (!a.spec_path.empty()) spec = randcollect::load_experiment_spec(a.spec_path);
  if (a.seed) spec.seed = *a.seed;
  if (a.eps) spec.eps = *a.eps;
  if (a.beta) spec.beta = *a.beta;
  if (a.horizon) spec.horizon = *a.horizon;
  if (a.burn_in) spec.burn_in = *a.burn_in;
  if (a.alpha) spec.alpha = *a.alpha;
  if (!a.beta_grid.empty()) spec.beta_grid = parse_grid(a.beta_grid);
  spec.strict = a.strict;
  spec.dump_matrix = a.dump_matrix;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-walk data collection: analysis and simulation"};
  app.require_subcommand(1);

  CommonArgs analyze_args, simulate_args, sweep_args, table_args;
  std::string n_list_csv = "10";

  auto* analyze = app.add_subcommand("analyze", "spectra, hitting times and rate bounds");
  add_common(analyze, analyze_args, true);
  auto* simulate = app.add_subcommand("simulate", "one slot-synchronous run");
  add_common(simulate, simulate_args, true);
  auto* sweep = app.add_subcommand("sweep", "run a beta grid and bracket the critical rate");
  add_common(sweep, sweep_args, true);
  auto* table = app.add_subcommand("reproduce-table1", "rate-bound table for the named families");
  add_common(table, table_args, false);
  table->add_option("--n-list", n_list_csv, "comma-separated node counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*analyze) {
      const auto spec = resolve(analyze_args);
      const auto res = randcollect::cmd_analyze(spec, analyze_args.out_dir);
      std::cout << "beta_star " << randcollect::fmt_g12(res.report.exact_rate) << "\n"
                << "lambda2 " << randcollect::fmt_g12(res.report.lambda2) << "\n"
                << "t_hit " << randcollect::fmt_g12(res.t_hit) << "\n"
                << "wrote " << analyze_args.out_dir << "\n";
    } else if (*simulate) {
      const auto spec = resolve(simulate_args);
      const auto res = randcollect::cmd_simulate(spec, simulate_args.out_dir);
      std::cout << "throughput_hat " << randcollect::fmt_g12(res.metrics.throughput_hat)
                << "\nverdict " << randcollect::to_string(res.verdict) << "\nwrote "
                << simulate_args.out_dir << "\n";
    } else if (*sweep) {
      const auto spec = resolve(sweep_args);
      const auto res = randcollect::cmd_sweep(spec, sweep_args.out_dir);
      std::cout << "last_stable "
                << (res.last_stable ? randcollect::fmt_g12(*res.last_stable) : "none")
                << "\nfirst_unstable "
                << (res.first_unstable ? randcollect::fmt_g12(*res.first_unstable) : "none")
                << "\nwrote " << sweep_args.out_dir << "\n";
    } else if (*table) {
      const auto spec = resolve(table_args);
      const auto rows =
          randcollect::cmd_reproduce_table1(parse_n_list(n_list_csv), spec, table_args.out_dir);
      std::cout << "rows " << rows.size() << "\nwrote " << table_args.out_dir << "\n";
    }
  } catch (const randcollect::SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return 2;
  } catch (const randcollect::CapExceeded& e) {
    std::cerr << "cap breach: " << e.what() << "\n";
    return 4;
  } catch (const randcollect::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
