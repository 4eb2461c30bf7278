// Command-line front end: scenario files in, policies, gains and tables out.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mmppctl/config.hpp"
#include "mmppctl/csv_io.hpp"
#include "mmppctl/errors.hpp"
#include "mmppctl/experiments.hpp"
#include "mmppctl/heuristics.hpp"
#include "mmppctl/mdp_solver.hpp"
#include "mmppctl/nhpp.hpp"
#include "mmppctl/structure_checks.hpp"

namespace fs = std::filesystem;
using namespace mmppctl;

namespace {

using Summary = std::vector<std::pair<std::string, std::string>>;

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ConfigError("cannot write " + (dir / name).string());
  return out;
}

void write_summary(const fs::path& dir, const Summary& summary) {
  auto out = open_out(dir, "summary.csv");
  out << "key,value\n";
  for (const auto& [k, v] : summary) out << k << ',' << v << '\n';
}

void run_solve(const fs::path& config_path, const std::string& criterion, const fs::path& dir) {
  const Config config = load_config(config_path);
  Scenario scenario = config.scenario();
  const bool discounted =
      criterion == "discounted" || (criterion.empty() && scenario.alpha() > 0.0);
  if (criterion == "average" && scenario.alpha() != 0.0) {
    SolverSettings s = scenario.settings();
    s.alpha = 0.0;
    scenario = scenario.with_settings(s);
  }
  const SolveResult result = discounted ? solve_discounted(scenario) : solve_average(scenario);
  {
    auto file = open_out(dir, "policy.csv");
    write_policy_csv(file, result.policy);
  }
  {
    auto file = open_out(dir, "value.csv");
    write_value_csv(file, result.value);
  }
  Summary summary{{"label", config.label},
                  {"criterion", discounted ? "discounted" : "average"},
                  {"alpha", format_number(scenario.alpha())}};
  if (result.gain) summary.emplace_back("gain", format_number(*result.gain));
  summary.emplace_back("residual", format_number(result.residual));
  summary.emplace_back("iterations", std::to_string(result.iterations));
  if (!discounted) {
    summary.emplace_back("stationary_gain", format_number(evaluate_policy(scenario, result.policy)));
  }
  if (result.stability_warning) {
    summary.emplace_back("warning", "unstable: u_max does not exceed the mean arrival rate");
  }
  write_summary(dir, summary);
}

void run_heuristic(const fs::path& config_path, const std::string& method, const fs::path& dir) {
  const Config config = load_config(config_path);
  SolverSettings s = config.solver;
  s.alpha = 0.0;
  const Scenario scenario = config.scenario().with_settings(s);
  Summary summary{{"method", method}};
  if (method == "fixed") {
    const FixedRateResult fixed = fixed_rate_policy(scenario);
    summary.emplace_back("mu_star", format_number(fixed.mu_star));
    summary.emplace_back("gain", format_number(fixed.gain));
    {
      auto file = open_out(dir, "policy.csv");
      write_policy_csv(file, Policy::constant(scenario.truncation(), scenario.phase().size(), fixed.mu_star));
    }
  } else {
    const Policy policy = method == "arm" ? arm_policy(scenario) : prm_policy(scenario);
    summary.emplace_back("gain", format_number(relative_policy_gain(scenario, policy)));
    summary.emplace_back("stationary_gain", format_number(evaluate_policy(scenario, policy)));
    {
      auto file = open_out(dir, "policy.csv");
      write_policy_csv(file, policy);
    }
  }
  write_summary(dir, summary);
}

void run_compare(const fs::path& config_path, const fs::path& dir) {
  const Config config = load_config(config_path);
  SolverSettings s = config.solver;
  s.alpha = 0.0;
  const Scenario scenario = config.scenario().with_settings(s);
  {
    auto file = open_out(dir, "comparison.csv");
    write_comparison_csv(file, {{config.label, "", compare_heuristics(scenario, config.label)}});
  }
}

void run_check(const fs::path& config_path, const std::string& out_dir) {
  const Config config = load_config(config_path);
  const Scenario scenario = config.scenario();
  const StabilityReport stability = stability_check(scenario);
  std::cout << "stability,stable=" << (stability.stable ? "true" : "false")
            << ",mean_rate=" << format_number(stability.mean_rate)
            << ",u_max=" << format_number(stability.u_max) << '\n';
  std::cout << "generator_stochastically_monotone,"
            << (check_generator_monotone(scenario.phase()) ? "true" : "false") << '\n';
  const bool discounted = scenario.alpha() > 0.0;
  if (!discounted && !stability.stable) {
    std::cout << "# average-cost policy not computed: unstable\n";
    return;
  }
  const SolveResult result = discounted ? solve_discounted(scenario) : solve_average(scenario);
  const MonotonicityReport in_n = verify_monotone_in_n(result.policy);
  const MonotonicityReport in_s = verify_monotone_in_s(result.policy);
  std::cout << "# monotone in n (" << (discounted ? "discounted" : "average") << " policy)\n";
  write_monotonicity_csv(std::cout, in_n);
  std::cout << "# monotone in s\n";
  write_monotonicity_csv(std::cout, in_s);
  if (!out_dir.empty()) {
    {
      auto file = open_out(out_dir, "monotone_n.csv");
      write_monotonicity_csv(file, in_n);
    }
    {
      auto file = open_out(out_dir, "monotone_s.csv");
      write_monotonicity_csv(file, in_s);
    }
  }
}

void run_evaluate(const fs::path& config_path, const fs::path& policy_path) {
  const Config config = load_config(config_path);
  SolverSettings s = config.solver;
  s.alpha = 0.0;
  const Scenario scenario = config.scenario().with_settings(s);
  std::ifstream in(policy_path);
  if (!in) throw ConfigError("cannot open policy file " + policy_path.string());
  std::cout << format_number(evaluate_policy(scenario, read_policy_csv(in))) << '\n';
}

void run_nhpp(const std::string& action, const fs::path& config_path, const fs::path& dir) {
  const Config config = load_config(config_path);
  const NhppScenario scenario = config.nhpp_scenario();
  const NhppConfig& nhpp = *config.nhpp;
  Summary summary{{"label", config.label}, {"slots", std::to_string(scenario.slots())},
                  {"nu", format_number(scenario.nu())}};
  std::optional<NhppSolveResult> optimal;
  std::optional<NhppApproximation> approx;
  if (action != "approx") {
    optimal = solve_nhpp_average(scenario);
    {
      auto file = open_out(dir, "nhpp_policy.csv");
      write_nhpp_policy_csv(file, optimal->policy);
    }
    summary.emplace_back("optimal_gain", format_number(optimal->gain));
    summary.emplace_back("residual", format_number(optimal->residual));
    summary.emplace_back("iterations", std::to_string(optimal->iterations));
  }
  if (action != "solve") {
    SolverSettings s = config.solver;
    approx = approximate_nhpp(scenario, nhpp.partitions, nhpp.cut_points, s);
    {
      auto file = open_out(dir, "mmpp_policy.csv");
      write_policy_csv(file, approx->mmpp.policy);
    }
    {
      auto file = open_out(dir, "lifted_policy.csv");
      write_nhpp_policy_csv(file, approx->lifted);
    }
    summary.emplace_back("mmpp_gain", format_number(*approx->mmpp.gain));
    summary.emplace_back("lifted_gain", format_number(approx->lifted_gain));
  }
  if (optimal && approx) {
    summary.emplace_back("lifted_pct",
                         format_number(100.0 * (approx->lifted_gain - optimal->gain) / optimal->gain));
  }
  write_summary(dir, summary);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Service-rate control for MMPP/M/1 and periodic NHPP queues"};
  app.require_subcommand(1);

  std::string config, out_dir, criterion, method, nhpp_action;
  int table = 0;

  auto* solve = app.add_subcommand("solve", "optimal policy, value function and gain");
  solve->add_option("--config", config, "scenario file")->required();
  solve->add_option("--criterion", criterion, "discounted or average (default: by alpha)")
      ->check(CLI::IsMember({"discounted", "average"}));
  solve->add_option("--out", out_dir, "output directory")->required();

  auto* heuristic = app.add_subcommand("heuristic", "ARM, PRM or fixed-rate policy");
  heuristic->add_option("--config", config)->required();
  heuristic->add_option("--method", method)->required()->check(CLI::IsMember({"arm", "prm", "fixed"}));
  heuristic->add_option("--out", out_dir)->required();

  auto* compare = app.add_subcommand("compare", "optimal gain against the three heuristics");
  compare->add_option("--config", config)->required();
  compare->add_option("--out", out_dir)->required();

  auto* check = app.add_subcommand("check", "stability and structural checks");
  check->add_option("--config", config)->required();
  check->add_option("--out", out_dir, "also write monotone_n.csv / monotone_s.csv here");

  std::string policy_file;
  auto* evaluate = app.add_subcommand("evaluate", "stationary gain of a policy CSV");
  evaluate->add_option("--config", config)->required();
  evaluate->add_option("--policy", policy_file, "n,s,mu file as written by solve")->required();

  auto* nhpp = app.add_subcommand("nhpp", "periodic NHPP control and its MMPP approximation");
  nhpp->add_option("action", nhpp_action, "solve, approx or compare")
      ->required()
      ->check(CLI::IsMember({"solve", "approx", "compare"}));
  nhpp->add_option("--config", config)->required();
  nhpp->add_option("--out", out_dir)->required();

  auto* reproduce = app.add_subcommand("reproduce", "regenerate a built-in results table");
  reproduce->add_option("--table", table)->required()->check(CLI::Range(2, 5));
  reproduce->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) run_solve(config, criterion, out_dir);
    if (*heuristic) run_heuristic(config, method, out_dir);
    if (*compare) run_compare(config, out_dir);
    if (*check) run_check(config, out_dir);
    if (*evaluate) run_evaluate(config, policy_file);
    if (*nhpp) run_nhpp(nhpp_action, config, out_dir);
    if (*reproduce) std::cout << reproduce_table(table, out_dir).string() << '\n';
  } catch (const NumericError& e) {
    std::cerr << e.name() << ": " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << e.name() << ": " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "IOError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
