#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmppctl/csv_io.hpp"
#include "mmppctl/model.hpp"
#include "mmppctl/nhpp.hpp"

namespace mmppctl {

/// Arrival rates of the 8-phase test cases 1..3 (I, II, III).
std::vector<double> test_case_rates(int case_number);
Eigen::MatrixXd birth_death_generator(std::size_t phases, double c);
Eigen::MatrixXd cyclic_generator(std::size_t phases, double c);

/// Table 2 (birth-death phases) or Table 3 (cyclic phases) scenario:
/// c(mu) = e^mu - 1, h(n) = n, u_max = 15, N = 50.
Scenario comparison_scenario(int table, int case_number, double c);

/// Three-phase examples with rates (0.5, 1, 1.25), c(mu) = e^mu - 1, h(n) = n,
/// u_max = 5: birth-death (3.1) and cyclic (3.2) generators.
Scenario example31_scenario(double alpha = 0.0);
Scenario example32_scenario(double alpha = 0.0);

/// Five-level step rate (0.1, 2, 4, 2, 0.1), c(mu) = e^mu - 1, h(n) = n,
/// u_max = 10, delta_t = 0.05.
NhppScenario example43_scenario(double period);
/// lambda(t) = 5 sin(2 pi t / T) + 6, c(mu) = mu^2/2 + service_offset,
/// h(n) = (n - 20)^+, u_max = 15, delta_t = T / 200.
NhppScenario example44_scenario(double period, double service_offset = 0.0);

struct NhppTableRow {
  std::string period_label;
  double period;
  double optimal;
  double lifted;
  double pct_suboptimal;
};

std::vector<ComparisonCsvRow> reproduce_comparison_table(int table);
std::vector<NhppTableRow> reproduce_nhpp_table(int table);

void write_nhpp_table_csv(std::ostream& out, const std::vector<NhppTableRow>& rows);

/// Writes table<k>.csv into `out_dir` and returns its path. Throws ConfigError
/// for tables other than 2..5.
std::filesystem::path reproduce_table(int table, const std::filesystem::path& out_dir);

}  // namespace mmppctl
