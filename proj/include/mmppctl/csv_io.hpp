#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmppctl/heuristics.hpp"
#include "mmppctl/mdp_solver.hpp"
#include "mmppctl/nhpp.hpp"
#include "mmppctl/structure_checks.hpp"

namespace mmppctl {

/// Numbers in every CSV are written with 12 significant digits. Phase and
/// slot indices in `s` columns are 1-based; `n` and `z` are 0-based.
std::string format_number(double x);

void write_policy_csv(std::ostream& out, const Policy& policy);
void write_value_csv(std::ostream& out, const ValueFunction& value);
void write_nhpp_policy_csv(std::ostream& out, const NhppPolicy& policy);
void write_monotonicity_csv(std::ostream& out, const MonotonicityReport& report);

struct ComparisonCsvRow {
  std::string case_label;
  std::string c;  // fluctuation parameter, empty when not applicable
  ComparisonRow row;
};

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonCsvRow>& rows);

/// Reads a `n,s,mu` file back into a policy. Throws ConfigError on malformed input.
Policy read_policy_csv(std::istream& in);

}  // namespace mmppctl
