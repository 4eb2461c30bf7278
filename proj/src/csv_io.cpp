#include "mmppctl/csv_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "mmppctl/errors.hpp"

namespace mmppctl {

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_policy_csv(std::ostream& out, const Policy& policy) {
  out << "n,s,mu\n";
  for (int n = 0; n <= policy.truncation(); ++n) {
    for (std::size_t s = 0; s < policy.phases(); ++s) {
      out << n << ',' << s + 1 << ',' << format_number(policy(n, s)) << '\n';
    }
  }
}

void write_value_csv(std::ostream& out, const ValueFunction& value) {
  out << "n,s,v\n";
  for (Eigen::Index n = 0; n < value.values.rows(); ++n) {
    for (Eigen::Index s = 0; s < value.values.cols(); ++s) {
      out << n << ',' << s + 1 << ',' << format_number(value.values(n, s)) << '\n';
    }
  }
}

void write_nhpp_policy_csv(std::ostream& out, const NhppPolicy& policy) {
  out << "n,z,mu\n";
  for (int n = 0; n <= policy.truncation(); ++n) {
    for (int z = 0; z < policy.slots(); ++z) {
      out << n << ',' << z << ',' << format_number(policy(n, z)) << '\n';
    }
  }
}

void write_monotonicity_csv(std::ostream& out, const MonotonicityReport& report) {
  out << "n,s,mu_low,mu_high\n";
  for (const auto& v : report.violations) {
    out << v.n << ',' << v.s + 1 << ',' << format_number(v.value_low) << ','
        << format_number(v.value_high) << '\n';
  }
  out << "# monotone=" << (report.monotone ? "true" : "false")
      << " violations=" << report.violations.size() << '\n';
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonCsvRow>& rows) {
  out << "case,c,optimal,arm,arm_pct,prm,prm_pct,fixed,fixed_pct\n";
  for (const auto& r : rows) {
    out << r.case_label << ',' << r.c << ',' << format_number(r.row.optimal_gain);
    for (const char* key : {"arm", "prm", "fixed"}) {
      const auto& h = r.row.heuristic_gains.at(key);
      out << ',' << format_number(h.gain) << ',' << format_number(h.pct_suboptimal);
    }
    out << '\n';
  }
}

Policy read_policy_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,s,mu") {
    throw ConfigError("policy CSV must start with the header n,s,mu");
  }
  struct Entry {
    long n, s;
    double mu;
  };
  std::vector<Entry> entries;
  long n_max = -1, s_max = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Entry e{};
    char c1 = 0, c2 = 0;
    if (!(row >> e.n >> c1 >> e.s >> c2 >> e.mu) || c1 != ',' || c2 != ',' || e.n < 0 || e.s < 1) {
      throw ConfigError("malformed policy CSV row: " + line);
    }
    n_max = std::max(n_max, e.n);
    s_max = std::max(s_max, e.s);
    entries.push_back(e);
  }
  if (n_max < 0 || static_cast<long>(entries.size()) != (n_max + 1) * s_max) {
    throw ConfigError("policy CSV does not cover a full (n, s) grid");
  }
  Eigen::MatrixXd rates = Eigen::MatrixXd::Constant(n_max + 1, s_max, -1.0);
  for (const auto& e : entries) rates(e.n, e.s - 1) = e.mu;
  if ((rates.array() < 0.0).any()) throw ConfigError("policy CSV has missing or negative entries");
  return Policy(std::move(rates));
}

}  // namespace mmppctl
