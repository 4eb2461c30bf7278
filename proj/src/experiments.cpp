#include "mmppctl/experiments.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "mmppctl/errors.hpp"

namespace mmppctl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFluctuations[] = {0.25, 0.5, 0.75, 1.0};
const char* const kCaseNames[] = {"I", "II", "III"};

}  // namespace

std::vector<double> test_case_rates(int case_number) {
  if (case_number < 1 || case_number > 3) throw ConfigError("test case must be 1, 2 or 3");
  const double step = 0.25 * case_number;
  std::vector<double> rates(8);
  for (int i = 0; i < 8; ++i) rates[static_cast<std::size_t>(i)] = 0.1 + step * i;
  return rates;
}

Eigen::MatrixXd birth_death_generator(std::size_t phases, double c) {
  const auto l = static_cast<Eigen::Index>(phases);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(l, l);
  for (Eigen::Index i = 0; i + 1 < l; ++i) {
    q(i, i + 1) = c;
    q(i + 1, i) = c;
  }
  q.diagonal() = -q.rowwise().sum();
  return q;
}

Eigen::MatrixXd cyclic_generator(std::size_t phases, double c) {
  const auto l = static_cast<Eigen::Index>(phases);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(l, l);
  for (Eigen::Index i = 0; i < l; ++i) q(i, (i + 1) % l) = c;
  if (l > 1) q.diagonal() = -q.rowwise().sum();
  else q.setZero();
  return q;
}

Scenario comparison_scenario(int table, int case_number, double c) {
  if (table != 2 && table != 3) throw ConfigError("comparison tables are 2 and 3");
  Eigen::MatrixXd q = table == 2 ? birth_death_generator(8, c) : cyclic_generator(8, c);
  return Scenario(PhaseProcess(std::move(q), test_case_rates(case_number)),
                  CostModel(ExponentialCost{}, LinearHolding{}, 15.0));
}

namespace {

Scenario three_phase(Eigen::MatrixXd q, double alpha) {
  SolverSettings settings;
  settings.alpha = alpha;
  return Scenario(PhaseProcess(std::move(q), {0.5, 1.0, 1.25}),
                  CostModel(ExponentialCost{}, LinearHolding{}, 5.0), settings);
}

}  // namespace

Scenario example31_scenario(double alpha) { return three_phase(birth_death_generator(3, 1.0), alpha); }

Scenario example32_scenario(double alpha) { return three_phase(cyclic_generator(3, 1.0), alpha); }

NhppScenario example43_scenario(double period) {
  std::vector<double> breakpoints(6);
  for (int i = 0; i <= 5; ++i) breakpoints[static_cast<std::size_t>(i)] = period * i / 5.0;
  breakpoints.back() = period;
  NhppSettings settings;
  settings.delta_t = 0.05;
  return NhppScenario(RateFunction(PiecewiseConstantRate{breakpoints, {0.1, 2.0, 4.0, 2.0, 0.1}}, period),
                      CostModel(ExponentialCost{}, LinearHolding{}, 10.0), settings);
}

NhppScenario example44_scenario(double period, double service_offset) {
  NhppSettings settings;
  settings.delta_t = period / 200.0;
  return NhppScenario(RateFunction(SinusoidRate{5.0, 6.0}, period),
                      CostModel(QuadraticCost{service_offset}, ShiftedLinearHolding{20}, 15.0),
                      settings);
}

std::vector<ComparisonCsvRow> reproduce_comparison_table(int table) {
  std::vector<ComparisonCsvRow> rows;
  for (int k = 1; k <= 3; ++k) {
    for (double c : kFluctuations) {
      const std::string label = std::string("Case ") + kCaseNames[k - 1];
      rows.push_back({kCaseNames[k - 1], format_number(c),
                      compare_heuristics(comparison_scenario(table, k, c), label)});
    }
  }
  return rows;
}

std::vector<NhppTableRow> reproduce_nhpp_table(int table) {
  std::vector<NhppTableRow> rows;
  auto add = [&](std::string label, double period, const NhppScenario& sc, int partitions) {
    const double optimal = solve_nhpp_average(sc).gain;
    const double lifted = approximate_nhpp(sc, partitions).lifted_gain;
    rows.push_back({std::move(label), period, optimal, lifted, 100.0 * (lifted - optimal) / optimal});
  };
  if (table == 4) {
    for (int period : {4, 5, 6, 7}) {
      add(std::to_string(period), period, example43_scenario(period), 5);
    }
  } else if (table == 5) {
    const char* labels[] = {"pi/2", "pi", "3pi/2", "2pi"};
    for (int k = 1; k <= 4; ++k) {
      const double period = k * kPi / 2.0;
      add(labels[k - 1], period, example44_scenario(period), 6);
    }
  } else {
    throw ConfigError("NHPP tables are 4 and 5");
  }
  return rows;
}

void write_nhpp_table_csv(std::ostream& out, const std::vector<NhppTableRow>& rows) {
  out << "T,period,optimal,approx,approx_pct\n";
  for (const auto& r : rows) {
    out << r.period_label << ',' << format_number(r.period) << ',' << format_number(r.optimal) << ','
        << format_number(r.lifted) << ',' << format_number(r.pct_suboptimal) << '\n';
  }
}

std::filesystem::path reproduce_table(int table, const std::filesystem::path& out_dir) {
  if (table < 2 || table > 5) throw ConfigError("--table must be 2, 3, 4 or 5");
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / ("table" + std::to_string(table) + ".csv");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  if (table <= 3) {
    write_comparison_csv(out, reproduce_comparison_table(table));
  } else {
    write_nhpp_table_csv(out, reproduce_nhpp_table(table));
  }
  return path;
}

}  // namespace mmppctl
