#include "mmppctl/structure_checks.hpp"

namespace mmppctl {

namespace {

constexpr double kGeneratorSlack = 1e-12;
constexpr double kPolicySlack = 1e-9;

}  // namespace

bool check_generator_monotone(const Eigen::MatrixXd& generator) {
  const auto n = generator.rows();
  // (Q T)_{ij} = sum_{k >= j} Q_{ik}; T^{-1} subtracts the previous row.
  Eigen::MatrixXd tail(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      acc += generator(i, j);
      tail(i, j) = acc;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double m = i == 0 ? tail(0, j) : tail(i, j) - tail(i - 1, j);
      if (m < -kGeneratorSlack) return false;
    }
  }
  return true;
}

bool check_generator_monotone(const PhaseProcess& phase) {
  return check_generator_monotone(phase.generator());
}

MonotonicityReport verify_monotone_in_n(const Policy& policy) {
  MonotonicityReport report;
  const auto& mu = policy.rates();
  for (Eigen::Index n = 0; n + 1 < mu.rows(); ++n) {
    for (Eigen::Index s = 0; s < mu.cols(); ++s) {
      if (mu(n + 1, s) < mu(n, s) - kPolicySlack) {
        report.violations.push_back(
            {static_cast<int>(n), static_cast<std::size_t>(s), mu(n, s), mu(n + 1, s)});
      }
    }
  }
  report.monotone = report.violations.empty();
  return report;
}

MonotonicityReport verify_monotone_in_s(const Policy& policy) {
  MonotonicityReport report;
  const auto& mu = policy.rates();
  for (Eigen::Index n = 0; n < mu.rows(); ++n) {
    for (Eigen::Index s = 0; s + 1 < mu.cols(); ++s) {
      if (mu(n, s + 1) < mu(n, s) - kPolicySlack) {
        report.violations.push_back(
            {static_cast<int>(n), static_cast<std::size_t>(s), mu(n, s), mu(n, s + 1)});
      }
    }
  }
  report.monotone = report.violations.empty();
  return report;
}

}  // namespace mmppctl
