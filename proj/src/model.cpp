#include "mmppctl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "mmppctl/errors.hpp"

namespace mmppctl {

namespace {

constexpr double kRowSumTolerance = 1e-12;

void validate_generator(const Eigen::MatrixXd& q, std::size_t size) {
  if (size == 0) {
    throw InvalidModel("phase process needs at least one phase");
  }
  if (static_cast<std::size_t>(q.rows()) != size ||
      static_cast<std::size_t>(q.cols()) != size) {
    std::ostringstream msg;
    msg << "generator must be " << size << "x" << size << ", got " << q.rows()
        << "x" << q.cols();
    throw InvalidModel(msg.str());
  }
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double scale = 1.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (!std::isfinite(q(i, j))) {
        throw InvalidModel("generator has a non-finite entry");
      }
      scale = std::max(scale, std::abs(q(i, j)));
      if (i != j && q(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "generator off-diagonal entry (" << i + 1 << "," << j + 1
            << ") is negative";
        throw InvalidModel(msg.str());
      }
    }
    if (q(i, i) > 0.0) {
      throw InvalidModel("generator diagonal entry is positive");
    }
    if (std::abs(q.row(i).sum()) > kRowSumTolerance * scale) {
      std::ostringstream msg;
      msg << "generator row " << i + 1 << " sums to " << q.row(i).sum()
          << ", expected 0";
      throw InvalidModel(msg.str());
    }
  }
}

// Every phase must reach every other along positive off-diagonal rates.
bool irreducible(const Eigen::MatrixXd& q) {
  const auto n = q.rows();
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double rate = transpose ? q(j, i) : q(i, j);
        if (j != i && rate > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reaches_all(false) && reaches_all(true);
}

}  // namespace

PhaseProcess::PhaseProcess(Eigen::MatrixXd generator, std::vector<double> rates,
                           Ordering ordering) {
  validate_generator(generator, rates.size());
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw InvalidModel("arrival rates must be finite and non-negative");
    }
  }
  if (!irreducible(generator)) {
    throw InvalidModel("phase process is not irreducible");
  }

  const std::size_t n = rates.size();
  permutation_.resize(n);
  std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
  if (ordering == Ordering::SortByRate) {
    std::stable_sort(permutation_.begin(), permutation_.end(),
                     [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });
  }
  generator_.resize(n, n);
  rates_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rates_[i] = rates[permutation_[i]];
    for (std::size_t j = 0; j < n; ++j) {
      generator_(i, j) = generator(permutation_[i], permutation_[j]);
    }
  }
  rate_sorted_ = std::is_sorted(rates_.begin(), rates_.end());
}

double PhaseProcess::max_rate() const {
  return *std::max_element(rates_.begin(), rates_.end());
}

// ---------------------------------------------------------------------------

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

CostModel::CostModel(ServiceCost service, HoldingCost holding, double u_max)
    : service_(std::move(service)), holding_(std::move(holding)), u_max_(u_max) {
  if (!(u_max_ > 0.0) || !std::isfinite(u_max_)) {
    throw InvalidModel("u_max must be a positive finite rate");
  }
  if (const auto* ps = std::get_if<PowerSeriesCost>(&service_)) {
    if (ps->coefficients.empty()) {
      throw InvalidModel("power-series cost needs at least one coefficient");
    }
    for (double a : ps->coefficients) {
      if (!(a >= 0.0) || !std::isfinite(a)) {
        throw InvalidModel("power-series cost coefficients must be non-negative");
      }
    }
  }
  if (const auto* sl = std::get_if<ShiftedLinearHolding>(&holding_); sl && sl->shift < 0) {
    throw InvalidModel("shifted-linear holding cost needs a non-negative shift");
  }
  if (const auto* p = std::get_if<PowerHolding>(&holding_);
      p && (p->scale < 0.0 || p->power < 1)) {
    throw InvalidModel("power holding cost needs scale >= 0 and power >= 1");
  }

  // c' must be >= 0 at 0, positive on (0, u_max] and strictly increasing.
  constexpr int kGrid = 256;
  double previous = marginal_service_cost(0.0);
  if (previous < 0.0) {
    throw InvalidModel("service cost must be non-decreasing at 0");
  }
  for (int k = 1; k <= kGrid; ++k) {
    const double slope = marginal_service_cost(u_max_ * k / kGrid);
    if (!(slope > previous) || !std::isfinite(slope)) {
      throw InvalidModel("service cost must be strictly convex and increasing on [0, u_max]");
    }
    previous = slope;
  }
}

double CostModel::service_cost(double mu) const {
  return std::visit(
      overloaded{
          [&](const ExponentialCost&) { return std::expm1(mu); },
          [&](const QuadraticCost& q) { return 0.5 * mu * mu + q.offset; },
          [&](const PowerSeriesCost& p) {
            double acc = 0.0;
            for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) {
              acc = acc * mu + *it;
            }
            return acc;
          },
      },
      service_);
}

double CostModel::marginal_service_cost(double mu) const {
  return std::visit(
      overloaded{
          [&](const ExponentialCost&) { return std::exp(mu); },
          [&](const QuadraticCost&) { return mu; },
          [&](const PowerSeriesCost& p) {
            double acc = 0.0;
            for (std::size_t k = p.coefficients.size(); k-- > 1;) {
              acc = acc * mu + static_cast<double>(k) * p.coefficients[k];
            }
            return acc;
          },
      },
      service_);
}

double CostModel::holding_cost(int n) const {
  return std::visit(
      overloaded{
          [&](const LinearHolding&) { return static_cast<double>(n); },
          [&](const ShiftedLinearHolding& s) {
            return static_cast<double>(std::max(0, n - s.shift));
          },
          [&](const PowerHolding& p) {
            return p.scale * std::pow(static_cast<double>(n), p.power);
          },
      },
      holding_);
}

void CostModel::validate_holding(int n_max) const {
  if (holding_cost(0) != 0.0) {
    throw InvalidModel("holding cost must vanish at n = 0");
  }
  for (int n = 1; n <= n_max; ++n) {
    const double step = holding_cost(n) - holding_cost(n - 1);
    if (step < 0.0) {
      throw InvalidModel("holding cost must be non-decreasing");
    }
    if (n >= 2) {
      const double prev = holding_cost(n - 1) - holding_cost(n - 2);
      if (step < prev - 1e-12 * (1.0 + std::abs(prev))) {
        throw InvalidModel("holding cost must be convex");
      }
    }
  }
}

// ---------------------------------------------------------------------------

Scenario::Scenario(PhaseProcess phase, CostModel cost, SolverSettings settings)
    : phase_(std::move(phase)), cost_(std::move(cost)), settings_(settings) {
  if (settings_.truncation < 2) {
    throw InvalidModel("truncation_N must be at least 2");
  }
  if (!(settings_.tolerance > 0.0)) {
    throw InvalidModel("tolerance must be positive");
  }
  if (!(settings_.alpha >= 0.0) || !std::isfinite(settings_.alpha)) {
    throw InvalidModel("alpha must be finite and non-negative");
  }
  if (!(settings_.uniformization_slack >= 0.0)) {
    throw InvalidModel("uniformization_slack must be non-negative");
  }
  if (settings_.max_iterations < 1) {
    throw InvalidModel("max_iterations must be positive");
  }
  cost_.validate_holding(settings_.truncation + 1);
}

Scenario Scenario::with_phase(PhaseProcess phase) const {
  return Scenario(std::move(phase), cost_, settings_);
}

Scenario Scenario::with_settings(SolverSettings settings) const {
  return Scenario(phase_, cost_, settings);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd stationary_distribution(const PhaseProcess& phase) {
  const auto n = static_cast<Eigen::Index>(phase.size());
  // Transposed balance equations with the last one replaced by sum p = 1.
  Eigen::MatrixXd a = phase.generator().transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw SingularSystem("stationary distribution: balance equations are singular");
  }
  Eigen::VectorXd p = lu.solve(b);
  const double residual = (p.transpose() * phase.generator()).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10) || (p.array() <= 0.0).any()) {
    throw SingularSystem("stationary distribution: solve did not yield a positive solution");
  }
  return p / p.sum();
}

double mean_arrival_rate(const PhaseProcess& phase) {
  const Eigen::VectorXd p = stationary_distribution(phase);
  double mean = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    mean += p(s) * phase.rates()[static_cast<std::size_t>(s)];
  }
  return mean;
}

StabilityReport stability_check(const Scenario& scenario) {
  const double mean = mean_arrival_rate(scenario.phase());
  const double u_max = scenario.cost().u_max();
  return {u_max > mean, mean, u_max};
}

UniformizedModel uniformize(const Scenario& scenario) {
  const auto& q = scenario.phase().generator();
  const double eta_bar = (-q.diagonal()).maxCoeff();
  const double slack = scenario.settings().uniformization_slack;
  const double nu = scenario.phase().max_rate() + eta_bar + scenario.cost().u_max() + slack;
  Eigen::MatrixXd q_bar = q;
  q_bar.diagonal().array() += eta_bar;
  return {eta_bar, slack, nu, std::move(q_bar)};
}

}  // namespace mmppctl
