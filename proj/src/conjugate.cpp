#include "mmppctl/conjugate.hpp"

#include <cmath>
#include <variant>

#include "mmppctl/errors.hpp"

namespace mmppctl {

namespace {

bool has_closed_form(const ServiceCost& c) {
  return std::holds_alternative<ExponentialCost>(c) || std::holds_alternative<QuadraticCost>(c);
}

constexpr double kBisectionTolerance = 1e-12;

}  // namespace

ConjugatePair::ConjugatePair(CostModel cost)
    : ConjugatePair(cost, has_closed_form(cost.service()) ? InverseMode::Analytic
                                                          : InverseMode::Numeric) {}

ConjugatePair::ConjugatePair(CostModel cost, InverseMode mode)
    : cost_(std::move(cost)),
      mode_(mode),
      c_prime_at_0_(cost_.marginal_service_cost(0.0)),
      c_prime_at_umax_(cost_.marginal_service_cost(cost_.u_max())) {
  if (mode_ == InverseMode::Analytic && !has_closed_form(cost_.service())) {
    throw InvalidModel("no closed-form inverse marginal cost for this service-cost family");
  }
}

double ConjugatePair::psi(double y) const {
  if (y <= c_prime_at_0_) return 0.0;
  if (y >= c_prime_at_umax_) return cost_.u_max();
  return inverse_marginal(y);
}

double ConjugatePair::phi(double y) const {
  const double mu = psi(y);
  return mu * y - cost_.service_cost(mu);
}

double ConjugatePair::inverse_marginal(double y) const {
  if (mode_ == InverseMode::Analytic) {
    if (std::holds_alternative<ExponentialCost>(cost_.service())) {
      return std::log(y);
    }
    return y;  // quadratic: c'(mu) = mu
  }
  double lo = 0.0;
  double hi = cost_.u_max();
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cost_.marginal_service_cost(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mmppctl
