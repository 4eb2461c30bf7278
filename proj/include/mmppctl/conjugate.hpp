#pragma once

#include "mmppctl/model.hpp"

namespace mmppctl {

/**
 * Convex conjugate of the service cost restricted to [0, u_max]:
 *
 *   phi(y) = max_{mu in [0,u_max]} { mu*y - c(mu) },   psi(y) = its argmax.
 *
 * psi is (c')^{-1} clamped to [0, u_max]. The inverse is closed-form for the
 * exponential and quadratic families and found by bisection otherwise.
 * phi is evaluated at the maximizer, psi(y)*y - c(psi(y)), so any constant
 * offset in c is carried through unchanged.
 */
class ConjugatePair {
 public:
  enum class InverseMode { Analytic, Numeric };

  /// Analytic when the cost family supports it, Numeric otherwise.
  explicit ConjugatePair(CostModel cost);
  /// Throws InvalidModel if Analytic is requested for a family without a closed form.
  ConjugatePair(CostModel cost, InverseMode mode);

  double psi(double y) const;
  double phi(double y) const;

  const CostModel& cost() const { return cost_; }
  InverseMode mode() const { return mode_; }
  double c_prime_at_0() const { return c_prime_at_0_; }
  double c_prime_at_umax() const { return c_prime_at_umax_; }

 private:
  double inverse_marginal(double y) const;

  CostModel cost_;
  InverseMode mode_;
  double c_prime_at_0_;
  double c_prime_at_umax_;
};

}  // namespace mmppctl
