#include "mmppctl/nhpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmppctl/conjugate.hpp"
#include "mmppctl/errors.hpp"

namespace mmppctl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSnap = 1e-9;

double wrap(double t, double period) {
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  if (period - r <= kSnap * period) r = 0.0;
  return r;
}

// Index i with breakpoints[i] <= t < breakpoints[i+1], snapping t onto a
// breakpoint when it lies within kSnap * scale of it.
std::size_t interval_of(const std::vector<double>& breakpoints, double t, double scale) {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t + kSnap * scale);
  auto i = static_cast<std::size_t>(std::distance(breakpoints.begin(), it));
  i = std::max<std::size_t>(i, 1) - 1;
  return std::min(i, breakpoints.size() - 2);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

RateFunction::RateFunction(RateFamily family, double period)
    : family_(std::move(family)), period_(period) {
  if (!(period_ > 0.0) || !std::isfinite(period_)) {
    throw InvalidModel("rate function period must be positive");
  }
  if (const auto* pc = std::get_if<PiecewiseConstantRate>(&family_)) {
    const auto& b = pc->breakpoints;
    if (b.size() < 2 || pc->rates.size() != b.size() - 1) {
      throw InvalidModel("piecewise-constant rate needs k+1 breakpoints for k levels");
    }
    if (std::abs(b.front()) > kSnap * period_ || std::abs(b.back() - period_) > kSnap * period_) {
      throw InvalidModel("piecewise-constant breakpoints must run from 0 to the period");
    }
    for (std::size_t i = 1; i < b.size(); ++i) {
      if (!(b[i] > b[i - 1])) throw InvalidModel("breakpoints must be strictly increasing");
    }
    for (double r : pc->rates) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidModel("rates must be non-negative");
    }
  } else {
    const auto& s = std::get<SinusoidRate>(family_);
    if (!(s.amplitude >= 0.0) || !(s.offset >= s.amplitude) || !std::isfinite(s.offset)) {
      throw InvalidModel("sinusoid rate needs offset >= amplitude >= 0");
    }
  }
}

double RateFunction::rate(double t) const {
  const double u = wrap(t, period_);
  return std::visit(overloaded{
                        [&](const PiecewiseConstantRate& pc) {
                          return pc.rates[interval_of(pc.breakpoints, u, period_)];
                        },
                        [&](const SinusoidRate& s) {
                          return s.amplitude * std::sin(2.0 * kPi * u / period_) + s.offset;
                        },
                    },
                    family_);
}

double RateFunction::integral(double a, double b) const {
  if (!(a <= b)) throw InvalidModel("integral bounds must satisfy a <= b");
  return std::visit(overloaded{
                        [&](const PiecewiseConstantRate& pc) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i + 1 < pc.breakpoints.size(); ++i) {
                            const double lo = std::max(a, pc.breakpoints[i]);
                            const double hi = std::min(b, pc.breakpoints[i + 1]);
                            if (hi > lo) acc += pc.rates[i] * (hi - lo);
                          }
                          return acc;
                        },
                        [&](const SinusoidRate& s) {
                          const double w = 2.0 * kPi / period_;
                          return s.offset * (b - a) +
                                 s.amplitude * (std::cos(w * a) - std::cos(w * b)) / w;
                        },
                    },
                    family_);
}

double RateFunction::max_rate() const {
  return std::visit(overloaded{
                        [](const PiecewiseConstantRate& pc) {
                          return *std::max_element(pc.rates.begin(), pc.rates.end());
                        },
                        [](const SinusoidRate& s) { return s.amplitude + s.offset; },
                    },
                    family_);
}

double RateFunction::mean_rate() const { return integral(0.0, period_) / period_; }

// ---------------------------------------------------------------------------

NhppScenario::NhppScenario(RateFunction rate, CostModel cost, NhppSettings settings)
    : rate_(std::move(rate)), cost_(std::move(cost)), settings_(settings) {
  if (settings_.truncation < 2) throw InvalidModel("truncation_N must be at least 2");
  if (!(settings_.delta_t > 0.0)) throw InvalidModel("delta_t must be positive");
  if (!(settings_.tolerance > 0.0)) throw InvalidModel("tolerance must be positive");
  if (!(settings_.damping > 0.0 && settings_.damping <= 1.0)) {
    throw InvalidModel("damping must lie in (0, 1]");
  }
  if (settings_.max_iterations < 1) throw InvalidModel("max_iterations must be positive");
  const double ratio = rate_.period() / settings_.delta_t;
  slots_ = static_cast<int>(std::lround(ratio));
  if (slots_ < 1 || std::abs(ratio - slots_) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "period / delta_t = " << ratio << " is not an integer number of slots";
    throw InvalidModel(msg.str());
  }
  nu_ = rate_.max_rate() + cost_.u_max();
  if (!(nu_ * settings_.delta_t < 5.0)) {
    throw InvalidModel("nu * delta_t must be below 5");
  }
  cost_.validate_holding(settings_.truncation + 1);
  slot_rates_.resize(static_cast<std::size_t>(slots_));
  for (int z = 0; z < slots_; ++z) slot_rates_[static_cast<std::size_t>(z)] = rate_.rate(slot_time(z));
}

NhppPolicy::NhppPolicy(Eigen::MatrixXd rates) : rates_(std::move(rates)) {
  if (rates_.rows() < 1 || rates_.cols() < 1) throw InvalidModel("policy table is empty");
  if (!rates_.allFinite() || (rates_.array() < 0.0).any()) {
    throw InvalidModel("policy rates must be finite and non-negative");
  }
  if ((rates_.row(0).array() != 0.0).any()) {
    throw InvalidModel("policy must idle (rate 0) when the queue is empty");
  }
}

SlotTransition slot_transition(const NhppScenario& scenario, int n, int z, double x) {
  const double nu = scenario.nu();
  const double event = -std::expm1(-nu * scenario.delta_t());
  const double lambda = scenario.slot_rate(z) / nu;
  const double service = n > 0 ? x / nu : 0.0;
  return {event * lambda, event * service, event * (1.0 - lambda - service),
          std::exp(-nu * scenario.delta_t())};
}

// ---------------------------------------------------------------------------

namespace {

struct DampedOutcome {
  Eigen::MatrixXd values;
  Eigen::MatrixXd rates;
  double gain;
  double residual;
  long iterations;
};

// Damped relative value iteration over (n, z). `choose(n, z, y_eff)` returns
// the service rate used in state (n, z).
template <class Choose>
DampedOutcome damped_iteration(const NhppScenario& sc, Choose choose) {
  const int n_max = sc.truncation();
  const int slots = sc.slots();
  const double dt = sc.delta_t();
  const double nu = sc.nu();
  const double tau = sc.settings().damping;
  const double event = -std::expm1(-nu * dt);
  const double none = std::exp(-nu * dt);
  const double y_scale = event / (nu * dt);
  const bool extrapolate = sc.settings().boundary == Boundary::Extrapolate;
  const CostModel& cost = sc.cost();

  std::vector<double> holding(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) holding[static_cast<std::size_t>(n)] = cost.holding_cost(n);

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n_max + 1, slots);
  Eigen::MatrixXd next(n_max + 1, slots);
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n_max + 1, slots);

  for (long k = 1; k <= sc.settings().max_iterations; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int z = 0; z < slots; ++z) {
      const auto ahead = v.col((z + 1) % slots);
      const double lambda = sc.slot_rate(z) / nu;
      for (int n = 0; n <= n_max; ++n) {
        const double here = ahead(n);
        double up = n < n_max ? ahead(n + 1) : here;
        if (n == n_max && extrapolate) up = 2.0 * here - ahead(n - 1);
        double stage = holding[static_cast<std::size_t>(n)];
        double expected = lambda * up + (1.0 - lambda) * here;
        double x = 0.0;
        if (n > 0) {
          x = choose(n, z, y_scale * (here - ahead(n - 1)));
          stage += cost.service_cost(x);
          expected += x / nu * (ahead(n - 1) - here);
        }
        rates(n, z) = x;
        const double target = stage * dt + event * expected + none * here;
        const double diff = target - v(n, z);
        next(n, z) = v(n, z) + tau * diff;
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
      }
    }
    next.array() -= next(0, 0);
    v.swap(next);
    if (hi - lo < sc.settings().tolerance * dt) {
      return {std::move(v), std::move(rates), 0.5 * (lo + hi) / dt, (hi - lo) / dt, k};
    }
  }
  std::ostringstream msg;
  msg << "NHPP relative value iteration did not converge in " << sc.settings().max_iterations
      << " iterations";
  throw NonConvergence(msg.str());
}

}  // namespace

NhppSolveResult solve_nhpp_average(const NhppScenario& scenario) {
  const double mean = scenario.rate().mean_rate();
  if (!(mean < scenario.cost().u_max())) {
    std::ostringstream msg;
    msg << "time-averaged rate " << mean << " is not below u_max = " << scenario.cost().u_max();
    throw Unstable(msg.str());
  }
  const ConjugatePair conjugate(scenario.cost());
  DampedOutcome out =
      damped_iteration(scenario, [&](int, int, double y) { return conjugate.psi(y); });
  return {NhppPolicy(std::move(out.rates)), std::move(out.values), out.gain, out.residual,
          out.iterations};
}

double evaluate_nhpp_policy(const NhppScenario& scenario, const NhppPolicy& policy) {
  if (policy.truncation() != scenario.truncation() || policy.slots() != scenario.slots()) {
    throw InvalidModel("policy shape does not match the NHPP scenario");
  }
  const double mean = scenario.rate().mean_rate();
  const double drain = policy.rates().row(policy.truncation()).mean();
  if (!(drain > mean)) {
    std::ostringstream msg;
    msg << "policy drains at time-averaged rate " << drain << " at the cap, not above the mean arrival rate "
        << mean;
    throw Unstable(msg.str());
  }
  return damped_iteration(scenario, [&](int n, int z, double) { return policy(n, z); }).gain;
}

// ---------------------------------------------------------------------------

std::vector<double> equal_cut_points(double period, int partitions) {
  if (partitions < 1) throw DegeneratePartition("partitions must be positive");
  std::vector<double> cuts(static_cast<std::size_t>(partitions) + 1);
  for (int i = 0; i <= partitions; ++i) cuts[static_cast<std::size_t>(i)] = period * i / partitions;
  cuts.back() = period;
  return cuts;
}

namespace {

std::vector<double> checked_cuts(double period, int partitions,
                                 const std::optional<std::vector<double>>& cut_points) {
  std::vector<double> cuts = cut_points ? *cut_points : equal_cut_points(period, partitions);
  if (partitions < 1 || cuts.size() != static_cast<std::size_t>(partitions) + 1) {
    std::ostringstream msg;
    msg << "expected " << partitions + 1 << " cut points for " << partitions << " partitions";
    throw DegeneratePartition(msg.str());
  }
  if (std::abs(cuts.front()) > kSnap * period || std::abs(cuts.back() - period) > kSnap * period) {
    throw DegeneratePartition("cut points must start at 0 and end at the period");
  }
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (!(cuts[i] - cuts[i - 1] > 0.0)) {
      std::ostringstream msg;
      msg << "partition " << i << " has non-positive width";
      throw DegeneratePartition(msg.str());
    }
  }
  return cuts;
}

}  // namespace

PhaseProcess build_mmpp_approximation(const RateFunction& rate, int partitions,
                                      const std::optional<std::vector<double>>& cut_points) {
  const std::vector<double> cuts = checked_cuts(rate.period(), partitions, cut_points);
  const auto l = static_cast<Eigen::Index>(partitions);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(l, l);
  std::vector<double> rates(static_cast<std::size_t>(partitions));
  for (Eigen::Index s = 0; s < l; ++s) {
    const double a = cuts[static_cast<std::size_t>(s)];
    const double b = cuts[static_cast<std::size_t>(s) + 1];
    rates[static_cast<std::size_t>(s)] = rate.integral(a, b) / (b - a);
    if (l > 1) {
      q(s, (s + 1) % l) = 1.0 / (b - a);
      q(s, s) = -1.0 / (b - a);
    }
  }
  return PhaseProcess(std::move(q), std::move(rates), PhaseProcess::Ordering::Preserve);
}

NhppPolicy lift_policy(const Policy& mmpp_policy, const std::vector<double>& cut_points,
                       const NhppScenario& scenario) {
  if (cut_points.size() != mmpp_policy.phases() + 1) {
    throw InvalidModel("cut points do not match the number of policy phases");
  }
  if (mmpp_policy.truncation() != scenario.truncation()) {
    throw InvalidModel("MMPP policy truncation differs from the NHPP truncation");
  }
  Eigen::MatrixXd rates(scenario.truncation() + 1, scenario.slots());
  for (int z = 0; z < scenario.slots(); ++z) {
    const std::size_t s = interval_of(cut_points, scenario.slot_time(z), scenario.rate().period());
    rates.col(z) = mmpp_policy.rates().col(static_cast<Eigen::Index>(s));
  }
  return NhppPolicy(std::move(rates));
}

NhppApproximation approximate_nhpp(const NhppScenario& scenario, int partitions,
                                   const std::optional<std::vector<double>>& cut_points,
                                   SolverSettings mmpp_settings) {
  std::vector<double> cuts = checked_cuts(scenario.rate().period(), partitions, cut_points);
  PhaseProcess phase = build_mmpp_approximation(scenario.rate(), partitions, cuts);
  mmpp_settings.truncation = scenario.truncation();
  mmpp_settings.alpha = 0.0;
  SolveResult mmpp = solve_average(Scenario(phase, scenario.cost(), mmpp_settings));
  NhppPolicy lifted = lift_policy(mmpp.policy, cuts, scenario);
  const double gain = evaluate_nhpp_policy(scenario, lifted);
  return {std::move(cuts), std::move(phase), std::move(mmpp), std::move(lifted), gain};
}

}  // namespace mmppctl
