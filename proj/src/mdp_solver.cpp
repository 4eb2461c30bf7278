#include "mmppctl/mdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mmppctl/conjugate.hpp"
#include "mmppctl/errors.hpp"

namespace mmppctl {

Policy::Policy(Eigen::MatrixXd rates) : rates_(std::move(rates)) {
  if (rates_.rows() < 1 || rates_.cols() < 1) {
    throw InvalidModel("policy table is empty");
  }
  if (!rates_.allFinite() || (rates_.array() < 0.0).any()) {
    throw InvalidModel("policy rates must be finite and non-negative");
  }
  if ((rates_.row(0).array() != 0.0).any()) {
    throw InvalidModel("policy must idle (rate 0) when the queue is empty");
  }
}

Policy Policy::constant(int truncation, std::size_t phases, double mu) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(truncation + 1, static_cast<Eigen::Index>(phases), mu);
  r.row(0).setZero();
  return Policy(std::move(r));
}

Eigen::MatrixXd first_difference(const Eigen::MatrixXd& values) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(values.rows(), values.cols());
  if (values.rows() > 1) {
    y.bottomRows(values.rows() - 1) =
        values.bottomRows(values.rows() - 1) - values.topRows(values.rows() - 1);
  }
  return y;
}

Eigen::MatrixXd first_difference(const ValueFunction& value) {
  return first_difference(value.values);
}

namespace {

// Uniformized transition structure shared by every sweep.
//
// One sweep evaluates, for every (n,s),
//   [h(n) + control(n,s) + lambda_s v(n+1,s) + sum_s' Qbar(s,s') v(n,s')
//    + (nu - eta_bar - lambda_s) v(n,s)] / (alpha + nu)
// where control(n,s) = min_mu { c(mu) - mu*y(n,s) } (or its value under a
// fixed rate) and v(N+1,s) follows the boundary rule.
class Lattice {
 public:
  explicit Lattice(const Scenario& scenario)
      : scenario_(scenario),
        model_(uniformize(scenario)),
        conjugate_(scenario.cost()),
        n_max_(scenario.truncation()),
        phases_(static_cast<Eigen::Index>(scenario.phase().size())),
        qbar_t_(model_.q_bar.transpose()),
        holding_(n_max_ + 1) {
    for (int n = 0; n <= n_max_; ++n) holding_[n] = scenario.cost().holding_cost(n);
  }

  const UniformizedModel& model() const { return model_; }
  const ConjugatePair& conjugate() const { return conjugate_; }
  int n_max() const { return n_max_; }
  Eigen::Index phases() const { return phases_; }

  Eigen::MatrixXd zeros() const { return Eigen::MatrixXd::Zero(n_max_ + 1, phases_); }

  // control(n, s, y) returns the minimized (or fixed-rate) service term.
  // idle(s) is the cost charged at n = 0.
  template <class Control, class Idle>
  void sweep(const Eigen::MatrixXd& v, Eigen::MatrixXd& out, double denominator,
             Control&& control, Idle&& idle) {
    mix_.noalias() = v * qbar_t_;
    const auto& rates = scenario_.phase().rates();
    const bool extrapolate = scenario_.settings().boundary == Boundary::Extrapolate;
    const double inv = 1.0 / denominator;
    for (Eigen::Index s = 0; s < phases_; ++s) {
      const double lambda = rates[static_cast<std::size_t>(s)];
      const double self = model_.nu - model_.eta_bar - lambda;
      for (int n = 0; n <= n_max_; ++n) {
        double up;
        if (n < n_max_) {
          up = v(n + 1, s);
        } else {
          up = extrapolate ? 2.0 * v(n, s) - v(n - 1, s) : v(n, s);
        }
        const double service = n == 0 ? idle(s) : control(n, s, v(n, s) - v(n - 1, s));
        out(n, s) = (holding_[n] + service + lambda * up + mix_(n, s) + self * v(n, s)) * inv;
      }
    }
  }

  void sweep_optimal(const Eigen::MatrixXd& v, Eigen::MatrixXd& out, double denominator) {
    sweep(
        v, out, denominator,
        [this](int, Eigen::Index, double y) { return -conjugate_.phi(y); },
        [](Eigen::Index) { return 0.0; });
  }

  Policy extract_policy(const Eigen::MatrixXd& v) const {
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n_max_ + 1, phases_);
    for (Eigen::Index s = 0; s < phases_; ++s) {
      for (int n = 1; n <= n_max_; ++n) {
        rates(n, s) = conjugate_.psi(v(n, s) - v(n - 1, s));
      }
    }
    return Policy(std::move(rates));
  }

 private:
  const Scenario& scenario_;
  UniformizedModel model_;
  ConjugatePair conjugate_;
  int n_max_;
  Eigen::Index phases_;
  Eigen::MatrixXd qbar_t_;
  Eigen::MatrixXd mix_;
  std::vector<double> holding_;
};

void check_policy_shape(const Scenario& scenario, const Policy& policy) {
  if (policy.truncation() != scenario.truncation() || policy.phases() != scenario.phase().size()) {
    std::ostringstream msg;
    msg << "policy is " << policy.truncation() + 1 << "x" << policy.phases()
        << " but the scenario lattice is " << scenario.truncation() + 1 << "x"
        << scenario.phase().size();
    throw InvalidModel(msg.str());
  }
  if (policy.rates().maxCoeff() > scenario.cost().u_max() * (1.0 + 1e-12)) {
    throw InvalidModel("policy rate exceeds u_max");
  }
}

struct RelativeIterationResult {
  Eigen::MatrixXd values;
  double gain;
  double residual;
  long iterations;
  std::size_t reference;
};

// Relative value iteration: after every sweep the value at (0, reference) is
// subtracted; the reference phase is the argmin of v(0, .) after sweep 1.
template <class Sweep>
RelativeIterationResult relative_iteration(const Scenario& scenario, const Lattice& lattice,
                                           Sweep&& sweep) {
  const double nu = lattice.model().nu;
  const double tol = scenario.tolerance();
  Eigen::MatrixXd v = lattice.zeros();
  Eigen::MatrixXd next = lattice.zeros();
  Eigen::Index reference = 0;
  for (long k = 1; k <= scenario.settings().max_iterations; ++k) {
    sweep(v, next);
    const Eigen::MatrixXd diff = next - v;
    const double lo = diff.minCoeff();
    const double hi = diff.maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw NonConvergence("relative value iteration diverged");
    }
    if (k == 1) {
      next.row(0).minCoeff(&reference);
    }
    v = next.array() - next(0, reference);
    if (hi - lo < tol / nu) {
      return {std::move(v), nu * 0.5 * (lo + hi), nu * (hi - lo), k,
              static_cast<std::size_t>(reference)};
    }
  }
  std::ostringstream msg;
  msg << "relative value iteration did not converge in " << scenario.settings().max_iterations
      << " sweeps";
  throw NonConvergence(msg.str());
}

}  // namespace

SolveResult solve_discounted(const Scenario& scenario) {
  const double alpha = scenario.alpha();
  if (!(alpha > 0.0)) {
    throw InvalidModel("solve_discounted requires alpha > 0");
  }
  Lattice lattice(scenario);
  const double nu = lattice.model().nu;
  const double beta = nu / (alpha + nu);
  const double threshold = scenario.tolerance() * (1.0 - beta) / (2.0 * beta);

  Eigen::MatrixXd v = lattice.zeros();
  Eigen::MatrixXd next = lattice.zeros();
  long iterations = 0;
  for (long k = 1;; ++k) {
    if (k > scenario.settings().max_iterations) {
      std::ostringstream msg;
      msg << "value iteration did not converge in " << scenario.settings().max_iterations
          << " sweeps";
      throw NonConvergence(msg.str());
    }
    lattice.sweep_optimal(v, next, alpha + nu);
    const double change = (next - v).cwiseAbs().maxCoeff();
    v.swap(next);
    if (!std::isfinite(change)) {
      throw NonConvergence("value iteration diverged");
    }
    if (change < threshold) {
      iterations = k;
      break;
    }
  }

  lattice.sweep_optimal(v, next, alpha + nu);
  const double residual = (next - v).cwiseAbs().maxCoeff();

  SolveResult result{
      ValueFunction{v, Criterion::Discounted, alpha, 0},
      lattice.extract_policy(v),
      std::nullopt,
      iterations,
      residual,
      std::nullopt,
  };
  if (const auto stability = stability_check(scenario); !stability.stable) {
    result.stability_warning = stability;
  }
  return result;
}

SolveResult solve_average(const Scenario& scenario) {
  const auto stability = stability_check(scenario);
  if (!stability.stable) {
    std::ostringstream msg;
    msg << "u_max = " << stability.u_max << " does not exceed the mean arrival rate "
        << stability.mean_rate;
    throw Unstable(msg.str());
  }
  Lattice lattice(scenario);
  const double nu = lattice.model().nu;
  auto rvi = relative_iteration(scenario, lattice, [&](const Eigen::MatrixXd& v, Eigen::MatrixXd& out) {
    lattice.sweep_optimal(v, out, nu);
  });
  Policy policy = lattice.extract_policy(rvi.values);
  return SolveResult{
      ValueFunction{std::move(rvi.values), Criterion::Average, 0.0, rvi.reference},
      std::move(policy),
      rvi.gain,
      rvi.iterations,
      rvi.residual,
      std::nullopt,
  };
}

double discounted_residual(const Scenario& scenario, const Eigen::MatrixXd& values) {
  Lattice lattice(scenario);
  Eigen::MatrixXd next = lattice.zeros();
  lattice.sweep_optimal(values, next, scenario.alpha() + lattice.model().nu);
  return (next - values).cwiseAbs().maxCoeff();
}

namespace {

double relative_gain_for_rates(const Scenario& scenario, const Eigen::MatrixXd& mu,
                               bool charge_idle, double idle_rate) {
  Lattice lattice(scenario);
  const auto& cost = scenario.cost();
  // Service costs are looked up once; the sweep only needs c(mu) - mu*y.
  Eigen::MatrixXd c_mu(mu.rows(), mu.cols());
  for (Eigen::Index s = 0; s < mu.cols(); ++s) {
    for (Eigen::Index n = 0; n < mu.rows(); ++n) c_mu(n, s) = cost.service_cost(mu(n, s));
  }
  const double idle = charge_idle ? cost.service_cost(idle_rate) : 0.0;
  const double nu = lattice.model().nu;
  auto rvi = relative_iteration(scenario, lattice, [&](const Eigen::MatrixXd& v, Eigen::MatrixXd& out) {
    lattice.sweep(
        v, out, nu,
        [&](int n, Eigen::Index s, double y) { return c_mu(n, s) - mu(n, s) * y; },
        [idle](Eigen::Index) { return idle; });
  });
  return rvi.gain;
}

}  // namespace

double relative_policy_gain(const Scenario& scenario, const Policy& policy) {
  check_policy_shape(scenario, policy);
  return relative_gain_for_rates(scenario, policy.rates(), false, 0.0);
}

double policy_gain(const Scenario& scenario, const Policy& policy, PolicyEvaluation method) {
  return method == PolicyEvaluation::Stationary ? evaluate_policy(scenario, policy)
                                                : relative_policy_gain(scenario, policy);
}

// ---------------------------------------------------------------------------
// Stationary evaluation on the truncated CTMC
// ---------------------------------------------------------------------------

namespace {

struct SparseChain {
  Eigen::Index states = 0;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> out;  // positive rates only
};

SparseChain build_chain(const Scenario& scenario, const Eigen::MatrixXd& mu) {
  const auto phases = static_cast<Eigen::Index>(scenario.phase().size());
  const int n_max = scenario.truncation();
  const auto& q = scenario.phase().generator();
  const auto& rates = scenario.phase().rates();
  SparseChain chain;
  chain.states = (n_max + 1) * phases;
  chain.out.resize(static_cast<std::size_t>(chain.states));
  auto index = [phases](int n, Eigen::Index s) { return n * phases + s; };
  for (int n = 0; n <= n_max; ++n) {
    for (Eigen::Index s = 0; s < phases; ++s) {
      auto& edges = chain.out[static_cast<std::size_t>(index(n, s))];
      const double lambda = rates[static_cast<std::size_t>(s)];
      if (n < n_max && lambda > 0.0) edges.emplace_back(index(n + 1, s), lambda);
      if (n > 0 && mu(n, s) > 0.0) edges.emplace_back(index(n - 1, s), mu(n, s));
      for (Eigen::Index t = 0; t < phases; ++t) {
        if (t != s && q(s, t) > 0.0) edges.emplace_back(index(n, t), q(s, t));
      }
    }
  }
  return chain;
}

// Tarjan's algorithm, iterative. Returns the component id of every state and
// the number of components.
std::pair<std::vector<int>, int> strongly_connected_components(const SparseChain& chain) {
  const auto n = static_cast<std::size_t>(chain.states);
  std::vector<int> index(n, -1), low(n, 0), component(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  int next_index = 0;
  int components = 0;
  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& frame = call.back();
      const auto& edges = chain.out[frame.node];
      if (frame.edge < edges.size()) {
        const auto target = static_cast<std::size_t>(edges[frame.edge++].first);
        if (index[target] < 0) {
          index[target] = low[target] = next_index++;
          stack.push_back(target);
          on_stack[target] = 1;
          call.push_back({target, 0});
        } else if (on_stack[target]) {
          low[frame.node] = std::min(low[frame.node], index[target]);
        }
        continue;
      }
      const std::size_t node = frame.node;
      call.pop_back();
      if (!call.empty()) {
        low[call.back().node] = std::min(low[call.back().node], low[node]);
      }
      if (low[node] == index[node]) {
        std::size_t member;
        do {
          member = stack.back();
          stack.pop_back();
          on_stack[member] = 0;
          component[member] = components;
        } while (member != node);
        ++components;
      }
    }
  }
  return {std::move(component), components};
}

Eigen::VectorXd stationary_on_closed_class(const SparseChain& chain) {
  auto [component, count] = strongly_connected_components(chain);
  std::vector<char> closed(static_cast<std::size_t>(count), 1);
  for (std::size_t i = 0; i < chain.out.size(); ++i) {
    for (const auto& [j, rate] : chain.out[i]) {
      if (component[static_cast<std::size_t>(j)] != component[i]) closed[component[i]] = 0;
    }
  }
  const auto n_closed = std::count(closed.begin(), closed.end(), 1);
  if (n_closed != 1) {
    std::ostringstream msg;
    msg << "policy induces " << n_closed << " closed classes; the stationary law is not unique";
    throw ReducibleChain(msg.str());
  }
  const int recurrent = static_cast<int>(std::find(closed.begin(), closed.end(), 1) - closed.begin());

  std::vector<Eigen::Index> members;
  std::vector<Eigen::Index> local(chain.out.size(), -1);
  for (std::size_t i = 0; i < chain.out.size(); ++i) {
    if (component[i] == recurrent) {
      local[i] = static_cast<Eigen::Index>(members.size());
      members.push_back(static_cast<Eigen::Index>(i));
    }
  }
  const auto m = static_cast<Eigen::Index>(members.size());

  // Balance equations G^T pi = 0 with the last row replaced by sum pi = 1.
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index a = 0; a < m; ++a) {
    double total = 0.0;
    for (const auto& [j, rate] : chain.out[static_cast<std::size_t>(members[a])]) {
      const Eigen::Index b = local[static_cast<std::size_t>(j)];
      total += rate;
      if (b != m - 1) triplets.emplace_back(b, a, rate);
    }
    if (a != m - 1) triplets.emplace_back(a, a, -total);
  }
  for (Eigen::Index a = 0; a < m; ++a) triplets.emplace_back(m - 1, a, 1.0);
  Eigen::SparseMatrix<double> system(m, m);
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw SingularSystem("policy evaluation: balance equations are singular");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  Eigen::VectorXd pi_local = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !pi_local.allFinite()) {
    throw SingularSystem("policy evaluation: sparse solve failed");
  }
  pi_local = pi_local.cwiseMax(0.0);
  pi_local /= pi_local.sum();

  Eigen::VectorXd pi = Eigen::VectorXd::Zero(chain.states);
  for (Eigen::Index a = 0; a < m; ++a) pi(members[a]) = pi_local(a);
  return pi;
}

Eigen::MatrixXd occupancy_for_rates(const Scenario& scenario, const Eigen::MatrixXd& mu) {
  const auto chain = build_chain(scenario, mu);
  const Eigen::VectorXd pi = stationary_on_closed_class(chain);
  const auto phases = static_cast<Eigen::Index>(scenario.phase().size());
  Eigen::MatrixXd occupancy(scenario.truncation() + 1, phases);
  for (Eigen::Index n = 0; n <= scenario.truncation(); ++n) {
    for (Eigen::Index s = 0; s < phases; ++s) occupancy(n, s) = pi(n * phases + s);
  }
  return occupancy;
}

}  // namespace

Eigen::MatrixXd policy_occupancy(const Scenario& scenario, const Policy& policy) {
  check_policy_shape(scenario, policy);
  return occupancy_for_rates(scenario, policy.rates());
}

double evaluate_policy(const Scenario& scenario, const Policy& policy) {
  const Eigen::MatrixXd occupancy = policy_occupancy(scenario, policy);
  const auto& cost = scenario.cost();
  double gain = 0.0;
  for (Eigen::Index s = 0; s < occupancy.cols(); ++s) {
    for (int n = 0; n < occupancy.rows(); ++n) {
      double rate = cost.holding_cost(n);
      if (n > 0) rate += cost.service_cost(policy(n, static_cast<std::size_t>(s)));
      gain += occupancy(n, s) * rate;
    }
  }
  return gain;
}

double open_loop_gain(const Scenario& scenario, double mu, PolicyEvaluation method) {
  if (!(mu >= 0.0) || mu > scenario.cost().u_max()) {
    throw InvalidModel("open-loop rate must lie in [0, u_max]");
  }
  const Policy policy = Policy::constant(scenario.truncation(), scenario.phase().size(), mu);
  if (method == PolicyEvaluation::Relative) {
    return relative_gain_for_rates(scenario, policy.rates(), true, mu);
  }
  const Eigen::MatrixXd occupancy = occupancy_for_rates(scenario, policy.rates());
  double holding = 0.0;
  for (int n = 0; n < occupancy.rows(); ++n) {
    holding += occupancy.row(n).sum() * scenario.cost().holding_cost(n);
  }
  return holding + scenario.cost().service_cost(mu);
}

}  // namespace mmppctl
