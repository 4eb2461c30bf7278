#include "mmppctl/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "mmppctl/errors.hpp"

namespace mmppctl {

namespace {

using nlohmann::json;

void only_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

const json& required(const json& j, std::string_view where, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(std::string(where) + " is missing '" + key + "'");
  }
  return j.at(key);
}

double number(const json& j, std::string_view what) {
  if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
  return j.get<double>();
}

long integer(const json& j, std::string_view what) {
  if (!j.is_number_integer()) throw ConfigError(std::string(what) + " must be an integer");
  return j.get<long>();
}

std::string text(const json& j, std::string_view what) {
  if (!j.is_string()) throw ConfigError(std::string(what) + " must be a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, std::string_view what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, what));
  return out;
}

template <class T>
T optional_number(const json& j, const char* key, T fallback, std::string_view where) {
  if (!j.contains(key)) return fallback;
  const std::string what = std::string(where) + "." + key;
  if constexpr (std::is_integral_v<T>) {
    return static_cast<T>(integer(j.at(key), what));
  } else {
    return static_cast<T>(number(j.at(key), what));
  }
}

Boundary boundary(const json& j, std::string_view what) {
  const std::string b = text(j, what);
  if (b == "extrapolate") return Boundary::Extrapolate;
  if (b == "block") return Boundary::Block;
  throw ConfigError(std::string(what) + " must be 'extrapolate' or 'block'");
}

PhaseProcess parse_phase(const json& j) {
  only_keys(j, "phase", {"Q", "lambdas", "ordering"});
  std::vector<double> lambdas = numbers(required(j, "phase", "lambdas"), "phase.lambdas");
  std::vector<double> flat = numbers(required(j, "phase", "Q"), "phase.Q");
  const auto l = static_cast<Eigen::Index>(lambdas.size());
  if (static_cast<Eigen::Index>(flat.size()) != l * l) {
    std::ostringstream msg;
    msg << "phase.Q has " << flat.size() << " entries, expected " << l * l << " (row-major)";
    throw ConfigError(msg.str());
  }
  Eigen::MatrixXd q(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index k = 0; k < l; ++k) q(i, k) = flat[static_cast<std::size_t>(i * l + k)];
  }
  auto ordering = PhaseProcess::Ordering::SortByRate;
  if (j.contains("ordering")) {
    const std::string o = text(j.at("ordering"), "phase.ordering");
    if (o == "preserve") {
      ordering = PhaseProcess::Ordering::Preserve;
    } else if (o != "sort") {
      throw ConfigError("phase.ordering must be 'sort' or 'preserve'");
    }
  }
  return PhaseProcess(std::move(q), std::move(lambdas), ordering);
}

ServiceCost parse_service(const json& j) {
  const std::string family = text(required(j, "cost.service", "family"), "cost.service.family");
  if (family == "exponential") {
    only_keys(j, "cost.service", {"family"});
    return ExponentialCost{};
  }
  if (family == "quadratic") {
    only_keys(j, "cost.service", {"family", "offset"});
    return QuadraticCost{optional_number(j, "offset", 0.0, "cost.service")};
  }
  if (family == "power_series") {
    only_keys(j, "cost.service", {"family", "coefficients"});
    return PowerSeriesCost{numbers(required(j, "cost.service", "coefficients"),
                                   "cost.service.coefficients")};
  }
  throw ConfigError("cost.service.family must be exponential, quadratic or power_series");
}

HoldingCost parse_holding(const json& j) {
  const std::string family = text(required(j, "cost.holding", "family"), "cost.holding.family");
  if (family == "linear") {
    only_keys(j, "cost.holding", {"family"});
    return LinearHolding{};
  }
  if (family == "shifted_linear") {
    only_keys(j, "cost.holding", {"family", "shift"});
    return ShiftedLinearHolding{
        static_cast<int>(integer(required(j, "cost.holding", "shift"), "cost.holding.shift"))};
  }
  if (family == "power") {
    only_keys(j, "cost.holding", {"family", "scale", "power"});
    return PowerHolding{optional_number(j, "scale", 1.0, "cost.holding"),
                        static_cast<int>(integer(required(j, "cost.holding", "power"),
                                                 "cost.holding.power"))};
  }
  throw ConfigError("cost.holding.family must be linear, shifted_linear or power");
}

CostModel parse_cost(const json& j) {
  only_keys(j, "cost", {"service", "holding", "u_max"});
  return CostModel(parse_service(required(j, "cost", "service")),
                   parse_holding(required(j, "cost", "holding")),
                   number(required(j, "cost", "u_max"), "cost.u_max"));
}

SolverSettings parse_solver(const json& j) {
  only_keys(j, "solver",
            {"alpha", "truncation_N", "tolerance", "uniformization_slack", "boundary", "max_iterations"});
  SolverSettings s;
  s.alpha = optional_number(j, "alpha", s.alpha, "solver");
  s.truncation = optional_number(j, "truncation_N", s.truncation, "solver");
  s.tolerance = optional_number(j, "tolerance", s.tolerance, "solver");
  s.uniformization_slack = optional_number(j, "uniformization_slack", s.uniformization_slack, "solver");
  s.max_iterations = optional_number(j, "max_iterations", s.max_iterations, "solver");
  if (j.contains("boundary")) s.boundary = boundary(j.at("boundary"), "solver.boundary");
  return s;
}

RateFunction parse_rate(const json& j, double period) {
  const std::string family = text(required(j, "nhpp.rate", "family"), "nhpp.rate.family");
  if (family == "piecewise_constant") {
    only_keys(j, "nhpp.rate", {"family", "breakpoints", "rates"});
    return RateFunction(
        PiecewiseConstantRate{numbers(required(j, "nhpp.rate", "breakpoints"), "nhpp.rate.breakpoints"),
                              numbers(required(j, "nhpp.rate", "rates"), "nhpp.rate.rates")},
        period);
  }
  if (family == "sinusoid") {
    only_keys(j, "nhpp.rate", {"family", "amplitude", "offset"});
    return RateFunction(
        SinusoidRate{number(required(j, "nhpp.rate", "amplitude"), "nhpp.rate.amplitude"),
                     number(required(j, "nhpp.rate", "offset"), "nhpp.rate.offset")},
        period);
  }
  throw ConfigError("nhpp.rate.family must be piecewise_constant or sinusoid");
}

NhppConfig parse_nhpp(const json& j, const SolverSettings& solver) {
  only_keys(j, "nhpp",
            {"rate", "period_T", "delta_t", "partitions", "cut_points", "tolerance", "boundary",
             "damping", "max_iterations"});
  const double period = number(required(j, "nhpp", "period_T"), "nhpp.period_T");
  NhppSettings s;
  s.truncation = solver.truncation;
  s.delta_t = number(required(j, "nhpp", "delta_t"), "nhpp.delta_t");
  s.tolerance = optional_number(j, "tolerance", s.tolerance, "nhpp");
  s.damping = optional_number(j, "damping", s.damping, "nhpp");
  s.max_iterations = optional_number(j, "max_iterations", s.max_iterations, "nhpp");
  if (j.contains("boundary")) s.boundary = boundary(j.at("boundary"), "nhpp.boundary");
  NhppConfig out{parse_rate(required(j, "nhpp", "rate"), period), s,
                 static_cast<int>(integer(required(j, "nhpp", "partitions"), "nhpp.partitions")),
                 std::nullopt};
  if (j.contains("cut_points")) out.cut_points = numbers(j.at("cut_points"), "nhpp.cut_points");
  return out;
}

}  // namespace

Scenario Config::scenario() const {
  if (!phase) throw ConfigError("config has no 'phase' section");
  return Scenario(*phase, cost, solver);
}

NhppScenario Config::nhpp_scenario() const {
  if (!nhpp) throw ConfigError("config has no 'nhpp' section");
  return NhppScenario(nhpp->rate, cost, nhpp->settings);
}

Config parse_config(std::string_view source) {
  json j;
  try {
    j = json::parse(source.begin(), source.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"label", "phase", "cost", "solver", "nhpp"});
  if (!j.contains("phase") && !j.contains("nhpp")) {
    throw ConfigError("config needs a 'phase' or an 'nhpp' section");
  }
  const SolverSettings solver = j.contains("solver") ? parse_solver(j.at("solver")) : SolverSettings{};
  Config config{j.contains("label") ? text(j.at("label"), "label") : std::string("config"),
                std::nullopt, parse_cost(required(j, "config", "cost")), solver, std::nullopt};
  if (j.contains("phase")) config.phase = parse_phase(j.at("phase"));
  if (j.contains("nhpp")) config.nhpp = parse_nhpp(j.at("nhpp"), solver);
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace mmppctl
