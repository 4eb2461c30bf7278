#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmppctl/model.hpp"
#include "mmppctl/nhpp.hpp"

namespace mmppctl {

struct NhppConfig {
  RateFunction rate;
  NhppSettings settings;
  int partitions = 1;
  std::optional<std::vector<double>> cut_points;
};

/// Parsed scenario file (JSON). See README for the schema.
struct Config {
  std::string label;
  std::optional<PhaseProcess> phase;
  CostModel cost;
  SolverSettings solver;
  std::optional<NhppConfig> nhpp;

  /// Throws ConfigError if the file has no `phase` section.
  Scenario scenario() const;
  /// Throws ConfigError if the file has no `nhpp` section.
  NhppScenario nhpp_scenario() const;
};

/// Throws ConfigError on syntax or schema problems (including unknown keys)
/// and InvalidModel when the data are well-formed but not a valid model.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

}  // namespace mmppctl
