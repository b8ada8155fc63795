#pragma once

// Run configuration: parsing, validation, serialization and model construction.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sfs/estimators.hpp"
#include "sfs/model.hpp"

namespace sfs {

struct ModelSpec {
  std::string name = "gaussian1d";  // gaussian1d | mixture | logistic | double_well
  // gaussian1d
  double mean = 1.0;
  double variance = 2.0;
  // mixture
  double component_variance = 0.03;
  std::vector<std::array<double, 2>> means;  // empty: the default 4x4 grid
  // logistic
  std::size_t n_obs = 100;
  std::size_t n_cov = 5;
  std::vector<double> beta_true;  // empty: all ones
  std::uint64_t data_seed = 2024;
  std::string data_csv;  // load data from here instead of generating it
  // double_well
  std::size_t dim = 5;

  bool operator==(const ModelSpec&) const = default;
};

enum class Preset { Table1, Desk };

struct RunConfig {
  ModelSpec model;
  EstimatorSpec estimator;
  Preset preset = Preset::Table1;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = ".";

  bool operator==(const RunConfig&) const = default;
};

[[nodiscard]] std::string to_string(Preset p);
[[nodiscard]] Preset parse_preset(std::string_view s);

// Parse JSON text. Missing randomization parameters are filled from the
// preset for the model. Unknown keys and invalid values raise ConfigError.
[[nodiscard]] RunConfig parse_config(std::string_view json_text);
[[nodiscard]] RunConfig load_config(const std::string& path);

// Canonical JSON text (sorted keys, fully populated).
[[nodiscard]] std::string serialize_config(const RunConfig& cfg);
// FNV-1a of the canonical text, as 16 hex digits.
[[nodiscard]] std::string config_hash(const RunConfig& cfg);

// Cross-field checks; throws ConfigError.
void validate_config(const RunConfig& cfg);

[[nodiscard]] TargetModel build_model(const ModelSpec& spec);
[[nodiscard]] RandomizationParams preset_randomization(Preset p, std::string_view model_name);
// Default MCMC settings for the alternative estimator and reference chains.
[[nodiscard]] McmcConfig default_mcmc(std::string_view model_name);

[[nodiscard]] std::string fnv1a_hex(std::string_view s);

}  // namespace sfs
