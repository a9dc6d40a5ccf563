#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reglsl/lsl.hpp"

namespace reglsl {

/// gamma * exp(-0.5 * sum_k ((x_k - mu_k) / sigma_k)^2), axis-aligned.
struct GaussianBump {
  double amplitude = 0.0;
  std::vector<double> center;
  std::vector<double> deviation;

  bool operator==(const GaussianBump&) const = default;
};

enum class SourceLayout { origin, boundary_pairs };

std::string_view to_string(SourceLayout layout);
SourceLayout parse_source_layout(std::string_view text);

struct ExperimentConfig {
  std::string name = "experiment";
  EquationKind kind = EquationKind::schrodinger;
  GridSpec grid;
  std::vector<GaussianBump> bumps;
  std::vector<double> lambdas;
  SourceLayout sources = SourceLayout::origin;

  // [inversion]
  std::vector<InversionMode> modes{InversionMode::reg_lsl};
  double gramian_threshold = 5e-12;
  ThresholdMode gramian_mode = ThresholdMode::absolute;
  double pinv_threshold = 6e-5;
  std::map<InversionMode, double> mode_pinv;  // per-mode override

  // [sweep]: alpha_k paired with pinv_k
  std::vector<double> sweep_alphas;
  std::vector<double> sweep_pinv;

  // [noise]: level_k paired with pinv_k (a single pinv applies to all levels)
  std::vector<double> noise_percents;
  std::vector<double> noise_pinv;
  double noise_alpha = 5e-14;

  std::uint64_t seed = 1;

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const;
  double pinv_for(InversionMode mode) const;
  InversionSettings settings_for(InversionMode mode) const;
  SourceSet source_set() const;
  CoefficientField truth() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a over the serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Timed pipeline stage with its products; a stage is complete once every
/// listed output exists.
struct StageRecord {
  std::string name;
  double seconds = 0.0;
  std::vector<std::string> outputs;  // relative to the run directory
  std::map<std::string, std::string> diagnostics;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string config_name;
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;

  const StageRecord* find(const std::string& stage) const;
  std::vector<std::string> outputs() const;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides config.seed
  bool resume = false;
  std::optional<std::filesystem::path> data_path;        // invert: measured dataset
  std::optional<std::filesystem::path> background_path;  // invert: background dataset
};

RunManifest cmd_simulate(const ExperimentConfig& config, const RunOptions& options);
RunManifest cmd_invert(const ExperimentConfig& config, const RunOptions& options);
RunManifest cmd_sweep(const ExperimentConfig& config, const RunOptions& options);
RunManifest cmd_noise(const ExperimentConfig& config, const RunOptions& options);

}  // namespace reglsl
