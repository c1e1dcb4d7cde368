#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonon/grid.hpp"
#include "phonon/inverse.hpp"
#include "phonon/material.hpp"
#include "phonon/optimize.hpp"
#include "phonon/transport.hpp"

namespace phonon {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Profile selector: truth | initial | bose_einstein | constant | table.
struct ProfileSpec {
  std::string kind = "truth";
  double value = 1.0;
  std::string table;

  CoefficientProfile build() const;
};

struct MaterialSpec {
  ProfileSpec tau{"truth", 1.0, ""};
  ProfileSpec g_star{"bose_einstein", 1.0, ""};
  LinearVelocity velocity;
  MaterialBounds bounds;
};

struct ForwardSettings {
  std::vector<double> snapshot_times{0.1, 0.3, 0.5, 0.7, 0.9, 1.2};
  double slice_t = 0.12;
  double slice_x = 0.5;
  double slice_mu = 0.9675;
};

struct DiffusionSettings {
  std::vector<double> epsilons{1.0, 0.1};
  double dt = 4e-4;
  double t_end = 0.5;
  double probe_x = 0.5;
  double settle_time = 0.125;
  double ce_time = 0.3;
};

struct DiagnosticsSettings {
  double fd_step = 1e-3;
  int directions = 3;
  int lipschitz_trials = 20;
  double lipschitz_scale = 1e-2;
};

struct ExperimentConfig {
  GridConfig grid;
  MaterialSpec material;
  ProfileSpec initial_tau{"initial", 1.0, ""};
  BoundarySource source;
  PairFamily experiments;
  std::string data_path;
  OptimizerSettings optimizer;
  int snapshot_every = 60;
  ForwardSettings forward;
  DiffusionSettings diffusion;
  DiagnosticsSettings diagnostics;
  std::string output_dir = "out";
  std::uint64_t seed = 20240501;

  /// Checks cross-field constraints; throws ConfigError naming the key.
  void validate() const;
};

/// Named parameter sets: fig1 (diffusion study), fig4 (forward, eps = 1),
/// fig5 (forward, eps = 0.1), sec52 (reconstruction and gradient study).
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Reads an INI file on top of `base`. Unknown sections or keys are errors.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
/// Same, from text.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});

/// Full effective configuration as INI text; parse_config(to_ini(c)) == c.
std::string to_ini(const ExperimentConfig& config);

/// Grid and material of a configuration.
PhaseGrid make_grid(const GridConfig& grid, const LinearVelocity& velocity);
MaterialModel make_material(const ExperimentConfig& config, const PhaseGrid& grid, const ProfileSpec& tau);

}  // namespace phonon
