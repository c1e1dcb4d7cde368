#pragma once

#include <string>
#include <vector>

#include "phonon/config.hpp"
#include "phonon/diagnostics.hpp"
#include "phonon/inverse.hpp"
#include "phonon/optimize.hpp"

namespace phonon {

struct ForwardDemoResult {
  double t_arrival = 0.0;  // predicted
  double t_peak = 0.0;     // post-injection maximum of T(t, 0)
  std::vector<double> boundary_T;
  std::vector<std::string> files;
};

/// Snapshots of <h>_mu(x, omega), the boundary temperature trace and one
/// omega-slice of h.
ForwardDemoResult run_forward_demo(const ExperimentConfig& config);

struct DiffusionRow {
  double epsilon = 0.0;
  double kappa_bulk = 0.0;
  KappaSettling settled;
  double gap = 0.0;          // |kappa_settled - kappa_bulk| / kappa_bulk
  double ce_residual = 0.0;  // at diffusion.ce_time
  double heat_gap = 0.0;     // kinetic vs heat-equation temperature after settle_time
};

std::vector<DiffusionRow> run_diffusion_study(const ExperimentConfig& config);

/// Pairs of the configured family with data: read from experiments.data when
/// set, otherwise generated from the ground-truth tau.
std::vector<SourceTestPair> prepare_pairs(const ExperimentConfig& config, const PhaseGrid& grid);

std::vector<SourceTestPair> run_generate_data(const ExperimentConfig& config);

struct ReconstructionResult {
  OptimizerState state;
  std::vector<double> tau_star;
};

ReconstructionResult run_reconstruction(const ExperimentConfig& config);

struct FdComparison {
  std::size_t pair = 0;
  std::size_t node = 0;
  double adjoint = 0.0;
  double fd = 0.0;
  double rel_error = 0.0;
};

struct GradCheckResult {
  std::vector<std::vector<double>> gradients;  // at tau0
  std::vector<FdComparison> fd;
  std::vector<std::size_t> argmax;
  std::size_t aligned = 0;
  std::vector<double> norms_tau0, norms_star;
};

/// Unit-bump directions at `directions` distinct omega nodes per pair, drawn
/// from the run seed.
std::vector<std::vector<std::size_t>> fd_direction_nodes(const ExperimentConfig& config, std::size_t pairs,
                                                         std::size_t nodes);

GradCheckResult run_grad_check(const ExperimentConfig& config);

struct GradDiagnosticsResult {
  std::vector<std::vector<double>> gradients;
  GradientGeometry raw, recombined;
  LipschitzReport lipschitz, lipschitz_half;
};

GradDiagnosticsResult run_grad_diagnostics(const ExperimentConfig& config);

/// Writes the effective configuration next to the results.
void echo_config(const ExperimentConfig& config);

}  // namespace phonon
