#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonon/grid.hpp"
#include "phonon/material.hpp"
#include "phonon/optimize.hpp"
#include "phonon/transport.hpp"

namespace phonon {

class InverseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment: injected source, Gaussian test window centered at t_R with
/// width eps_window, and the recorded datum once generated.
struct SourceTestPair {
  BoundarySource source;
  double t_R = 0.0;
  double eps_window = 0.08;
  std::optional<double> datum;

  /// psi(t) = exp(-(t - t_R)^2 / (2 eps_window^2)).
  double window(double t) const;
  /// Window must fit: t_R + 3 eps_window <= horizon.
  void validate(double horizon) const;
};

/// t_R = t0 + 2 / (mu0 v(omega0)).
double arrival_time(double t0, double mu0, double omega0, const LinearVelocity& velocity);

/// Settings shared by a family of pairs: one source per listed frequency
/// (every omega node when `omegas` is empty), window centered at the arrival
/// time of that frequency.
struct PairFamily {
  double t0 = 0.1;
  double mu0 = 0.93;
  double eps_t = 0.01;
  double eps_mu = 0.01;
  double eps_omega = 0.1;
  double eps_window = 0.08;
  std::vector<double> omegas;
};

std::vector<SourceTestPair> build_pairs(const PhaseGrid& grid, const LinearVelocity& velocity,
                                        const PairFamily& family);

/// T(t, x=0) for every time node.
std::vector<double> boundary_temperature(const PhaseGrid& grid, const MaterialModel& material,
                                         const BoundarySource& source);

/// Lambda = <T(t, x=0), psi(t)>_t as a normalized time mean.
double forward_map(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair);

/// Fills every datum with Lambda under the ground-truth material.
void generate_data(const PhaseGrid& grid, const MaterialModel& truth, std::vector<SourceTestPair>& pairs);

void write_data_csv(const std::string& path, const std::vector<SourceTestPair>& pairs);
std::vector<SourceTestPair> read_data_csv(const std::string& path);

struct LossValue {
  double loss = 0.0;      // L_i = l_i^2 / 2
  double mismatch = 0.0;  // l_i
};

LossValue loss(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair);

struct GradientResult {
  LossValue value;
  /// dL_i/dtau as a density in omega: the directional derivative along a
  /// perturbation d is grid.omega_inner(gradient, d).
  std::vector<double> gradient;
};

/// Adjoint-state gradient: one forward solve, one adjoint solve, then the
/// six-term assembly (boundary inflow, measurement normalization, interior
/// collision terms).
GradientResult frechet_gradient(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair);

/// Central difference (f(tau + s d) - f(tau - s d)) / (2 s).
double fd_directional(const std::function<double(std::span<const double>)>& f, std::span<const double> tau,
                      std::span<const double> direction, double step);

/// Central-difference directional derivative of L_i through the PDE.
double fd_gradient_oracle(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair,
                          std::span<const double> direction, double step = 1e-3);

struct LipschitzReport {
  std::vector<double> ratios;
  double max_ratio = 0.0;
};

/// Ratios |grad f[tau + d] - grad f[tau]| / |d| over random draws
/// d_k = scale * U(-1, 1), norms in the omega inner product.
LipschitzReport lipschitz_probe(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair,
                                int trials, double scale, std::uint64_t seed);

/// L[tau] = (1/N) sum_i L_i over a set of pairs with data.
class PairObjective : public StochasticObjective {
 public:
  PairObjective(const PhaseGrid& grid, MaterialModel base, std::vector<SourceTestPair> pairs);

  std::size_t size() const override { return pairs_.size(); }
  double loss(std::size_t i, std::span<const double> tau) const override;
  ObjectiveSample sample(std::size_t i, std::span<const double> tau) const override;
  double inner(std::span<const double> a, std::span<const double> b) const override;

  const std::vector<SourceTestPair>& pairs() const { return pairs_; }
  MaterialModel material_for(std::span<const double> tau) const;

 private:
  const PhaseGrid& grid_;
  MaterialModel base_;
  std::vector<SourceTestPair> pairs_;
};

}  // namespace phonon
