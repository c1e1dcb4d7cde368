#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonon/collision.hpp"
#include "phonon/grid.hpp"
#include "phonon/material.hpp"

namespace phonon {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Separable Gaussian injection profile, each factor unit-peak
/// exp(-z^2 / (2 width^2)).
struct BoundarySource {
  double t0 = 0.04;
  double mu0 = 0.96;
  double omega0 = 2.0;
  double eps_t = 0.01;
  double eps_mu = 0.01;
  double eps_omega = 0.1;
  double amplitude = 1.0;

  void validate() const;
  double operator()(double t, double mu, double omega) const;
};

/// Returns the callable phi(t, mu, omega) for a validated source.
std::function<double(double, double, double)> gaussian_source(const BoundarySource& source);

/// Unit-peak Gaussian bump exp(-(z)^2 / (2 width^2)).
double gaussian_bump(double z, double width);

/// Fills the inflow values at x = 0 for the mu > 0 directions, laid out
/// [mu - first_positive_mu][omega], at time step `step`.
using InflowFunction = std::function<void(std::size_t step, std::span<double> inflow)>;

/// Called with every time level, including the initial one.
using StepObserver = std::function<void(std::size_t step, const DistributionField& field)>;

/// Explicit upwind / forward Euler integration of
///   d_t h + (1/eps) mu v d_x h = 1/(eps^2 tau) L[h]
/// from zero initial data, with inflow at x = 0 for mu > 0 and specular
/// reflection at x = 1. Refuses steps that violate dt <= 0.5 eps^2 tau_min and
/// aborts on the first non-finite value.
void integrate_kinetic(const PhaseGrid& grid, const MaterialModel& material, const InflowFunction& inflow,
                       const StepObserver& observer);

/// Full space-time solution, indexed in forward time.
class Trajectory {
 public:
  Trajectory(std::size_t nt, std::size_t nx, std::size_t slice_size)
      : nt_(nt), nx_(nx), slice_(slice_size), values_(nt * nx * slice_size, 0.0) {}

  std::size_t nt() const { return nt_; }
  std::size_t nx() const { return nx_; }
  std::size_t slice_size() const { return slice_; }

  std::span<const double> snapshot(std::size_t step) const {
    return {values_.data() + step * nx_ * slice_, nx_ * slice_};
  }
  std::span<double> snapshot(std::size_t step) { return {values_.data() + step * nx_ * slice_, nx_ * slice_}; }
  std::span<const double> slice(std::size_t step, std::size_t ix) const {
    return {values_.data() + (step * nx_ + ix) * slice_, slice_};
  }
  /// Boundary traces at x = 0 and x = 1.
  std::span<const double> left_trace(std::size_t step) const { return slice(step, 0); }
  std::span<const double> right_trace(std::size_t step) const { return slice(step, nx_ - 1); }

  void store(std::size_t step, const DistributionField& field);

 private:
  std::size_t nt_, nx_, slice_;
  std::vector<double> values_;
};

/// Inflow h = phi / tau for a Gaussian source.
InflowFunction source_inflow(const PhaseGrid& grid, const MaterialModel& material, const BoundarySource& source);

Trajectory solve_forward(const PhaseGrid& grid, const MaterialModel& material, const BoundarySource& source);
Trajectory solve_forward(const PhaseGrid& grid, const MaterialModel& material, const InflowFunction& inflow);

/// Adjoint inflow in the time-reversed, direction-flipped frame
/// (s = T - t, mu -> -mu):
///   p(s, 0, mu) = l h* psi(T - s) / (|mu| v tau <h*>_omega),  mu > 0.
InflowFunction adjoint_inflow(const PhaseGrid& grid, const MaterialModel& material, double mismatch,
                              const std::function<double(double)>& window);

/// Backward adjoint solve:
///   d_t p + mu v d_x p = -(1/tau) L[p],  p(T) = 0,
///   p(t, 0, mu<0) = l h* psi(t) / (|mu| v tau <h*>_omega),  reflection at x = 1.
/// Integrated as a forward problem in s = T - t with mirrored directions; the
/// returned trajectory is indexed in forward time with the original directions.
Trajectory solve_adjoint(const PhaseGrid& grid, const MaterialModel& material, double mismatch,
                         const std::function<double(double)>& window);

/// Maps a field from the flipped adjoint frame back to physical directions.
void unflip_directions(const PhaseGrid& grid, std::span<const double> flipped, std::span<double> out);

/// One CSV per requested time with columns (x, mu, omega, value).
void dump_trajectory_slice(const std::string& path, const PhaseGrid& grid, const Trajectory& traj,
                           std::size_t step);

}  // namespace phonon
