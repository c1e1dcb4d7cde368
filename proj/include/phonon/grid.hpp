#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phonon {

/// Raised for any invalid discretization request (bad spacing, odd N_mu,
/// CFL violation).
class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridConfig {
  double t_end = 1.5;
  double dt = 0.005;
  double x_end = 1.0;
  double dx = 0.02;
  double omega_min = 0.4;
  double omega_max = 4.0;
  double domega = 0.4;
  int n_mu = 64;
  double epsilon = 1.0;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on (-1, 1), nodes ascending.
QuadratureRule gauss_legendre(int n);

/// Composite trapezoid weights for `n` uniformly spaced nodes.
std::vector<double> trapezoid_weights(std::size_t n, double spacing);

/// Number of nodes of a uniform grid on [start, end]: floor((end-start)/step)+1,
/// tolerant to round-off in the ratio.
std::size_t uniform_count(double start, double end, double step);

enum class Axis { t, x, mu, omega };

/// Discretization of (t, x, mu, omega). Immutable after construction.
///
/// Every bracket average is a normalized mean over the truncated domain:
/// Gauss-Legendre in mu, trapezoid in t, x and omega, divided by the measure
/// of the integrated range so that the mean of 1 is exactly 1.
class PhaseGrid {
 public:
  /// `speed` is the group velocity v(omega); it sets the CFL guard
  /// dt * max|mu v| / epsilon <= dx.
  PhaseGrid(const GridConfig& config, const std::function<double(double)>& speed);

  const GridConfig& config() const { return config_; }
  double epsilon() const { return config_.epsilon; }
  double dt() const { return config_.dt; }
  double dx() const { return config_.dx; }
  double domega() const { return config_.domega; }

  std::size_t nt() const { return t_.size(); }
  std::size_t nx() const { return x_.size(); }
  std::size_t nmu() const { return mu_.size(); }
  std::size_t nomega() const { return omega_.size(); }
  /// Values per x-slice, laid out [mu][omega].
  std::size_t slice_size() const { return mu_.size() * omega_.size(); }

  std::span<const double> t_nodes() const { return t_; }
  std::span<const double> x_nodes() const { return x_; }
  std::span<const double> mu_nodes() const { return mu_; }
  std::span<const double> mu_weights() const { return mu_weights_; }
  std::span<const double> omega_nodes() const { return omega_; }

  /// Plain trapezoid weights in omega (sum = omega range).
  std::span<const double> omega_weights() const { return omega_weights_; }
  std::span<const double> t_weights() const { return t_weights_; }
  std::span<const double> x_weights() const { return x_weights_; }

  /// Index of the mirrored direction -mu.
  std::size_t mirror(std::size_t mu_index) const { return mu_.size() - 1 - mu_index; }
  /// Directions with mu > 0 are the upper half of the ascending node list.
  std::size_t first_positive_mu() const { return mu_.size() / 2; }

  double time_horizon() const { return t_.back() - t_.front(); }
  double omega_range() const { return omega_.back() - omega_.front(); }
  double max_characteristic_speed() const { return max_speed_; }

  // Normalized means. Inputs are laid out as documented per function.

  /// <f>_{mu,omega} of a [mu][omega] slice.
  double mean_mu_omega(std::span<const double> slice) const;
  /// <f>_omega of a per-omega vector.
  double mean_omega(std::span<const double> values) const;
  /// <f>_mu of a per-mu vector.
  double mean_mu(std::span<const double> values) const;
  /// Half-range mean over mu>0 (sign=+1) or mu<0 (sign=-1), normalized by the
  /// half measure.
  double half_mean_mu(std::span<const double> values, int sign) const;
  double mean_t(std::span<const double> values) const;
  double mean_x(std::span<const double> values) const;

  /// Trapezoid inner product in omega, int a b domega.
  double omega_inner(std::span<const double> a, std::span<const double> b) const;

 private:
  GridConfig config_;
  std::vector<double> t_, x_, mu_, mu_weights_, omega_;
  std::vector<double> t_weights_, x_weights_, omega_weights_;
  double max_speed_ = 0.0;
};

/// Row-major field over an ordered subset of the grid axes.
struct AxisField {
  std::vector<Axis> axes;
  std::vector<double> values;
};

/// Normalized mean of `field` over the axes in `over`; the remaining axes keep
/// their order. Averaging over every axis yields a single value.
AxisField average(const PhaseGrid& grid, const AxisField& field, std::initializer_list<Axis> over);

std::size_t axis_length(const PhaseGrid& grid, Axis axis);

}  // namespace phonon
