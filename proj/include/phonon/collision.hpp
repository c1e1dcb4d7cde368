#pragma once

#include <span>
#include <vector>

#include "phonon/grid.hpp"
#include "phonon/material.hpp"

namespace phonon {

/// Phase-space snapshot h(x, mu, omega) at one time, laid out [x][mu][omega].
/// The adjoint variable uses the same container.
class DistributionField {
 public:
  DistributionField() = default;
  explicit DistributionField(const PhaseGrid& grid)
      : nx_(grid.nx()), slice_(grid.slice_size()), values_(nx_ * slice_, 0.0) {}

  std::size_t nx() const { return nx_; }
  std::size_t slice_size() const { return slice_; }

  std::span<double> slice(std::size_t ix) { return {values_.data() + ix * slice_, slice_}; }
  std::span<const double> slice(std::size_t ix) const { return {values_.data() + ix * slice_, slice_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;

 private:
  std::size_t nx_ = 0;
  std::size_t slice_ = 0;
  std::vector<double> values_;
};

/// <h*>_omega, the normalization shared by L, T and the gradient.
double mean_h_star(const PhaseGrid& grid, const MaterialModel& material);

/// L[h] = (<h>_{mu,omega} / <h*>_omega) h* - h on one x-slice ([mu][omega]).
void apply_L(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> h, std::span<double> out);

/// L0[g] = T g* - g with T = <g/tau>_{mu,omega} / <g*/tau>_omega.
void apply_L0(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> g,
              std::span<double> out);

/// Projection of a slice onto Ker L: (<a>_{mu,omega} / <h*>_omega) h*.
void project_kernel(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> a,
                    std::span<double> out);

/// T = <h>_{mu,omega} / <h*>_omega for one slice.
double temperature(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> h);

/// Temperature at every x node.
std::vector<double> temperature_of(const PhaseGrid& grid, const MaterialModel& material,
                                   const DistributionField& h);

/// Weighted pairing <a b / h*>_{mu,omega} on one slice.
double weighted_pairing(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> a,
                        std::span<const double> b);

}  // namespace phonon
