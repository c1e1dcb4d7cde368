#include "phonon/collision.hpp"

#include <cmath>

namespace phonon {

bool DistributionField::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double mean_h_star(const PhaseGrid& grid, const MaterialModel& material) {
  return grid.mean_omega(material.h_star());
}

void project_kernel(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> a,
                    std::span<double> out) {
  const double ratio = grid.mean_mu_omega(a) / mean_h_star(grid, material);
  const auto hs = material.h_star();
  const std::size_t nw = grid.nomega();
  for (std::size_t i = 0; i < grid.nmu(); ++i) {
    for (std::size_t k = 0; k < nw; ++k) out[i * nw + k] = ratio * hs[k];
  }
}

void apply_L(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> h, std::span<double> out) {
  project_kernel(grid, material, h, out);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= h[j];
}

void apply_L0(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> g,
              std::span<double> out) {
  const std::size_t nw = grid.nomega();
  const auto tau = material.tau();
  const auto gs = material.g_star();
  std::vector<double> scaled(g.size());
  for (std::size_t i = 0; i < grid.nmu(); ++i) {
    for (std::size_t k = 0; k < nw; ++k) scaled[i * nw + k] = g[i * nw + k] / tau[k];
  }
  const double t = grid.mean_mu_omega(scaled) / mean_h_star(grid, material);
  for (std::size_t i = 0; i < grid.nmu(); ++i) {
    for (std::size_t k = 0; k < nw; ++k) out[i * nw + k] = t * gs[k] - g[i * nw + k];
  }
}

double temperature(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> h) {
  return grid.mean_mu_omega(h) / mean_h_star(grid, material);
}

std::vector<double> temperature_of(const PhaseGrid& grid, const MaterialModel& material,
                                   const DistributionField& h) {
  std::vector<double> out(h.nx());
  const double norm = mean_h_star(grid, material);
  for (std::size_t ix = 0; ix < h.nx(); ++ix) out[ix] = grid.mean_mu_omega(h.slice(ix)) / norm;
  return out;
}

double weighted_pairing(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> a,
                        std::span<const double> b) {
  const std::size_t nw = grid.nomega();
  const auto hs = material.h_star();
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < grid.nmu(); ++i) {
    for (std::size_t k = 0; k < nw; ++k) prod[i * nw + k] = a[i * nw + k] * b[i * nw + k] / hs[k];
  }
  return grid.mean_mu_omega(prod);
}

}  // namespace phonon
