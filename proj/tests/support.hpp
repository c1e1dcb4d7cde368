#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "phonon/collision.hpp"
#include "phonon/grid.hpp"
#include "phonon/material.hpp"

namespace phonon::test {

// Coarse grid that keeps a forward solve in the millisecond range.
inline GridConfig small_grid(double epsilon = 1.0) {
  GridConfig c;
  c.t_end = 0.2;
  c.dt = 0.005;
  c.dx = 0.1;
  c.n_mu = 8;
  c.epsilon = epsilon;
  return c;
}

inline MaterialModel truth_material(const PhaseGrid& grid, LinearVelocity v = {}) {
  return build_material(CoefficientProfile::relaxation_truth(), CoefficientProfile::bose_einstein(), v,
                        grid.omega_nodes());
}

inline MaterialModel initial_material(const PhaseGrid& grid, LinearVelocity v = {}) {
  return build_material(CoefficientProfile::relaxation_initial(), CoefficientProfile::bose_einstein(), v,
                        grid.omega_nodes());
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = u(rng);
  return out;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("phonon_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace phonon::test
