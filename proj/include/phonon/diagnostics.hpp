#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonon/collision.hpp"
#include "phonon/grid.hpp"
#include "phonon/material.hpp"
#include "phonon/transport.hpp"

namespace phonon {

class DiagnosticsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Macroscopic fields on the (t, x) grid, row-major [t][x].
struct MacroTrace {
  std::vector<double> t, x;
  std::vector<double> q, T, dT_dx, kappa;
  std::vector<unsigned char> kappa_defined;

  std::size_t nt() const { return t.size(); }
  std::size_t nx() const { return x.size(); }
  std::size_t at(std::size_t n, std::size_t ix) const { return n * x.size() + ix; }
};

/// q = (1/eps) <mu v g>_{mu,omega} for one g-slice ([mu][omega]).
double heat_flux(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> g_slice);

/// Kinetic run from the given inflow, reduced on the fly to q and T; the
/// full trajectory is never stored. Gradient and kappa are filled in.
/// `also` sees every step as well.
MacroTrace run_macro(const PhaseGrid& grid, const MaterialModel& material, const InflowFunction& inflow,
                     const StepObserver& also = {});

/// Centered second-order d/dx of every time row (one-sided second order at
/// the ends).
void fill_gradient(MacroTrace& trace);

/// kappa = -q / dT_dx where |dT_dx| >= floor_ratio * max|T|; masked elsewhere.
void pointwise_kappa(MacroTrace& trace, double floor_ratio = 1e-8);

void write_macro_csv(const std::string& path, const MacroTrace& trace);

/// Bulk conductivity (1/3) <tau v^2 g*>_omega.
double bulk_kappa(const PhaseGrid& grid, const MaterialModel& material);

/// (1/3) (1/W) int_lo^hi tau v^2 g* domega with the nodal integrand
/// interpolated linearly; the full window reproduces bulk_kappa.
double accumulation_kappa(const PhaseGrid& grid, const MaterialModel& material, double omega_lo, double omega_hi);

/// Grey model kappa = (1/3) C v_G^2 tau_G.
double grey_kappa(double heat_capacity, double velocity, double tau);

/// Settled value of kappa at one x node over t >= t_from.
struct KappaSettling {
  double value = 0.0;   // mean over the window
  double drift = 0.0;   // (max - min) / |mean|
  std::size_t samples = 0;
  bool defined = false;  // every sample in the window was defined
};

KappaSettling kappa_settling(const MacroTrace& trace, double x_probe, double t_from);

/// Explicit FTCS for u_t = D u_xx on uniform nodes. Insulated (mirror ghost)
/// at the right end; at the left end the value is prescribed by `left_trace`
/// (indexed by step) or insulated when none is given. Returns rows [step][x]
/// for steps 0..steps.
std::vector<std::vector<double>> solve_heat_reference(double diffusivity, std::span<const double> initial_u,
                                                      double dx, double dt, std::size_t steps,
                                                      const std::function<double(std::size_t)>& left_trace = {});

/// Seeds the heat equation with the kinetic temperature at t_seed, drives
/// x = 0 with the kinetic boundary temperature, and returns the relative L2
/// (t, x) difference to the kinetic temperature over [t_seed, end].
double heat_comparison(const MacroTrace& trace, double diffusivity, double t_seed);

/// Relative L2 (x, mu, omega quadrature) norm of g - (g* u - eps mu v tau g* u_x)
/// with u the temperature of g itself. `g` holds all x-slices of one time.
double chapman_enskog_residual(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> g);

/// g = tau h for every slice of an h-field.
std::vector<double> to_g(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> h);

}  // namespace phonon
