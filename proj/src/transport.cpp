#include "phonon/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phonon/csv.hpp"

namespace phonon {

double gaussian_bump(double z, double width) { return std::exp(-z * z / (2.0 * width * width)); }

void BoundarySource::validate() const {
  if (!(eps_t > 0.0 && eps_mu > 0.0 && eps_omega > 0.0)) throw SolverError("source widths must be positive");
  if (!(mu0 > 0.0 && mu0 < 1.0)) throw SolverError("source direction mu0 must lie in (0, 1)");
}

double BoundarySource::operator()(double t, double mu, double omega) const {
  return amplitude * gaussian_bump(t - t0, eps_t) * gaussian_bump(mu - mu0, eps_mu) *
         gaussian_bump(omega - omega0, eps_omega);
}

std::function<double(double, double, double)> gaussian_source(const BoundarySource& source) {
  source.validate();
  return [source](double t, double mu, double omega) { return source(t, mu, omega); };
}

void Trajectory::store(std::size_t step, const DistributionField& field) {
  const auto src = field.values();
  std::copy(src.begin(), src.end(), snapshot(step).begin());
}

void integrate_kinetic(const PhaseGrid& grid, const MaterialModel& material, const InflowFunction& inflow,
                       const StepObserver& observer) {
  const std::size_t nx = grid.nx();
  const std::size_t nmu = grid.nmu();
  const std::size_t nw = grid.nomega();
  const std::size_t half = grid.first_positive_mu();
  const double eps = grid.epsilon();
  const double dt = grid.dt();
  const auto tau = material.tau();
  const auto hs = material.h_star();
  const auto vel = material.velocity();
  const auto mu = grid.mu_nodes();

  const double tau_min = *std::min_element(tau.begin(), tau.end());
  if (dt > 0.5 * eps * eps * tau_min) {
    std::ostringstream os;
    os << "relaxation stability guard violated: dt = " << dt << " > 0.5 eps^2 tau_min = "
       << 0.5 * eps * eps * tau_min;
    throw SolverError(os.str());
  }

  // Courant numbers per (mu, omega) and relaxation factors per omega.
  std::vector<double> courant(nmu * nw);
  for (std::size_t i = 0; i < nmu; ++i) {
    for (std::size_t k = 0; k < nw; ++k) courant[i * nw + k] = dt * std::abs(mu[i]) * vel[k] / (eps * grid.dx());
  }
  std::vector<double> relax(nw);
  for (std::size_t k = 0; k < nw; ++k) relax[k] = dt / (eps * eps * tau[k]);
  const double hs_mean = mean_h_star(grid, material);

  DistributionField cur(grid);
  DistributionField next(grid);
  std::vector<double> inflow_buf((nmu - half) * nw, 0.0);

  observer(0, cur);
  for (std::size_t n = 0; n + 1 < grid.nt(); ++n) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const auto here = cur.slice(ix);
      const double coef = grid.mean_mu_omega(here) / hs_mean;
      auto out = next.slice(ix);
      // mu < 0: information travels from x + dx.
      if (ix + 1 < nx) {
        const auto right = cur.slice(ix + 1);
        for (std::size_t i = 0; i < half; ++i) {
          for (std::size_t k = 0; k < nw; ++k) {
            const std::size_t j = i * nw + k;
            out[j] = here[j] - courant[j] * (here[j] - right[j]) + relax[k] * (coef * hs[k] - here[j]);
          }
        }
      }
      // mu > 0: information travels from x - dx.
      if (ix > 0) {
        const auto left = cur.slice(ix - 1);
        for (std::size_t i = half; i < nmu; ++i) {
          for (std::size_t k = 0; k < nw; ++k) {
            const std::size_t j = i * nw + k;
            out[j] = here[j] - courant[j] * (here[j] - left[j]) + relax[k] * (coef * hs[k] - here[j]);
          }
        }
      }
    }

    // Inflow at x = 0 for mu > 0.
    std::fill(inflow_buf.begin(), inflow_buf.end(), 0.0);
    inflow(n + 1, inflow_buf);
    auto first = next.slice(0);
    std::copy(inflow_buf.begin(), inflow_buf.end(), first.begin() + static_cast<std::ptrdiff_t>(half * nw));

    // Specular reflection at x = 1: h(-mu) = h(mu).
    auto last = next.slice(nx - 1);
    for (std::size_t i = 0; i < half; ++i) {
      const std::size_t m = grid.mirror(i);
      for (std::size_t k = 0; k < nw; ++k) last[i * nw + k] = last[m * nw + k];
    }

    double check = 0.0;
    for (double v : next.values()) check += v;
    if (!std::isfinite(check)) {
      std::ostringstream os;
      os << "non-finite solution at step " << n + 1 << " (t = " << grid.t_nodes()[n + 1] << ")";
      throw SolverError(os.str());
    }
    std::swap(cur, next);
    observer(n + 1, cur);
  }
}

InflowFunction source_inflow(const PhaseGrid& grid, const MaterialModel& material, const BoundarySource& source) {
  source.validate();
  const std::size_t half = grid.first_positive_mu();
  const std::size_t nw = grid.nomega();
  // The source is separable; tabulate the mu and omega factors once.
  std::vector<double> mu_factor(grid.nmu() - half);
  for (std::size_t i = half; i < grid.nmu(); ++i) {
    mu_factor[i - half] = gaussian_bump(grid.mu_nodes()[i] - source.mu0, source.eps_mu);
  }
  std::vector<double> omega_factor(nw);
  for (std::size_t k = 0; k < nw; ++k) {
    omega_factor[k] = source.amplitude * gaussian_bump(grid.omega_nodes()[k] - source.omega0, source.eps_omega) /
                      material.tau()[k];
  }
  std::vector<double> times(grid.t_nodes().begin(), grid.t_nodes().end());
  return [=](std::size_t step, std::span<double> out) {
    const double ft = gaussian_bump(times[step] - source.t0, source.eps_t);
    for (std::size_t i = 0; i < mu_factor.size(); ++i) {
      for (std::size_t k = 0; k < nw; ++k) out[i * nw + k] = ft * mu_factor[i] * omega_factor[k];
    }
  };
}

Trajectory solve_forward(const PhaseGrid& grid, const MaterialModel& material, const InflowFunction& inflow) {
  Trajectory traj(grid.nt(), grid.nx(), grid.slice_size());
  integrate_kinetic(grid, material, inflow,
                    [&](std::size_t step, const DistributionField& f) { traj.store(step, f); });
  return traj;
}

Trajectory solve_forward(const PhaseGrid& grid, const MaterialModel& material, const BoundarySource& source) {
  return solve_forward(grid, material, source_inflow(grid, material, source));
}

InflowFunction adjoint_inflow(const PhaseGrid& grid, const MaterialModel& material, double mismatch,
                              const std::function<double(double)>& window) {
  const std::size_t half = grid.first_positive_mu();
  const std::size_t nw = grid.nomega();
  const double hs_mean = mean_h_star(grid, material);
  std::vector<double> base((grid.nmu() - half) * nw);
  for (std::size_t i = half; i < grid.nmu(); ++i) {
    const double m = std::abs(grid.mu_nodes()[i]);
    for (std::size_t k = 0; k < nw; ++k) {
      base[(i - half) * nw + k] =
          mismatch * material.h_star()[k] / (m * material.velocity()[k] * material.tau()[k] * hs_mean);
    }
  }
  std::vector<double> psi(grid.nt());
  for (std::size_t n = 0; n < grid.nt(); ++n) psi[n] = window(grid.t_nodes()[n]);
  const std::size_t last = grid.nt() - 1;
  return [base = std::move(base), psi = std::move(psi), last](std::size_t s_step, std::span<double> out) {
    const double w = psi[last - s_step];
    for (std::size_t j = 0; j < base.size(); ++j) out[j] = w * base[j];
  };
}

void unflip_directions(const PhaseGrid& grid, std::span<const double> flipped, std::span<double> out) {
  const std::size_t nw = grid.nomega();
  const std::size_t slice = grid.slice_size();
  const std::size_t nx = flipped.size() / slice;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t i = 0; i < grid.nmu(); ++i) {
      const std::size_t m = grid.mirror(i);
      for (std::size_t k = 0; k < nw; ++k) out[ix * slice + i * nw + k] = flipped[ix * slice + m * nw + k];
    }
  }
}

Trajectory solve_adjoint(const PhaseGrid& grid, const MaterialModel& material, double mismatch,
                         const std::function<double(double)>& window) {
  Trajectory traj(grid.nt(), grid.nx(), grid.slice_size());
  const std::size_t last = grid.nt() - 1;
  integrate_kinetic(grid, material, adjoint_inflow(grid, material, mismatch, window),
                    [&](std::size_t s_step, const DistributionField& f) {
                      unflip_directions(grid, f.values(), traj.snapshot(last - s_step));
                    });
  return traj;
}

void dump_trajectory_slice(const std::string& path, const PhaseGrid& grid, const Trajectory& traj,
                           std::size_t step) {
  CsvWriter out(path, {"x", "mu", "omega", "value"});
  for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
    const auto s = traj.slice(step, ix);
    for (std::size_t i = 0; i < grid.nmu(); ++i) {
      for (std::size_t k = 0; k < grid.nomega(); ++k) {
        out.row({grid.x_nodes()[ix], grid.mu_nodes()[i], grid.omega_nodes()[k], s[i * grid.nomega() + k]});
      }
    }
  }
}

}  // namespace phonon
