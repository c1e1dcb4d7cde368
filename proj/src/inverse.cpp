#include "phonon/inverse.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "phonon/collision.hpp"
#include "phonon/csv.hpp"

namespace phonon {

double SourceTestPair::window(double t) const { return gaussian_bump(t - t_R, eps_window); }

void SourceTestPair::validate(double horizon) const {
  source.validate();
  if (!(eps_window > 0.0)) throw InverseError("test window width must be positive");
  if (t_R + 3.0 * eps_window > horizon + 1e-12) {
    std::ostringstream os;
    os << "test window centered at t_R = " << t_R << " with width " << eps_window
       << " does not fit in the horizon T = " << horizon;
    throw InverseError(os.str());
  }
}

double arrival_time(double t0, double mu0, double omega0, const LinearVelocity& velocity) {
  if (!(mu0 > 0.0)) throw InverseError("arrival_time needs mu0 > 0");
  const double v = velocity(omega0);
  if (!(v > 0.0)) throw InverseError("arrival_time needs a positive group velocity");
  return t0 + 2.0 / (mu0 * v);
}

std::vector<SourceTestPair> build_pairs(const PhaseGrid& grid, const LinearVelocity& velocity,
                                        const PairFamily& family) {
  std::vector<double> omegas = family.omegas;
  if (omegas.empty()) omegas.assign(grid.omega_nodes().begin(), grid.omega_nodes().end());
  std::vector<SourceTestPair> pairs;
  for (double w : omegas) {
    SourceTestPair p;
    p.source.t0 = family.t0;
    p.source.mu0 = family.mu0;
    p.source.omega0 = w;
    p.source.eps_t = family.eps_t;
    p.source.eps_mu = family.eps_mu;
    p.source.eps_omega = family.eps_omega;
    p.t_R = arrival_time(family.t0, family.mu0, w, velocity);
    p.eps_window = family.eps_window;
    p.validate(grid.t_nodes().back());
    pairs.push_back(p);
  }
  return pairs;
}

std::vector<double> boundary_temperature(const PhaseGrid& grid, const MaterialModel& material,
                                         const BoundarySource& source) {
  std::vector<double> trace(grid.nt(), 0.0);
  integrate_kinetic(grid, material, source_inflow(grid, material, source),
                    [&](std::size_t n, const DistributionField& f) { trace[n] = temperature(grid, material, f.slice(0)); });
  return trace;
}

namespace {

double window_mean(const PhaseGrid& grid, const SourceTestPair& pair, std::span<const double> trace) {
  std::vector<double> prod(grid.nt());
  for (std::size_t n = 0; n < grid.nt(); ++n) prod[n] = trace[n] * pair.window(grid.t_nodes()[n]);
  return grid.mean_t(prod);
}

double require_datum(const SourceTestPair& pair) {
  if (!pair.datum) throw InverseError("pair has no recorded datum; run generate-data first");
  return *pair.datum;
}

}  // namespace

double forward_map(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair) {
  pair.validate(grid.t_nodes().back());
  return window_mean(grid, pair, boundary_temperature(grid, material, pair.source));
}

void generate_data(const PhaseGrid& grid, const MaterialModel& truth, std::vector<SourceTestPair>& pairs) {
  for (auto& p : pairs) p.datum = forward_map(grid, truth, p);
}

void write_data_csv(const std::string& path, const std::vector<SourceTestPair>& pairs) {
  CsvWriter out(path, {"pair_id", "t0", "mu0", "omega0", "eps1", "eps2", "eps3", "tR", "eps4", "datum"});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    out.row({static_cast<double>(i), p.source.t0, p.source.mu0, p.source.omega0, p.source.eps_t, p.source.eps_mu,
             p.source.eps_omega, p.t_R, p.eps_window, p.datum ? *p.datum : std::nan("")});
  }
}

std::vector<SourceTestPair> read_data_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  std::vector<SourceTestPair> pairs;
  for (const auto& r : t.rows) {
    SourceTestPair p;
    p.source.t0 = r[t.column("t0")];
    p.source.mu0 = r[t.column("mu0")];
    p.source.omega0 = r[t.column("omega0")];
    p.source.eps_t = r[t.column("eps1")];
    p.source.eps_mu = r[t.column("eps2")];
    p.source.eps_omega = r[t.column("eps3")];
    p.t_R = r[t.column("tR")];
    p.eps_window = r[t.column("eps4")];
    const double d = r[t.column("datum")];
    if (!std::isnan(d)) p.datum = d;
    pairs.push_back(p);
  }
  return pairs;
}

LossValue loss(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair) {
  const double d = require_datum(pair);
  LossValue v;
  v.mismatch = forward_map(grid, material, pair) - d;
  v.loss = 0.5 * v.mismatch * v.mismatch;
  return v;
}

GradientResult frechet_gradient(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair) {
  const double d = require_datum(pair);
  pair.validate(grid.t_nodes().back());

  const std::size_t nt = grid.nt();
  const std::size_t nx = grid.nx();
  const std::size_t nmu = grid.nmu();
  const std::size_t nw = grid.nomega();
  const std::size_t half = grid.first_positive_mu();
  const auto mu = grid.mu_nodes();
  const auto wmu = grid.mu_weights();
  const auto wt = grid.t_weights();
  const auto wx = grid.x_weights();
  const auto tau = material.tau();
  const auto hs = material.h_star();
  const auto vel = material.velocity();

  // Plain integral over (mu, omega) of one slice.
  const std::vector<double> ones(nw, 1.0);
  auto plain = [&](std::span<const double> s) { return 2.0 * grid.omega_range() * grid.mean_mu_omega(s); };
  const double Ihs = 2.0 * grid.omega_inner(hs, ones);
  const double T_f = grid.time_horizon();

  const Trajectory h = solve_forward(grid, material, pair.source);
  std::vector<double> Ih0(nt), psi(nt);
  for (std::size_t n = 0; n < nt; ++n) {
    Ih0[n] = plain(h.slice(n, 0));
    psi[n] = pair.window(grid.t_nodes()[n]);
  }
  std::vector<double> trace(nt);
  for (std::size_t n = 0; n < nt; ++n) trace[n] = temperature(grid, material, h.slice(n, 0));
  const double lambda = window_mean(grid, pair, trace);

  GradientResult out;
  out.value.mismatch = lambda - d;
  out.value.loss = 0.5 * out.value.mismatch * out.value.mismatch;
  const double l = out.value.mismatch;
  out.gradient.assign(nw, 0.0);
  if (l == 0.0) return out;

  // phi(t, mu, omega) on the inflow directions, separable.
  const BoundarySource& src = pair.source;
  std::vector<double> phi_t(nt), phi_mu(nmu, 0.0), phi_w(nw);
  for (std::size_t n = 0; n < nt; ++n) phi_t[n] = src.amplitude * gaussian_bump(grid.t_nodes()[n] - src.t0, src.eps_t);
  for (std::size_t i = half; i < nmu; ++i) phi_mu[i] = gaussian_bump(mu[i] - src.mu0, src.eps_mu);
  for (std::size_t k = 0; k < nw; ++k) phi_w[k] = gaussian_bump(grid.omega_nodes()[k] - src.omega0, src.eps_omega);

  std::vector<double> A(nw, 0.0), B(nw, 0.0), C(nw, 0.0), D1(nw, 0.0), D2(nw, 0.0), D3(nw, 0.0);

  // Inflow perturbation seen directly by the measurement, and the change of
  // the normalization <h*>.
  double phi_mu_sum = 0.0;
  for (std::size_t i = half; i < nmu; ++i) phi_mu_sum += wmu[i] * phi_mu[i];
  double psi_phi = 0.0, psi_Ih = 0.0;
  for (std::size_t n = 0; n < nt; ++n) {
    psi_phi += wt[n] * psi[n] * phi_t[n];
    psi_Ih += wt[n] * psi[n] * Ih0[n];
  }
  for (std::size_t k = 0; k < nw; ++k) {
    A[k] = -l / (T_f * Ihs) * psi_phi * phi_mu_sum * phi_w[k] / tau[k];
    C[k] = 2.0 * l * hs[k] * psi_Ih / (T_f * Ihs * Ihs);
  }

  // Interior and boundary pairings with the adjoint, accumulated while the
  // adjoint is integrated backwards (s = T - t, directions mirrored).
  const double c = 1.0 / (2.0 * grid.omega_range() * T_f);
  std::vector<double> p_mu(nw), ph_mu(nw);
  integrate_kinetic(
      grid, material, adjoint_inflow(grid, material, l, [&](double t) { return pair.window(t); }),
      [&](std::size_t s_step, const DistributionField& p) {
        const std::size_t n = nt - 1 - s_step;
        if (wt[n] == 0.0) return;
        // Boundary x = 0, physical mu > 0 is flipped index mirror(i) < half.
        {
          const auto ps = p.slice(0);
          for (std::size_t i = half; i < nmu; ++i) {
            const std::size_t m = grid.mirror(i);
            for (std::size_t k = 0; k < nw; ++k) {
              B[k] -= c * wt[n] * wmu[i] * mu[i] * vel[k] * ps[m * nw + k] * phi_t[n] * phi_mu[i] * phi_w[k] / hs[k];
            }
          }
        }
        for (std::size_t ix = 0; ix < nx; ++ix) {
          const auto ps = p.slice(ix);
          const auto hsl = h.slice(n, ix);
          std::fill(p_mu.begin(), p_mu.end(), 0.0);
          std::fill(ph_mu.begin(), ph_mu.end(), 0.0);
          for (std::size_t i = 0; i < nmu; ++i) {
            const std::size_t m = grid.mirror(i);
            for (std::size_t k = 0; k < nw; ++k) {
              const double pv = ps[m * nw + k];
              p_mu[k] += wmu[i] * pv;
              ph_mu[k] += wmu[i] * pv * hsl[i * nw + k];
            }
          }
          const double Ih = plain(hsl);
          const double Ip = grid.omega_inner(p_mu, ones);
          const double w = c * wt[n] * wx[ix];
          for (std::size_t k = 0; k < nw; ++k) {
            D1[k] += w * ph_mu[k] / hs[k];
            D2[k] -= 2.0 * w * Ih / Ihs * p_mu[k];
            D3[k] += 2.0 * w * hs[k] * Ih * Ip / (Ihs * Ihs);
          }
        }
      });

  for (std::size_t k = 0; k < nw; ++k) {
    out.gradient[k] = (A[k] + B[k] + C[k] + D1[k] + D2[k] + D3[k]) / tau[k];
    if (!std::isfinite(out.gradient[k])) throw InverseError("non-finite gradient entry");
  }
  return out;
}

double fd_directional(const std::function<double(std::span<const double>)>& f, std::span<const double> tau,
                      std::span<const double> direction, double step) {
  if (!(step > 0.0)) throw InverseError("finite-difference step must be positive");
  std::vector<double> plus(tau.begin(), tau.end()), minus(tau.begin(), tau.end());
  for (std::size_t k = 0; k < tau.size(); ++k) {
    plus[k] += step * direction[k];
    minus[k] -= step * direction[k];
  }
  return (f(plus) - f(minus)) / (2.0 * step);
}

double fd_gradient_oracle(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair,
                          std::span<const double> direction, double step) {
  auto f = [&](std::span<const double> tau) {
    return loss(grid, material.with_tau(std::vector<double>(tau.begin(), tau.end())), pair).loss;
  };
  return fd_directional(f, material.tau(), direction, step);
}

LipschitzReport lipschitz_probe(const PhaseGrid& grid, const MaterialModel& material, const SourceTestPair& pair,
                                int trials, double scale, std::uint64_t seed) {
  if (trials <= 0 || !(scale > 0.0)) throw InverseError("lipschitz_probe needs trials > 0 and scale > 0");
  const auto base = frechet_gradient(grid, material, pair).gradient;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LipschitzReport rep;
  const auto& b = material.bounds();
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> d(material.size()), tau(material.tau().begin(), material.tau().end());
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = scale * u(rng);
      tau[k] += d[k];
      if (tau[k] < b.tau_min || tau[k] > b.tau_max) {
        std::ostringstream os;
        os << "lipschitz_probe draw " << trial << " leaves the tau bounds at node " << k;
        throw InverseError(os.str());
      }
    }
    const double dn = std::sqrt(grid.omega_inner(d, d));
    if (!(dn > 0.0)) continue;
    const auto g = frechet_gradient(grid, material.with_tau(tau), pair).gradient;
    std::vector<double> diff(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) diff[k] = g[k] - base[k];
    const double r = std::sqrt(grid.omega_inner(diff, diff)) / dn;
    rep.ratios.push_back(r);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  return rep;
}

PairObjective::PairObjective(const PhaseGrid& grid, MaterialModel base, std::vector<SourceTestPair> pairs)
    : grid_(grid), base_(std::move(base)), pairs_(std::move(pairs)) {
  for (const auto& p : pairs_) {
    require_datum(p);
    p.validate(grid_.t_nodes().back());
  }
}

MaterialModel PairObjective::material_for(std::span<const double> tau) const {
  return base_.with_tau(std::vector<double>(tau.begin(), tau.end()));
}

double PairObjective::loss(std::size_t i, std::span<const double> tau) const {
  return phonon::loss(grid_, material_for(tau), pairs_.at(i)).loss;
}

ObjectiveSample PairObjective::sample(std::size_t i, std::span<const double> tau) const {
  auto r = frechet_gradient(grid_, material_for(tau), pairs_.at(i));
  return {r.value.loss, std::move(r.gradient)};
}

double PairObjective::inner(std::span<const double> a, std::span<const double> b) const {
  return grid_.omega_inner(a, b);
}

}  // namespace phonon
