#include "phonon/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phonon/csv.hpp"

namespace phonon {

double heat_flux(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> g_slice) {
  const std::size_t nw = grid.nomega();
  const auto mu = grid.mu_nodes();
  const auto v = material.velocity();
  std::vector<double> m(g_slice.size());
  for (std::size_t i = 0; i < grid.nmu(); ++i) {
    for (std::size_t k = 0; k < nw; ++k) m[i * nw + k] = mu[i] * v[k] * g_slice[i * nw + k];
  }
  return grid.mean_mu_omega(m) / grid.epsilon();
}

MacroTrace run_macro(const PhaseGrid& grid, const MaterialModel& material, const InflowFunction& inflow,
                     const StepObserver& also) {
  MacroTrace tr;
  tr.t.assign(grid.t_nodes().begin(), grid.t_nodes().end());
  tr.x.assign(grid.x_nodes().begin(), grid.x_nodes().end());
  const std::size_t nx = grid.nx();
  tr.q.assign(tr.nt() * nx, 0.0);
  tr.T.assign(tr.nt() * nx, 0.0);
  const std::size_t nw = grid.nomega();
  const auto tau = material.tau();
  std::vector<double> g(grid.slice_size());
  integrate_kinetic(grid, material, inflow, [&](std::size_t n, const DistributionField& h) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const auto s = h.slice(ix);
      for (std::size_t j = 0; j < s.size(); ++j) g[j] = tau[j % nw] * s[j];
      tr.q[tr.at(n, ix)] = heat_flux(grid, material, g);
      tr.T[tr.at(n, ix)] = temperature(grid, material, s);
    }
    if (also) also(n, h);
  });
  fill_gradient(tr);
  pointwise_kappa(tr);
  return tr;
}

namespace {

void derivative(std::span<const double> u, double dx, std::span<double> out) {
  const std::size_t n = u.size();
  if (n < 3) throw DiagnosticsError("derivative needs at least three nodes");
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
  out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
  out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
}

}  // namespace

void fill_gradient(MacroTrace& tr) {
  const std::size_t nx = tr.nx();
  const double dx = tr.x[1] - tr.x[0];
  tr.dT_dx.assign(tr.T.size(), 0.0);
  for (std::size_t n = 0; n < tr.nt(); ++n) {
    derivative(std::span<const double>(tr.T).subspan(n * nx, nx), dx, std::span<double>(tr.dT_dx).subspan(n * nx, nx));
  }
}

void pointwise_kappa(MacroTrace& tr, double floor_ratio) {
  double tmax = 0.0;
  for (double v : tr.T) tmax = std::max(tmax, std::abs(v));
  const double floor = floor_ratio * tmax;
  tr.kappa.assign(tr.T.size(), std::nan(""));
  tr.kappa_defined.assign(tr.T.size(), 0);
  for (std::size_t j = 0; j < tr.T.size(); ++j) {
    if (std::abs(tr.dT_dx[j]) >= floor && std::abs(tr.dT_dx[j]) > 0.0) {
      tr.kappa[j] = -tr.q[j] / tr.dT_dx[j];
      tr.kappa_defined[j] = 1;
    }
  }
}

void write_macro_csv(const std::string& path, const MacroTrace& tr) {
  CsvWriter out(path, {"t", "x", "q", "T", "dT_dx", "kappa", "kappa_defined"});
  for (std::size_t n = 0; n < tr.nt(); ++n) {
    for (std::size_t ix = 0; ix < tr.nx(); ++ix) {
      const std::size_t j = tr.at(n, ix);
      out.row({tr.t[n], tr.x[ix], tr.q[j], tr.T[j], tr.dT_dx[j], tr.kappa[j], static_cast<double>(tr.kappa_defined[j])});
    }
  }
}

double bulk_kappa(const PhaseGrid& grid, const MaterialModel& material) {
  std::vector<double> f(material.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = material.tau()[k] * material.velocity()[k] * material.velocity()[k] * material.g_star()[k];
  }
  return grid.mean_omega(f) / 3.0;
}

double accumulation_kappa(const PhaseGrid& grid, const MaterialModel& material, double omega_lo, double omega_hi) {
  const auto w = grid.omega_nodes();
  const double tol = 1e-12 * std::max(1.0, std::abs(w.back()));
  if (omega_hi < omega_lo) throw DiagnosticsError("accumulation window is inverted");
  if (omega_lo < w.front() - tol || omega_hi > w.back() + tol) {
    throw DiagnosticsError("accumulation window leaves the frequency grid");
  }
  std::vector<double> f(w.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = material.tau()[k] * material.velocity()[k] * material.velocity()[k] * material.g_star()[k];
  }
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const double a = std::max(omega_lo, w[k]);
    const double b = std::min(omega_hi, w[k + 1]);
    if (b <= a) continue;
    const double slope = (f[k + 1] - f[k]) / (w[k + 1] - w[k]);
    const double fa = f[k] + slope * (a - w[k]);
    const double fb = f[k] + slope * (b - w[k]);
    s += 0.5 * (fa + fb) * (b - a);
  }
  return s / (3.0 * grid.omega_range());
}

double grey_kappa(double heat_capacity, double velocity, double tau) {
  return heat_capacity * velocity * velocity * tau / 3.0;
}

KappaSettling kappa_settling(const MacroTrace& tr, double x_probe, double t_from) {
  std::size_t ix = 0;
  for (std::size_t j = 1; j < tr.nx(); ++j) {
    if (std::abs(tr.x[j] - x_probe) < std::abs(tr.x[ix] - x_probe)) ix = j;
  }
  KappaSettling s;
  s.defined = true;
  double lo = 0.0, hi = 0.0, sum = 0.0;
  for (std::size_t n = 0; n < tr.nt(); ++n) {
    if (tr.t[n] < t_from - 1e-12) continue;
    const std::size_t j = tr.at(n, ix);
    if (!tr.kappa_defined[j]) {
      s.defined = false;
      continue;
    }
    const double k = tr.kappa[j];
    if (s.samples == 0) lo = hi = k;
    lo = std::min(lo, k);
    hi = std::max(hi, k);
    sum += k;
    ++s.samples;
  }
  if (s.samples == 0) {
    s.defined = false;
    return s;
  }
  s.value = sum / static_cast<double>(s.samples);
  s.drift = (hi - lo) / std::abs(s.value);
  return s;
}

std::vector<std::vector<double>> solve_heat_reference(double diffusivity, std::span<const double> initial_u,
                                                      double dx, double dt, std::size_t steps,
                                                      const std::function<double(std::size_t)>& left_trace) {
  if (!(diffusivity > 0.0) || !(dx > 0.0) || !(dt > 0.0)) {
    throw DiagnosticsError("heat reference needs positive diffusivity, dx and dt");
  }
  if (dt > dx * dx / (2.0 * diffusivity)) {
    std::ostringstream os;
    os << "heat reference: dt = " << dt << " exceeds the explicit limit dx^2/(2D) = " << dx * dx / (2.0 * diffusivity);
    throw DiagnosticsError(os.str());
  }
  const std::size_t n = initial_u.size();
  if (n < 2) throw DiagnosticsError("heat reference needs at least two nodes");
  const double r = diffusivity * dt / (dx * dx);
  std::vector<std::vector<double>> rows;
  rows.reserve(steps + 1);
  rows.emplace_back(initial_u.begin(), initial_u.end());
  std::vector<double> next(n);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto& u = rows.back();
    for (std::size_t i = 1; i + 1 < n; ++i) next[i] = u[i] + r * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
    next[n - 1] = u[n - 1] + 2.0 * r * (u[n - 2] - u[n - 1]);
    next[0] = left_trace ? left_trace(s + 1) : u[0] + 2.0 * r * (u[1] - u[0]);
    rows.push_back(next);
  }
  return rows;
}

double heat_comparison(const MacroTrace& tr, double diffusivity, double t_seed) {
  const std::size_t nx = tr.nx();
  std::size_t n0 = 0;
  while (n0 < tr.nt() && tr.t[n0] < t_seed - 1e-12) ++n0;
  if (n0 + 1 >= tr.nt()) throw DiagnosticsError("heat_comparison: seed time is past the end of the trace");
  const double dx = tr.x[1] - tr.x[0];
  const double dt_trace = tr.t[1] - tr.t[0];
  const auto sub = static_cast<std::size_t>(std::ceil(dt_trace / (0.45 * dx * dx / diffusivity)));
  const double dt = dt_trace / static_cast<double>(sub);
  const std::size_t steps = (tr.nt() - 1 - n0) * sub;
  std::vector<double> seed(tr.T.begin() + static_cast<std::ptrdiff_t>(tr.at(n0, 0)),
                           tr.T.begin() + static_cast<std::ptrdiff_t>(tr.at(n0, 0) + nx));
  auto left = [&](std::size_t s) {
    const std::size_t a = n0 + s / sub;
    const double f = static_cast<double>(s % sub) / static_cast<double>(sub);
    const double ta = tr.T[tr.at(a, 0)];
    return f == 0.0 ? ta : (1.0 - f) * ta + f * tr.T[tr.at(a + 1, 0)];
  };
  const auto u = solve_heat_reference(diffusivity, seed, dx, dt, steps, left);
  double num = 0.0, den = 0.0;
  for (std::size_t n = n0; n < tr.nt(); ++n) {
    const auto& row = u[(n - n0) * sub];
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double k = tr.T[tr.at(n, ix)];
      num += (k - row[ix]) * (k - row[ix]);
      den += k * k;
    }
  }
  return std::sqrt(num / den);
}

std::vector<double> to_g(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> h) {
  const std::size_t nw = grid.nomega();
  std::vector<double> g(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) g[j] = material.tau()[j % nw] * h[j];
  return g;
}

double chapman_enskog_residual(const PhaseGrid& grid, const MaterialModel& material, std::span<const double> g) {
  const std::size_t nx = grid.nx();
  const std::size_t nw = grid.nomega();
  const std::size_t slice = grid.slice_size();
  if (g.size() != nx * slice) throw DiagnosticsError("chapman_enskog_residual: field size mismatch");
  const auto tau = material.tau();
  const auto gs = material.g_star();
  const auto v = material.velocity();
  const auto mu = grid.mu_nodes();
  const double eps = grid.epsilon();

  // u = T = <g/tau> / <g*/tau>.
  std::vector<double> u(nx), ux(nx), h(slice);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t j = 0; j < slice; ++j) h[j] = g[ix * slice + j] / tau[j % nw];
    u[ix] = temperature(grid, material, h);
  }
  derivative(u, grid.dx(), ux);

  std::vector<double> r2(nx), g2(nx), a(slice), b(slice);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t i = 0; i < grid.nmu(); ++i) {
      for (std::size_t k = 0; k < nw; ++k) {
        const std::size_t j = i * nw + k;
        const double model = gs[k] * u[ix] - eps * mu[i] * v[k] * tau[k] * gs[k] * ux[ix];
        const double gv = g[ix * slice + j];
        a[j] = (gv - model) * (gv - model);
        b[j] = gv * gv;
      }
    }
    r2[ix] = grid.mean_mu_omega(a);
    g2[ix] = grid.mean_mu_omega(b);
  }
  const double den = grid.mean_x(g2);
  if (!(den > 0.0)) throw DiagnosticsError("chapman_enskog_residual: zero field");
  return std::sqrt(grid.mean_x(r2) / den);
}

}  // namespace phonon
