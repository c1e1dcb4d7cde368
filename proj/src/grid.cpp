#include "phonon/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phonon {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw GridError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::vector<double> trapezoid_weights(std::size_t n, double spacing) {
  std::vector<double> w(n, spacing);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

std::size_t uniform_count(double start, double end, double step) {
  const double ratio = (end - start) / step;
  return static_cast<std::size_t>(std::floor(ratio + 1e-9)) + 1;
}

namespace {

std::vector<double> uniform_nodes(double start, double end, double step, const char* name) {
  if (!(step > 0.0)) throw GridError(std::string("grid: spacing for ") + name + " must be positive");
  if (!(end > start)) throw GridError(std::string("grid: empty range for ") + name);
  const std::size_t n = uniform_count(start, end, step);
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = start + static_cast<double>(i) * step;
  return nodes;
}

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw GridError("average: axis length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
  return s;
}

double total(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

}  // namespace

PhaseGrid::PhaseGrid(const GridConfig& config, const std::function<double(double)>& speed)
    : config_(config) {
  if (config.n_mu < 2 || config.n_mu % 2 != 0) {
    throw GridError("grid: n_mu must be even and >= 2 (got " + std::to_string(config.n_mu) +
                    "); a mu=0 node breaks reflection pairing and upwinding");
  }
  if (!(config.epsilon > 0.0)) throw GridError("grid: epsilon must be positive");
  if (!(config.omega_min > 0.0)) throw GridError("grid: omega_min must be positive");

  t_ = uniform_nodes(0.0, config.t_end, config.dt, "t");
  x_ = uniform_nodes(0.0, config.x_end, config.dx, "x");
  omega_ = uniform_nodes(config.omega_min, config.omega_max, config.domega, "omega");
  if (x_.size() < 3) throw GridError("grid: need at least three x nodes");

  auto rule = gauss_legendre(config.n_mu);
  mu_ = std::move(rule.nodes);
  mu_weights_ = std::move(rule.weights);

  t_weights_ = trapezoid_weights(t_.size(), config.dt);
  x_weights_ = trapezoid_weights(x_.size(), config.dx);
  omega_weights_ = trapezoid_weights(omega_.size(), config.domega);

  double vmax = 0.0;
  for (double w : omega_) {
    const double v = speed(w);
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "grid: group velocity must be positive, v(" << w << ") = " << v;
      throw GridError(os.str());
    }
    vmax = std::max(vmax, v);
  }
  max_speed_ = std::abs(mu_.back()) * vmax / config.epsilon;
  const double cfl = config.dt * max_speed_ / config.dx;
  if (cfl > 1.0) {
    std::ostringstream os;
    os << "grid: CFL violated, dt * max|mu v|/epsilon / dx = " << cfl
       << " > 1 (max characteristic speed " << max_speed_ << ", dt " << config.dt << ", dx "
       << config.dx << ")";
    throw GridError(os.str());
  }
}

double PhaseGrid::mean_mu_omega(std::span<const double> slice) const {
  const std::size_t nw = omega_.size();
  if (slice.size() != mu_.size() * nw) throw GridError("mean_mu_omega: slice size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    double row = 0.0;
    const double* r = slice.data() + i * nw;
    for (std::size_t k = 0; k < nw; ++k) row += r[k] * omega_weights_[k];
    s += mu_weights_[i] * row;
  }
  return s / (2.0 * total(omega_weights_));
}

double PhaseGrid::mean_omega(std::span<const double> values) const {
  return weighted_sum(values, omega_weights_) / total(omega_weights_);
}

double PhaseGrid::mean_mu(std::span<const double> values) const {
  return weighted_sum(values, mu_weights_) / 2.0;
}

double PhaseGrid::half_mean_mu(std::span<const double> values, int sign) const {
  if (values.size() != mu_.size()) throw GridError("half_mean_mu: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    if ((sign > 0 && mu_[i] > 0.0) || (sign < 0 && mu_[i] < 0.0)) s += values[i] * mu_weights_[i];
  }
  return s;  // half measure is 1
}

double PhaseGrid::mean_t(std::span<const double> values) const {
  return weighted_sum(values, t_weights_) / total(t_weights_);
}

double PhaseGrid::mean_x(std::span<const double> values) const {
  return weighted_sum(values, x_weights_) / total(x_weights_);
}

double PhaseGrid::omega_inner(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != omega_.size() || b.size() != omega_.size()) {
    throw GridError("omega_inner: size mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += omega_weights_[k] * a[k] * b[k];
  return s;
}

std::size_t axis_length(const PhaseGrid& grid, Axis axis) {
  switch (axis) {
    case Axis::t: return grid.nt();
    case Axis::x: return grid.nx();
    case Axis::mu: return grid.nmu();
    case Axis::omega: return grid.nomega();
  }
  return 0;
}

namespace {

std::vector<double> normalized_weights(const PhaseGrid& grid, Axis axis) {
  std::span<const double> w;
  switch (axis) {
    case Axis::t: w = grid.t_weights(); break;
    case Axis::x: w = grid.x_weights(); break;
    case Axis::mu: w = grid.mu_weights(); break;
    case Axis::omega: w = grid.omega_weights(); break;
  }
  std::vector<double> out(w.begin(), w.end());
  const double s = total(out);
  for (double& v : out) v /= s;
  return out;
}

}  // namespace

AxisField average(const PhaseGrid& grid, const AxisField& field, std::initializer_list<Axis> over) {
  std::vector<std::size_t> dims;
  std::size_t expected = 1;
  for (Axis a : field.axes) {
    dims.push_back(axis_length(grid, a));
    expected *= dims.back();
  }
  if (expected != field.values.size()) throw GridError("average: field size does not match its axes");
  for (Axis a : over) {
    if (std::find(field.axes.begin(), field.axes.end(), a) == field.axes.end()) {
      throw GridError("average: requested axis is not an axis of the field");
    }
  }

  AxisField current = field;
  for (Axis a : over) {
    const auto pos = static_cast<std::size_t>(
        std::find(current.axes.begin(), current.axes.end(), a) - current.axes.begin());
    std::vector<std::size_t> cdims;
    for (Axis b : current.axes) cdims.push_back(axis_length(grid, b));
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < pos; ++i) outer *= cdims[i];
    for (std::size_t i = pos + 1; i < cdims.size(); ++i) inner *= cdims[i];
    const std::size_t n = cdims[pos];
    const auto w = normalized_weights(grid, a);

    AxisField reduced;
    reduced.axes = current.axes;
    reduced.axes.erase(reduced.axes.begin() + static_cast<std::ptrdiff_t>(pos));
    reduced.values.assign(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t k = 0; k < n; ++k) {
        const double* src = current.values.data() + (o * n + k) * inner;
        double* dst = reduced.values.data() + o * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += w[k] * src[i];
      }
    }
    current = std::move(reduced);
  }
  return current;
}

}  // namespace phonon
