#include "phonon/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phonon/csv.hpp"

namespace phonon {

double StochasticObjective::inner(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double StochasticObjective::norm(std::span<const double> a) const { return std::sqrt(inner(a, a)); }

double StochasticObjective::total_loss(std::span<const double> tau) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += loss(i, tau);
  return s / static_cast<double>(size());
}

std::vector<double> StochasticObjective::mean_gradient(std::span<const double> tau) const {
  std::vector<double> out(tau.size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    const auto s = sample(i, tau);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += s.gradient[k];
  }
  for (double& v : out) v /= static_cast<double>(size());
  return out;
}

std::string to_string(Method m) { return m == Method::armijo ? "armijo" : "adagrad"; }
std::string to_string(Sampling s) { return s == Sampling::iid ? "iid" : "epoch"; }

OptimizerState init_state(std::vector<double> tau0, const OptimizerSettings& settings) {
  OptimizerState state;
  const std::size_t d = tau0.size();
  state.tau = std::move(tau0);
  state.rng.seed(settings.seed);
  state.adagrad_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  return state;
}

std::size_t draw_index(OptimizerState& state, std::size_t count, Sampling sampling) {
  if (count == 0) throw OptimizerError("objective has no terms to sample");
  if (sampling == Sampling::iid) {
    std::uniform_int_distribution<std::size_t> pick(0, count - 1);
    return pick(state.rng);
  }
  if (state.epoch_order.size() != count || state.epoch_pos >= count) {
    state.epoch_order.resize(count);
    for (std::size_t i = 0; i < count; ++i) state.epoch_order[i] = i;
    std::shuffle(state.epoch_order.begin(), state.epoch_order.end(), state.rng);
    state.epoch_pos = 0;
  }
  return state.epoch_order[state.epoch_pos++];
}

namespace {

bool clamp_into(std::vector<double>& tau, const OptimizerSettings& b) {
  bool hit = false;
  for (double& v : tau) {
    if (v < b.tau_min || v > b.tau_max) {
      hit = true;
      v = std::clamp(v, b.tau_min, b.tau_max);
    }
  }
  return hit;
}

void check_finite(std::span<const double> g, const char* what) {
  for (double v : g) {
    if (!std::isfinite(v)) throw OptimizerError(std::string("non-finite ") + what);
  }
}

}  // namespace

StepResult sgd_step_armijo(OptimizerState& state, const StochasticObjective& objective, std::size_t xi, double c,
                           double alpha_max, const OptimizerSettings& bounds) {
  if (!(c > 0.0 && c < 1.0)) throw OptimizerError("Armijo constant must lie in (0, 1)");
  if (!(alpha_max > 0.0)) throw OptimizerError("alpha_max must be positive");
  const ObjectiveSample s = objective.sample(xi, state.tau);
  check_finite(s.gradient, "gradient");
  const double g2 = objective.inner(s.gradient, s.gradient);

  StepResult r;
  r.xi = xi;
  r.loss_before = s.loss;
  r.grad_norm = std::sqrt(g2);

  const double alpha_min = alpha_max * std::ldexp(1.0, -30);
  std::vector<double> trial(state.tau.size());
  for (double alpha = alpha_max; alpha >= alpha_min; alpha *= 0.5) {
    for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = state.tau[k] - alpha * s.gradient[k];
    const bool clamped = clamp_into(trial, bounds);
    const double f = objective.loss(xi, trial);
    if (f <= s.loss - c * alpha * g2) {
      r.alpha = alpha;
      r.loss_trial = f;
      r.clamped = clamped;
      state.tau = trial;
      if (clamped) ++state.clamp_events;
      return r;
    }
  }
  r.accepted = false;
  r.loss_trial = s.loss;
  ++state.skipped_steps;
  return r;
}

Eigen::VectorXd adagrad_direction(const Eigen::MatrixXd& G, double delta, const Eigen::VectorXd& g) {
  if (!G.allFinite()) throw OptimizerError("AdaGrad matrix contains non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  if (eig.info() != Eigen::Success) throw OptimizerError("AdaGrad eigendecomposition failed");
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd scale = (lam.array() + delta).rsqrt();
  const Eigen::MatrixXd& V = eig.eigenvectors();
  return V * scale.asDiagonal() * (V.transpose() * g);
}

StepResult sgd_step_adagrad(OptimizerState& state, const StochasticObjective& objective, std::size_t xi, double alpha,
                            double delta, const OptimizerSettings& bounds) {
  if (!(delta > 0.0)) throw OptimizerError("AdaGrad delta must be positive");
  if (!(alpha > 0.0)) throw OptimizerError("AdaGrad alpha must be positive");
  const ObjectiveSample s = objective.sample(xi, state.tau);
  check_finite(s.gradient, "gradient");
  const Eigen::Map<const Eigen::VectorXd> g(s.gradient.data(), static_cast<Eigen::Index>(s.gradient.size()));

  StepResult r;
  r.xi = xi;
  r.alpha = alpha;
  r.loss_before = s.loss;
  r.grad_norm = objective.norm(s.gradient);

  state.adagrad_matrix += g * g.transpose();
  const Eigen::VectorXd d = adagrad_direction(state.adagrad_matrix, delta, g);
  for (std::size_t k = 0; k < state.tau.size(); ++k) state.tau[k] -= alpha * d(static_cast<Eigen::Index>(k));
  r.clamped = clamp_into(state.tau, bounds);
  if (r.clamped) ++state.clamp_events;
  r.loss_trial = objective.loss(xi, state.tau);
  return r;
}

double reconstruction_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw OptimizerError("reconstruction_error: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

OptimizerState run_optimizer(const StochasticObjective& objective, std::vector<double> tau0,
                             std::span<const double> tau_star, const OptimizerSettings& settings,
                             const IterationCallback& callback) {
  if (settings.iterations < 0) throw OptimizerError("iteration budget must be nonnegative");
  OptimizerState state = init_state(std::move(tau0), settings);
  auto error_of = [&](const std::vector<double>& tau) {
    return tau_star.empty() ? std::numeric_limits<double>::quiet_NaN() : reconstruction_error(tau, tau_star);
  };

  HistoryRow first;
  first.loss_total = objective.total_loss(state.tau);
  first.loss_sampled = std::numeric_limits<double>::quiet_NaN();
  first.grad_norm = std::numeric_limits<double>::quiet_NaN();
  first.error_e = error_of(state.tau);
  state.history.push_back(first);
  if (callback) callback(state);

  for (int n = 1; n <= settings.iterations; ++n) {
    const std::size_t xi = draw_index(state, objective.size(), settings.sampling);
    const StepResult r = settings.method == Method::armijo
                             ? sgd_step_armijo(state, objective, xi, settings.armijo_c, settings.alpha_max, settings)
                             : sgd_step_adagrad(state, objective, xi, settings.adagrad_alpha,
                                                settings.adagrad_delta, settings);
    state.n = n;
    HistoryRow row;
    row.n = n;
    row.xi = static_cast<int>(r.xi);
    row.alpha = r.accepted ? r.alpha : 0.0;
    row.loss_total = objective.total_loss(state.tau);
    row.loss_sampled = r.loss_before;
    row.loss_trial = r.loss_trial;
    row.error_e = error_of(state.tau);
    row.grad_norm = r.grad_norm;
    row.accepted = r.accepted;
    row.clamped = r.clamped;
    state.history.push_back(row);
    if (callback) callback(state);
    if (settings.grad_tol > 0.0 && r.grad_norm < settings.grad_tol) break;
  }
  return state;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
  CsvWriter out(path, {"n", "xi", "alpha", "loss_total", "loss_sampled", "error_e", "grad_norm"});
  for (const auto& r : history) {
    out.row({static_cast<double>(r.n), static_cast<double>(r.xi), r.alpha, r.loss_total, r.loss_sampled, r.error_e,
             r.grad_norm});
  }
}

GradientGeometry gradient_geometry(const std::vector<std::vector<double>>& gradients, std::span<const double> weights) {
  const std::size_t n = gradients.size();
  if (n < 2) throw OptimizerError("gradient_geometry needs at least two gradients");
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += weights[k] * a[k] * b[k];
    return s;
  };
  GradientGeometry geo;
  geo.norms.resize(n);
  geo.masked.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (gradients[i].size() != weights.size()) throw OptimizerError("gradient length does not match the grid");
    geo.norms[i] = std::sqrt(dot(gradients[i], gradients[i]));
    geo.masked[i] = !(geo.norms[i] > 0.0);
  }
  const auto nn = static_cast<Eigen::Index>(n);
  geo.cosine = Eigen::MatrixXd::Constant(nn, nn, std::numeric_limits<double>::quiet_NaN());
  geo.min_cosine = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (geo.masked[i] || geo.masked[j]) continue;
      const double c = dot(gradients[i], gradients[j]) / (geo.norms[i] * geo.norms[j]);
      geo.cosine(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
      if (i != j) geo.min_cosine = std::min(geo.min_cosine, c);
    }
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (geo.masked[i]) continue;
    lo = std::min(lo, geo.norms[i]);
    hi = std::max(hi, geo.norms[i]);
  }
  geo.norm_spread = hi / lo;
  return geo;
}

std::vector<std::vector<double>> recombine_gradients(const std::vector<std::vector<double>>& gradients,
                                                     const Eigen::MatrixXd& A) {
  const std::size_t n = gradients.size();
  if (n < 2) throw OptimizerError("recombination needs at least two gradients");
  if (A.rows() != static_cast<Eigen::Index>(n) || A.cols() != static_cast<Eigen::Index>(n)) {
    throw OptimizerError("recombination matrix has the wrong shape");
  }
  std::vector<std::vector<double>> out(n, std::vector<double>(gradients[0].size(), 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      for (std::size_t k = 0; k < out[j].size(); ++k) out[j][k] += a * gradients[i][k];
    }
  }
  return out;
}

std::vector<std::vector<double>> recombine_gradients(const std::vector<std::vector<double>>& gradients,
                                                     std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(gradients.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = u(rng);
  }
  return recombine_gradients(gradients, A);
}

}  // namespace phonon
