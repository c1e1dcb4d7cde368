#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace phonon {

class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ObjectiveSample {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// f(tau) = (1/N) sum_i f_i(tau). The PDE objective and the synthetic test
/// losses both implement this.
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual std::size_t size() const = 0;
  virtual double loss(std::size_t i, std::span<const double> tau) const = 0;
  virtual ObjectiveSample sample(std::size_t i, std::span<const double> tau) const = 0;

  /// Inner product in which gradients are expressed. Euclidean unless the
  /// objective knows better (the PDE gradient is a density in omega).
  virtual double inner(std::span<const double> a, std::span<const double> b) const;

  double norm(std::span<const double> a) const;
  double total_loss(std::span<const double> tau) const;
  std::vector<double> mean_gradient(std::span<const double> tau) const;
};

enum class Method { armijo, adagrad };
enum class Sampling { iid, epoch };

std::string to_string(Method m);
std::string to_string(Sampling s);

struct OptimizerSettings {
  Method method = Method::armijo;
  int iterations = 500;
  std::uint64_t seed = 20240501;
  double armijo_c = 1e-4;
  double alpha_max = 1.0;
  double adagrad_alpha = 0.5;
  double adagrad_delta = 1e-8;
  double grad_tol = 0.0;
  Sampling sampling = Sampling::iid;
  double tau_min = 0.1;
  double tau_max = 10.0;
};

struct HistoryRow {
  int n = 0;
  int xi = -1;
  double alpha = 0.0;
  double loss_total = 0.0;
  double loss_sampled = 0.0;
  double error_e = 0.0;
  double grad_norm = 0.0;
  // Not exported; kept so the sufficient-decrease test can be recomputed.
  double loss_trial = 0.0;
  bool accepted = true;
  bool clamped = false;
};

struct OptimizerState {
  std::vector<double> tau;
  int n = 0;
  std::mt19937_64 rng;
  Eigen::MatrixXd adagrad_matrix;
  std::vector<HistoryRow> history;
  std::vector<std::size_t> epoch_order;
  std::size_t epoch_pos = 0;
  int skipped_steps = 0;
  int clamp_events = 0;
};

OptimizerState init_state(std::vector<double> tau0, const OptimizerSettings& settings);

/// Draws xi uniformly from {0..N-1}: with replacement, or from a shuffled
/// epoch when `sampling` is epoch.
std::size_t draw_index(OptimizerState& state, std::size_t count, Sampling sampling);

struct StepResult {
  std::size_t xi = 0;
  double alpha = 0.0;
  double loss_before = 0.0;
  double loss_trial = 0.0;
  double grad_norm = 0.0;
  bool accepted = true;
  bool clamped = false;
};

/// One SGD step with Armijo backtracking: alpha = alpha_max, halved until
///   f_xi(clamp(tau - alpha g)) <= f_xi(tau) - c alpha |g|^2.
/// Below alpha_max 2^-30 the step is skipped and tau kept.
StepResult sgd_step_armijo(OptimizerState& state, const StochasticObjective& objective, std::size_t xi, double c,
                           double alpha_max, const OptimizerSettings& bounds);

/// One full-matrix AdaGrad step: G += g g^T, tau -= alpha (delta I + G)^{-1/2} g.
StepResult sgd_step_adagrad(OptimizerState& state, const StochasticObjective& objective, std::size_t xi, double alpha,
                            double delta, const OptimizerSettings& bounds);

/// (delta I + G)^{-1/2} g through a symmetric eigendecomposition; negative
/// round-off eigenvalues are clamped to zero.
Eigen::VectorXd adagrad_direction(const Eigen::MatrixXd& G, double delta, const Eigen::VectorXd& g);

/// RMS distance (1/sqrt(N)) |a - b|_2.
double reconstruction_error(std::span<const double> a, std::span<const double> b);

/// Called after every iteration with the updated state.
using IterationCallback = std::function<void(const OptimizerState&)>;

/// Runs the configured method for `iterations` steps or until the sampled
/// gradient norm drops below grad_tol. Row 0 of the history is the initial
/// iterate.
OptimizerState run_optimizer(const StochasticObjective& objective, std::vector<double> tau0,
                             std::span<const double> tau_star, const OptimizerSettings& settings,
                             const IterationCallback& callback = {});

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history);

struct GradientGeometry {
  std::vector<double> norms;
  Eigen::MatrixXd cosine;
  std::vector<bool> masked;
  double min_cosine = 0.0;
  /// max_i |g_i| / min_i |g_i| over unmasked gradients.
  double norm_spread = 0.0;
};

/// Norms and pairwise cosines in the inner product sum_k w_k a_k b_k.
GradientGeometry gradient_geometry(const std::vector<std::vector<double>>& gradients, std::span<const double> weights);

/// Columns of the gradient matrix mixed by A: out_j = sum_i A_ij g_i.
std::vector<std::vector<double>> recombine_gradients(const std::vector<std::vector<double>>& gradients,
                                                     const Eigen::MatrixXd& A);
/// Same with A drawn uniformly from (0, 1) using `seed`.
std::vector<std::vector<double>> recombine_gradients(const std::vector<std::vector<double>>& gradients,
                                                     std::uint64_t seed);

}  // namespace phonon
