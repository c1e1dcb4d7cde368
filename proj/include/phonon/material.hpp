#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phonon {

class PhaseGrid;

class MaterialError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A positive coefficient function of frequency: either one of the known
/// closed forms or a table interpolated linearly between its nodes.
class CoefficientProfile {
 public:
  enum class Kind { relaxation_truth, relaxation_initial, bose_einstein, constant, tabulated };

  /// tau*(w) = 1/sqrt(5 w) + 1.
  static CoefficientProfile relaxation_truth();
  /// tau0(w) = -0.15 (w - 4) + 1.4.
  static CoefficientProfile relaxation_initial();
  /// w^2 e^w / (e^w - 1)^2, unnormalized; build_material rescales it.
  static CoefficientProfile bose_einstein();
  static CoefficientProfile constant(double value);
  static CoefficientProfile table(std::vector<std::pair<double, double>> rows);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  const std::vector<std::pair<double, double>>& rows() const { return rows_; }

  double operator()(double omega) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double value_ = 1.0;
  std::vector<std::pair<double, double>> rows_;
};

/// Group velocity v(w) = intercept + slope * w.
struct LinearVelocity {
  double intercept = 2.5;
  double slope = -0.2;
  double operator()(double omega) const { return intercept + slope * omega; }
};

/// Evaluates a profile on the nodes; any nonpositive value is rejected with
/// the offending node in the message.
std::vector<double> eval_tau(const CoefficientProfile& profile, std::span<const double> omega_nodes);
std::vector<double> eval_velocity(const LinearVelocity& velocity, std::span<const double> omega_nodes);

struct MaterialBounds {
  double tau_min = 0.1;   // c1
  double tau_max = 10.0;  // c2
  double g_min = 1e-8;    // c3
  double g_max = 1e8;     // c4
};

/// Coefficients sampled on the omega grid. Immutable; `with_tau` returns a
/// new model with h* recomputed.
class MaterialModel {
 public:
  MaterialModel(std::vector<double> tau, std::vector<double> velocity, std::vector<double> g_star,
                MaterialBounds bounds = {});

  std::size_t size() const { return tau_.size(); }
  std::span<const double> tau() const { return tau_; }
  std::span<const double> velocity() const { return velocity_; }
  std::span<const double> g_star() const { return g_star_; }
  std::span<const double> h_star() const { return h_star_; }
  const MaterialBounds& bounds() const { return bounds_; }

  MaterialModel with_tau(std::vector<double> tau) const;

 private:
  std::vector<double> tau_, velocity_, g_star_, h_star_;
  MaterialBounds bounds_;
};

/// Samples tau, v and g* on the grid. A Bose-Einstein g* is normalized so its
/// maximum over the grid is 1.
MaterialModel build_material(const CoefficientProfile& tau_profile, const CoefficientProfile& g_star_profile,
                             const LinearVelocity& velocity, std::span<const double> omega_nodes,
                             MaterialBounds bounds = {});

/// Clamps every entry to [tau_min, tau_max].
std::vector<double> clamp_tau(std::span<const double> tau, const MaterialBounds& bounds);

/// Two-column CSV (omega,value) with a header line.
std::vector<std::pair<double, double>> read_profile_csv(const std::string& path);
void write_profile_csv(const std::string& path, std::span<const double> omega, std::span<const double> values,
                       const std::string& value_name = "value");

}  // namespace phonon
