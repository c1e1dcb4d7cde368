#include "phonon/material.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phonon/csv.hpp"

namespace phonon {

CoefficientProfile CoefficientProfile::relaxation_truth() {
  CoefficientProfile p;
  p.kind_ = Kind::relaxation_truth;
  return p;
}

CoefficientProfile CoefficientProfile::relaxation_initial() {
  CoefficientProfile p;
  p.kind_ = Kind::relaxation_initial;
  return p;
}

CoefficientProfile CoefficientProfile::bose_einstein() {
  CoefficientProfile p;
  p.kind_ = Kind::bose_einstein;
  return p;
}

CoefficientProfile CoefficientProfile::constant(double value) {
  CoefficientProfile p;
  p.kind_ = Kind::constant;
  p.value_ = value;
  return p;
}

CoefficientProfile CoefficientProfile::table(std::vector<std::pair<double, double>> rows) {
  if (rows.empty()) throw MaterialError("profile table is empty");
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) throw MaterialError("profile table has duplicate omega entries");
  }
  CoefficientProfile p;
  p.kind_ = Kind::tabulated;
  p.rows_ = std::move(rows);
  return p;
}

double CoefficientProfile::operator()(double omega) const {
  switch (kind_) {
    case Kind::relaxation_truth: return 1.0 / std::sqrt(5.0 * omega) + 1.0;
    case Kind::relaxation_initial: return -0.15 * (omega - 4.0) + 1.4;
    case Kind::bose_einstein: {
      const double e = std::exp(omega);
      return omega * omega * e / ((e - 1.0) * (e - 1.0));
    }
    case Kind::constant: return value_;
    case Kind::tabulated: {
      const double tol = 1e-9 * std::max(1.0, std::abs(omega));
      if (omega < rows_.front().first - tol || omega > rows_.back().first + tol) {
        std::ostringstream os;
        os << "profile table does not cover omega = " << omega;
        throw MaterialError(os.str());
      }
      if (rows_.size() == 1) return rows_.front().second;
      auto hi = std::lower_bound(rows_.begin(), rows_.end(), omega,
                                 [](const auto& row, double w) { return row.first < w; });
      if (hi != rows_.end() && std::abs(hi->first - omega) <= tol) return hi->second;
      if (hi == rows_.begin()) return hi->second;
      if (hi == rows_.end()) return rows_.back().second;
      auto lo = std::prev(hi);
      const double f = (omega - lo->first) / (hi->first - lo->first);
      return lo->second + f * (hi->second - lo->second);
    }
  }
  return 0.0;
}

std::string CoefficientProfile::describe() const {
  switch (kind_) {
    case Kind::relaxation_truth: return "truth";
    case Kind::relaxation_initial: return "initial";
    case Kind::bose_einstein: return "bose_einstein";
    case Kind::constant: {
      std::ostringstream os;
      os.precision(17);
      os << "constant:" << value_;
      return os.str();
    }
    case Kind::tabulated: return "table";
  }
  return "?";
}

std::vector<double> eval_tau(const CoefficientProfile& profile, std::span<const double> omega_nodes) {
  std::vector<double> out(omega_nodes.size());
  for (std::size_t k = 0; k < omega_nodes.size(); ++k) {
    out[k] = profile(omega_nodes[k]);
    if (!(out[k] > 0.0) || !std::isfinite(out[k])) {
      std::ostringstream os;
      os << "profile " << profile.describe() << " is not positive at node " << k << " (omega = " << omega_nodes[k]
         << ", value = " << out[k] << ")";
      throw MaterialError(os.str());
    }
  }
  return out;
}

std::vector<double> eval_velocity(const LinearVelocity& velocity, std::span<const double> omega_nodes) {
  std::vector<double> out(omega_nodes.size());
  for (std::size_t k = 0; k < omega_nodes.size(); ++k) {
    out[k] = velocity(omega_nodes[k]);
    if (!(out[k] > 0.0)) {
      std::ostringstream os;
      os << "group velocity is not positive at omega = " << omega_nodes[k] << " (v = " << out[k] << ")";
      throw MaterialError(os.str());
    }
  }
  return out;
}

namespace {

void check_range(std::span<const double> values, double lo, double hi, const char* name) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= lo && values[k] <= hi)) {
      std::ostringstream os;
      os << name << " out of bounds at node " << k << ": " << values[k] << " not in [" << lo << ", " << hi << "]";
      throw MaterialError(os.str());
    }
  }
}

}  // namespace

MaterialModel::MaterialModel(std::vector<double> tau, std::vector<double> velocity, std::vector<double> g_star,
                             MaterialBounds bounds)
    : tau_(std::move(tau)), velocity_(std::move(velocity)), g_star_(std::move(g_star)), bounds_(bounds) {
  if (tau_.size() != velocity_.size() || tau_.size() != g_star_.size() || tau_.empty()) {
    throw MaterialError("material: tau, velocity and g* must have equal nonzero length");
  }
  check_range(tau_, bounds_.tau_min, bounds_.tau_max, "tau");
  check_range(g_star_, bounds_.g_min, bounds_.g_max, "g*");
  for (double v : velocity_) {
    if (!(v > 0.0)) throw MaterialError("material: velocity must be positive");
  }
  h_star_.resize(tau_.size());
  for (std::size_t k = 0; k < tau_.size(); ++k) h_star_[k] = g_star_[k] / tau_[k];
}

MaterialModel MaterialModel::with_tau(std::vector<double> tau) const {
  return MaterialModel(std::move(tau), velocity_, g_star_, bounds_);
}

MaterialModel build_material(const CoefficientProfile& tau_profile, const CoefficientProfile& g_star_profile,
                             const LinearVelocity& velocity, std::span<const double> omega_nodes,
                             MaterialBounds bounds) {
  auto tau = eval_tau(tau_profile, omega_nodes);
  auto g = eval_tau(g_star_profile, omega_nodes);
  if (g_star_profile.kind() == CoefficientProfile::Kind::bose_einstein) {
    const double peak = *std::max_element(g.begin(), g.end());
    for (double& v : g) v /= peak;
  }
  return MaterialModel(std::move(tau), eval_velocity(velocity, omega_nodes), std::move(g), bounds);
}

std::vector<double> clamp_tau(std::span<const double> tau, const MaterialBounds& bounds) {
  std::vector<double> out(tau.begin(), tau.end());
  for (double& v : out) v = std::clamp(v, bounds.tau_min, bounds.tau_max);
  return out;
}

std::vector<std::pair<double, double>> read_profile_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != 2) throw MaterialError("profile CSV " + path + " must have two columns");
  std::vector<std::pair<double, double>> rows;
  for (const auto& r : table.rows) rows.emplace_back(r[0], r[1]);
  return rows;
}

void write_profile_csv(const std::string& path, std::span<const double> omega, std::span<const double> values,
                       const std::string& value_name) {
  CsvWriter out(path, {"omega", value_name});
  for (std::size_t k = 0; k < omega.size(); ++k) out.row({omega[k], values[k]});
}

}  // namespace phonon
