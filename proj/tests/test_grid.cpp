#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>

#include "phonon/grid.hpp"
#include "phonon/material.hpp"
#include "support.hpp"

using namespace phonon;

TEST_SUITE("grid") {
  TEST_CASE("two-point rule has nodes at +-1/sqrt(3)") {
    const auto r = gauss_legendre(2);
    CHECK(r.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(r.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(r.weights[0] == doctest::Approx(1.0));
    CHECK(r.weights[1] == doctest::Approx(1.0));
  }

  TEST_CASE("rule matches an independent quadrature on smooth integrands") {
    const auto r = gauss_legendre(8);
    auto f = [](double m) { return std::exp(m) * std::cos(3.0 * m) + m * m * m * m; };
    double ours = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) ours += r.weights[i] * f(r.nodes[i]);
    const double ref = boost::math::quadrature::gauss<double, 8>::integrate(f, -1.0, 1.0);
    CHECK(ours == doctest::Approx(ref).epsilon(1e-13));
  }

  TEST_CASE("64-point rule: ascending, symmetric, exact to degree 127") {
    const auto r = gauss_legendre(64);
    CHECK(std::is_sorted(r.nodes.begin(), r.nodes.end()));
    for (std::size_t i = 0; i < 32; ++i) {
      CHECK(r.nodes[i] == doctest::Approx(-r.nodes[63 - i]).epsilon(1e-15));
      CHECK(r.weights[i] == doctest::Approx(r.weights[63 - i]).epsilon(1e-13));
    }
    for (int p : {0, 2, 10, 40, 126}) {
      double s = 0.0;
      for (std::size_t i = 0; i < 64; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      CHECK(s == doctest::Approx(2.0 / (p + 1)).epsilon(1e-12));
    }
  }

  TEST_CASE("uniform_count is robust to representation error") {
    CHECK(uniform_count(0.0, 1.5, 0.005) == 301);
    CHECK(uniform_count(0.4, 4.0, 0.4) == 10);
    CHECK(uniform_count(0.0, 1.0, 0.02) == 51);
  }

  TEST_CASE("trapezoid weights integrate linear functions exactly") {
    const auto w = trapezoid_weights(11, 0.1);
    double s = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      s += w[i];
      s1 += w[i] * (3.0 * 0.1 * i + 1.0);
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(s1 == doctest::Approx(2.5));
  }

  TEST_CASE("reference grid sizes") {
    PhaseGrid g(GridConfig{}, LinearVelocity{});
    CHECK(g.nt() == 301);
    CHECK(g.nx() == 51);
    CHECK(g.nmu() == 64);
    CHECK(g.nomega() == 10);
    CHECK(g.first_positive_mu() == 32);
    CHECK(g.mu_nodes()[g.first_positive_mu()] > 0.0);
    CHECK(g.mu_nodes()[g.first_positive_mu() - 1] < 0.0);
    CHECK(g.mirror(0) == 63);
  }

  TEST_CASE("means of constants are the constant") {
    PhaseGrid g(test::small_grid(), LinearVelocity{});
    std::vector<double> slice(g.slice_size(), 2.5);
    CHECK(g.mean_mu_omega(slice) == doctest::Approx(2.5));
    std::vector<double> w(g.nomega(), -1.5);
    CHECK(g.mean_omega(w) == doctest::Approx(-1.5));
    std::vector<double> t(g.nt(), 4.0);
    CHECK(g.mean_t(t) == doctest::Approx(4.0));
    std::vector<double> mu(g.nmu(), 1.0);
    CHECK(g.half_mean_mu(mu, +1) == doctest::Approx(1.0));
    std::vector<double> ones(g.nomega(), 1.0);
    CHECK(g.omega_inner(ones, ones) == doctest::Approx(g.omega_range()));
  }

  TEST_CASE("odd-in-mu slices average to zero") {
    PhaseGrid g(test::small_grid(), LinearVelocity{});
    std::vector<double> slice(g.slice_size());
    for (std::size_t i = 0; i < g.nmu(); ++i)
      for (std::size_t k = 0; k < g.nomega(); ++k) slice[i * g.nomega() + k] = g.mu_nodes()[i] * (1.0 + k);
    CHECK(std::abs(g.mean_mu_omega(slice)) < 1e-15);
  }

  TEST_CASE("invalid discretizations are rejected") {
    GridConfig c = test::small_grid();
    c.n_mu = 7;
    CHECK_THROWS_AS(PhaseGrid(c, LinearVelocity{}), GridError);
    c = test::small_grid();
    c.dt = 0.2;  // Courant number > 1
    CHECK_THROWS_AS(PhaseGrid(c, LinearVelocity{}), GridError);
    c = test::small_grid();
    c.dx = -0.1;
    CHECK_THROWS_AS(PhaseGrid(c, LinearVelocity{}), GridError);
    c = test::small_grid();
    c.epsilon = 0.0;
    CHECK_THROWS_AS(PhaseGrid(c, LinearVelocity{}), GridError);
  }

  TEST_CASE("axis averaging reduces one axis at a time") {
    PhaseGrid g(test::small_grid(), LinearVelocity{});
    AxisField f;
    f.axes = {Axis::mu, Axis::omega};
    f.values.assign(g.slice_size(), 0.0);
    for (std::size_t i = 0; i < g.nmu(); ++i)
      for (std::size_t k = 0; k < g.nomega(); ++k) f.values[i * g.nomega() + k] = 1.0 + g.omega_nodes()[k];
    const auto r = average(g, f, {Axis::mu});
    REQUIRE(r.values.size() == g.nomega());
    for (std::size_t k = 0; k < g.nomega(); ++k) CHECK(r.values[k] == doctest::Approx(1.0 + g.omega_nodes()[k]));
    CHECK_THROWS_AS(average(g, f, {Axis::t}), GridError);
  }
}
