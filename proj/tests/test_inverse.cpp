#include <doctest.h>

#include <cmath>

#include "phonon/inverse.hpp"
#include "support.hpp"

using namespace phonon;

namespace {

GridConfig coarse_horizon(double dx = 0.1, double dt = 0.01, int n_mu = 8) {
  GridConfig c = test::small_grid();
  c.t_end = 1.65;
  c.dx = dx;
  c.dt = dt;
  c.n_mu = n_mu;
  return c;
}

PairFamily wide_family() {
  PairFamily f;
  f.eps_mu = 0.1;
  f.eps_omega = 0.3;
  f.omegas = {0.8, 2.0, 3.6};
  return f;
}

}  // namespace

TEST_SUITE("inverse") {
  TEST_CASE("arrival time of the reference pair") {
    // t0 + 2 / (mu0 v(omega0)) with v = 2.5 - 0.2 omega.
    const double t = arrival_time(0.04, 0.96, 2.0, LinearVelocity{});
    CHECK(t == doctest::Approx(0.04 + 2.0 / (0.96 * 2.1)).epsilon(1e-14));
    CHECK(std::abs(t - 1.0321) < 1e-4);
    CHECK_THROWS_AS(arrival_time(0.1, 0.0, 1.75, LinearVelocity{}), InverseError);
  }

  TEST_CASE("pair family covers the requested nodes and rejects late windows") {
    PhaseGrid g(GridConfig{}, LinearVelocity{});
    PairFamily f;
    f.omegas = {0.4, 2.0};
    const auto pairs = build_pairs(g, LinearVelocity{}, f);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[1].source.omega0 == 2.0);
    CHECK(pairs[1].t_R == doctest::Approx(arrival_time(0.1, 0.93, 2.0, LinearVelocity{})));
    // omega = 4 arrives at 1.365, so its window tail passes T = 1.5.
    f.omegas = {4.0};
    CHECK_THROWS_AS(build_pairs(g, LinearVelocity{}, f), InverseError);
  }

  TEST_CASE("window is a unit-peak Gaussian") {
    SourceTestPair p;
    p.t_R = 1.0;
    CHECK(p.window(1.0) == 1.0);
    CHECK(p.window(1.08) == doctest::Approx(std::exp(-0.5)));
  }

  TEST_CASE("data CSV round trip is exact") {
    PhaseGrid g(coarse_horizon(), LinearVelocity{});
    auto pairs = build_pairs(g, LinearVelocity{}, wide_family());
    generate_data(g, test::truth_material(g), pairs);
    const auto dir = test::scratch_dir("data");
    write_data_csv((dir / "data.csv").string(), pairs);
    const auto back = read_data_csv((dir / "data.csv").string());
    REQUIRE(back.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(back[i].source.omega0 == pairs[i].source.omega0);
      CHECK(back[i].t_R == pairs[i].t_R);
      REQUIRE(back[i].datum.has_value());
      CHECK(*back[i].datum == *pairs[i].datum);
    }
  }

  TEST_CASE("loss needs data and vanishes at the generating coefficient") {
    PhaseGrid g(coarse_horizon(), LinearVelocity{});
    const auto truth = test::truth_material(g);
    auto pairs = build_pairs(g, LinearVelocity{}, wide_family());
    CHECK_THROWS_AS(loss(g, truth, pairs[0]), InverseError);
    generate_data(g, truth, pairs);
    for (const auto& p : pairs) {
      CHECK(*p.datum > 0.0);
      CHECK(loss(g, truth, p).loss == 0.0);
      const auto gr = frechet_gradient(g, truth, p);
      for (double v : gr.gradient) CHECK(v == 0.0);
      CHECK(loss(g, test::initial_material(g), p).loss > 0.0);
    }
  }

  TEST_CASE("central difference is second order on a cubic") {
    auto f = [](std::span<const double> t) {
      double s = 0.0;
      for (double v : t) s += v * v * v;
      return s;
    };
    const std::vector<double> tau{1.0, 2.0}, d{1.0, -0.5};
    const double exact = 3.0 * 1.0 - 0.5 * 3.0 * 4.0;
    // Error is s^2 sum d^3 exactly for a cubic.
    const double s = 1e-2;
    CHECK(fd_directional(f, tau, d, s) == doctest::Approx(exact + s * s * (1.0 - 0.125)).epsilon(1e-9));
    CHECK_THROWS_AS(fd_directional(f, tau, d, 0.0), InverseError);
  }

  TEST_CASE("adjoint gradient converges to central differences under refinement") {
    auto worst_error = [](double dx, double dt) {
      PhaseGrid g(coarse_horizon(dx, dt, 16), LinearVelocity{});
      auto pairs = build_pairs(g, LinearVelocity{}, wide_family());
      generate_data(g, test::truth_material(g), pairs);
      const auto m = test::initial_material(g);
      double worst = 0.0;
      for (const auto& p : pairs) {
        const auto gr = frechet_gradient(g, m, p);
        for (std::size_t k : {std::size_t{1}, std::size_t{4}, std::size_t{8}}) {
          std::vector<double> d(g.nomega(), 0.0);
          d[k] = 1.0;
          const double fd = fd_gradient_oracle(g, m, p, d);
          worst = std::max(worst, std::abs(g.omega_inner(gr.gradient, d) - fd) / std::abs(fd));
        }
      }
      return worst;
    };
    const double e1 = worst_error(0.1, 0.01);
    const double e2 = worst_error(0.05, 0.005);
    const double e3 = worst_error(0.025, 0.0025);
    CAPTURE(e1);
    CAPTURE(e2);
    CAPTURE(e3);
    CHECK(e2 < e1);
    CHECK(e3 < e2);
    CHECK(e3 < 0.1);
  }

  TEST_CASE("pair objective matches the per-pair functions") {
    PhaseGrid g(coarse_horizon(), LinearVelocity{});
    const auto truth = test::truth_material(g);
    auto pairs = build_pairs(g, LinearVelocity{}, wide_family());
    generate_data(g, truth, pairs);
    PairObjective obj(g, truth, pairs);
    const auto m = test::initial_material(g);
    const std::vector<double> tau(m.tau().begin(), m.tau().end());
    CHECK(obj.size() == 3);
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) sum += loss(g, m, pairs[i]).loss;
    CHECK(obj.total_loss(tau) == doctest::Approx(sum / 3.0).epsilon(1e-14));
    const auto s = obj.sample(1, tau);
    const auto gr = frechet_gradient(g, m, pairs[1]);
    for (std::size_t k = 0; k < tau.size(); ++k) CHECK(s.gradient[k] == gr.gradient[k]);
    std::vector<double> ones(tau.size(), 1.0);
    CHECK(obj.inner(ones, ones) == doctest::Approx(g.omega_range()));
  }

  TEST_CASE("Lipschitz probe reports finite ratios") {
    PhaseGrid g(coarse_horizon(), LinearVelocity{});
    auto pairs = build_pairs(g, LinearVelocity{}, wide_family());
    generate_data(g, test::truth_material(g), pairs);
    const auto r = lipschitz_probe(g, test::initial_material(g), pairs[1], 4, 1e-2, 3);
    REQUIRE(r.ratios.size() == 4);
    for (double v : r.ratios) CHECK((std::isfinite(v) && v >= 0.0));
    CHECK(r.max_ratio == *std::max_element(r.ratios.begin(), r.ratios.end()));
    CHECK_THROWS_AS(lipschitz_probe(g, test::initial_material(g), pairs[1], 0, 1e-2, 3), InverseError);
  }

  TEST_CASE("Lipschitz ratio is stable when the perturbation scale is halved") {
    PhaseGrid g(coarse_horizon(), LinearVelocity{});
    auto pairs = build_pairs(g, LinearVelocity{}, wide_family());
    generate_data(g, test::truth_material(g), pairs);
    const auto m = test::initial_material(g);
    const double a = lipschitz_probe(g, m, pairs[1], 6, 1e-2, 5).max_ratio;
    const double b = lipschitz_probe(g, m, pairs[1], 6, 5e-3, 5).max_ratio;
    CHECK(a > 0.0);
    CHECK(b <= 2.0 * a);
    CHECK(a <= 2.0 * b);
  }
}
