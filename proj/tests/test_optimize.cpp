#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "phonon/csv.hpp"
#include "phonon/optimize.hpp"
#include "support.hpp"

using namespace phonon;

namespace {

// f_i(x) = 0.5 (a_i . x - b_i)^2 with a consistent solution x*.
class LeastSquares : public StochasticObjective {
 public:
  LeastSquares(std::size_t terms, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    star_ = test::random_vector(dim, rng, 1.0, 3.0);
    for (std::size_t i = 0; i < terms; ++i) {
      rows_.push_back(test::random_vector(dim, rng));
      double b = 0.0;
      for (std::size_t k = 0; k < dim; ++k) b += rows_.back()[k] * star_[k];
      rhs_.push_back(b);
    }
  }
  std::size_t size() const override { return rows_.size(); }
  double residual(std::size_t i, std::span<const double> x) const {
    double r = -rhs_[i];
    for (std::size_t k = 0; k < x.size(); ++k) r += rows_[i][k] * x[k];
    return r;
  }
  double loss(std::size_t i, std::span<const double> x) const override { return 0.5 * std::pow(residual(i, x), 2); }
  ObjectiveSample sample(std::size_t i, std::span<const double> x) const override {
    ObjectiveSample s;
    const double r = residual(i, x);
    s.loss = 0.5 * r * r;
    for (double a : rows_[i]) s.gradient.push_back(r * a);
    return s;
  }
  const std::vector<double>& star() const { return star_; }

 private:
  std::vector<std::vector<double>> rows_;
  std::vector<double> rhs_, star_;
};

OptimizerSettings settings(Method m) {
  OptimizerSettings s;
  s.method = m;
  s.iterations = 200;
  s.seed = 11;
  s.alpha_max = 4.0;
  s.adagrad_alpha = 0.5;
  return s;
}

}  // namespace

namespace {

// f(x) = 0.5 |x - a|^2, a single term.
class Bowl : public StochasticObjective {
 public:
  explicit Bowl(std::vector<double> a) : a_(std::move(a)) {}
  std::size_t size() const override { return 1; }
  double loss(std::size_t, std::span<const double> x) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += 0.5 * (x[k] - a_[k]) * (x[k] - a_[k]);
    return s;
  }
  ObjectiveSample sample(std::size_t i, std::span<const double> x) const override {
    ObjectiveSample s{loss(i, x), {}};
    for (std::size_t k = 0; k < x.size(); ++k) s.gradient.push_back(x[k] - a_[k]);
    return s;
  }

 private:
  std::vector<double> a_;
};

}  // namespace

TEST_SUITE("optimize") {
  TEST_CASE("Armijo on a bowl accepts the exact minimizer step at alpha_max = 1") {
    Bowl f({2.0, 3.0, 4.0});
    auto st = init_state({1.0, 1.0, 1.0}, OptimizerSettings{});
    const auto r = sgd_step_armijo(st, f, 0, 0.5, 1.0, OptimizerSettings{});
    CHECK(r.accepted);
    CHECK(r.alpha == 1.0);
    CHECK(st.tau == std::vector<double>{2.0, 3.0, 4.0});
  }

  TEST_CASE("zero gradient leaves tau unchanged at alpha_max") {
    Bowl f({2.0, 3.0});
    auto st = init_state({2.0, 3.0}, OptimizerSettings{});
    const auto r = sgd_step_armijo(st, f, 0, 1e-4, 1.0, OptimizerSettings{});
    CHECK(r.accepted);
    CHECK(r.alpha == 1.0);
    CHECK(st.tau == std::vector<double>{2.0, 3.0});
  }

  TEST_CASE("accepted Armijo steps satisfy sufficient decrease on recomputation") {
    LeastSquares obj(8, 4, 1);
    const auto set = settings(Method::armijo);
    std::vector<std::vector<double>> taus;
    const auto st = run_optimizer(obj, std::vector<double>(4, 2.0), obj.star(), set,
                                  [&](const OptimizerState& s) { taus.push_back(s.tau); });
    REQUIRE(taus.size() == 201);
    int accepted = 0;
    for (std::size_t n = 1; n < taus.size(); ++n) {
      const auto& row = st.history[n];
      if (!row.accepted) {
        CHECK(taus[n] == taus[n - 1]);
        continue;
      }
      ++accepted;
      const auto xi = static_cast<std::size_t>(row.xi);
      const auto s = obj.sample(xi, taus[n - 1]);
      const double lhs = obj.loss(xi, taus[n]);
      const double rhs = s.loss - set.armijo_c * row.alpha * obj.inner(s.gradient, s.gradient);
      CHECK(lhs <= rhs + 1e-10 * std::max(1.0, s.loss));
      CHECK(row.alpha <= set.alpha_max);
    }
    CHECK(accepted > 0);
    CHECK(st.history.back().error_e < 1e-3 * st.history.front().error_e);
  }

  TEST_CASE("AdaGrad matrix eigenvalues never decrease") {
    LeastSquares obj(6, 5, 2);
    std::vector<Eigen::VectorXd> eig;
    run_optimizer(obj, std::vector<double>(5, 2.0), obj.star(), settings(Method::adagrad),
                  [&](const OptimizerState& s) {
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e(s.adagrad_matrix);
                    eig.push_back(e.eigenvalues());
                  });
    for (std::size_t n = 1; n < eig.size(); ++n) {
      const double scale = std::max(1.0, eig[n].cwiseAbs().maxCoeff());
      for (Eigen::Index j = 0; j < eig[n].size(); ++j) CHECK(eig[n](j) >= eig[n - 1](j) - 1e-10 * scale);
    }
  }

  TEST_CASE("rank-one AdaGrad step has the closed form g / sqrt(delta + |g|^2)") {
    std::mt19937_64 rng(3);
    for (double delta : {1e-8, 0.5, 3.0}) {
      const auto gv = test::random_vector(6, rng);
      const Eigen::Map<const Eigen::VectorXd> g(gv.data(), 6);
      const Eigen::MatrixXd G = g * g.transpose();
      const Eigen::VectorXd d = adagrad_direction(G, delta, g);
      const Eigen::VectorXd expect = g / std::sqrt(delta + g.squaredNorm());
      CHECK((d - expect).norm() <= 1e-10 * expect.norm());
    }
  }

  TEST_CASE("first AdaGrad step through the optimizer matches the closed form") {
    LeastSquares obj(3, 3, 4);
    auto set = settings(Method::adagrad);
    set.iterations = 1;
    const std::vector<double> x0(3, 2.0);
    const auto st = run_optimizer(obj, x0, obj.star(), set);
    const auto s = obj.sample(static_cast<std::size_t>(st.history[1].xi), x0);
    double g2 = 0.0;
    for (double v : s.gradient) g2 += v * v;
    for (std::size_t k = 0; k < 3; ++k) {
      const double expect = x0[k] - set.adagrad_alpha * s.gradient[k] / std::sqrt(set.adagrad_delta + g2);
      CHECK(st.tau[k] == doctest::Approx(expect).epsilon(1e-10));
    }
  }

  TEST_CASE("both methods converge on a consistent least-squares problem") {
    LeastSquares obj(10, 4, 5);
    for (Method m : {Method::armijo, Method::adagrad}) {
      auto set = settings(m);
      set.iterations = 600;
      const auto st = run_optimizer(obj, std::vector<double>(4, 2.0), obj.star(), set);
      CHECK(st.history.back().error_e < 0.1 * st.history.front().error_e);
      CHECK(st.history.back().loss_total < 1e-2 * st.history.front().loss_total);
    }
  }

  TEST_CASE("zero budget records only the initial state") {
    LeastSquares obj(4, 2, 6);
    auto set = settings(Method::armijo);
    set.iterations = 0;
    const auto st = run_optimizer(obj, {2.0, 2.0}, obj.star(), set);
    REQUIRE(st.history.size() == 1);
    CHECK(st.history[0].n == 0);
    CHECK(st.history[0].xi == -1);
    CHECK(std::isnan(st.history[0].grad_norm));
    CHECK(st.tau == std::vector<double>{2.0, 2.0});
  }

  TEST_CASE("same seed gives the same trajectory, a different seed does not") {
    LeastSquares obj(10, 3, 7);
    auto set = settings(Method::armijo);
    set.iterations = 30;
    const auto a = run_optimizer(obj, std::vector<double>(3, 2.0), obj.star(), set);
    const auto b = run_optimizer(obj, std::vector<double>(3, 2.0), obj.star(), set);
    set.seed = 12;
    const auto c = run_optimizer(obj, std::vector<double>(3, 2.0), obj.star(), set);
    CHECK(a.tau == b.tau);
    std::vector<int> xa, xc;
    for (const auto& r : a.history) xa.push_back(r.xi);
    for (const auto& r : c.history) xc.push_back(r.xi);
    CHECK(xa != xc);
  }

  TEST_CASE("epoch sampling visits every index once per epoch") {
    OptimizerSettings set;
    auto st = init_state({0.0}, set);
    for (int epoch = 0; epoch < 3; ++epoch) {
      std::vector<int> seen(7, 0);
      for (int i = 0; i < 7; ++i) ++seen[draw_index(st, 7, Sampling::epoch)];
      for (int v : seen) CHECK(v == 1);
    }
    CHECK_THROWS_AS(draw_index(st, 0, Sampling::iid), OptimizerError);
  }

  TEST_CASE("steps are clamped into the coefficient bounds") {
    LeastSquares obj(4, 2, 8);
    auto set = settings(Method::adagrad);
    set.adagrad_alpha = 50.0;
    set.tau_min = 1.5;
    set.tau_max = 2.5;
    const auto st = run_optimizer(obj, {2.0, 2.0}, {}, set);
    for (double v : st.tau) CHECK((v >= 1.5 && v <= 2.5));
    CHECK(st.clamp_events > 0);
    CHECK(std::isnan(st.history.back().error_e));
  }

  TEST_CASE("invalid constants are rejected") {
    LeastSquares obj(2, 2, 9);
    auto st = init_state({1.0, 1.0}, OptimizerSettings{});
    CHECK_THROWS_AS(sgd_step_armijo(st, obj, 0, 1.5, 1.0, OptimizerSettings{}), OptimizerError);
    CHECK_THROWS_AS(sgd_step_adagrad(st, obj, 0, 0.1, 0.0, OptimizerSettings{}), OptimizerError);
    auto bad = OptimizerSettings{};
    bad.iterations = -1;
    CHECK_THROWS_AS(run_optimizer(obj, {1.0, 1.0}, {}, bad), OptimizerError);
  }

  TEST_CASE("reconstruction error is the RMS distance") {
    CHECK(reconstruction_error(std::vector<double>{1.0, 2.0}, std::vector<double>{2.0, 0.0}) ==
          doctest::Approx(std::sqrt(2.5)));
  }

  TEST_CASE("geometry of orthogonal and parallel gradients") {
    const std::vector<double> w{1.0, 1.0, 1.0};
    const auto geo = gradient_geometry({{1, 0, 0}, {0, 2, 0}, {3, 0, 0}}, w);
    CHECK(geo.norms[1] == doctest::Approx(2.0));
    CHECK(geo.cosine(0, 1) == doctest::Approx(0.0));
    CHECK(geo.cosine(0, 2) == doctest::Approx(1.0));
    CHECK(geo.min_cosine == doctest::Approx(0.0));
    CHECK(geo.norm_spread == doctest::Approx(3.0));
  }

  TEST_CASE("recombination with the identity is a no-op and seeded draws repeat") {
    const std::vector<std::vector<double>> g{{1, 0}, {0, 1}, {1, 1}};
    CHECK(recombine_gradients(g, Eigen::MatrixXd::Identity(3, 3)) == g);
    CHECK(recombine_gradients(g, 5) == recombine_gradients(g, 5));
    // A positive mixing matrix pulls nonnegative vectors together.
    const auto geo_raw = gradient_geometry(g, std::vector<double>{1.0, 1.0});
    const auto geo_mix = gradient_geometry(recombine_gradients(g, 5), std::vector<double>{1.0, 1.0});
    CHECK(geo_mix.min_cosine > geo_raw.min_cosine);
  }

  TEST_CASE("history CSV has the documented columns") {
    LeastSquares obj(3, 2, 10);
    auto set = settings(Method::armijo);
    set.iterations = 4;
    const auto st = run_optimizer(obj, {2.0, 2.0}, obj.star(), set);
    const auto dir = test::scratch_dir("history");
    write_history_csv((dir / "h.csv").string(), st.history);
    const auto t = read_csv((dir / "h.csv").string());
    CHECK(t.header == std::vector<std::string>{"n", "xi", "alpha", "loss_total", "loss_sampled", "error_e", "grad_norm"});
    CHECK(t.rows.size() == 5);
    CHECK(t.rows[4][t.column("loss_total")] == st.history[4].loss_total);
  }
}
