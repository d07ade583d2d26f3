#include <doctest.h>

#include <phiclosure/sos_fit.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace phiclosure;

namespace {

SosParameters random_params(int K, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  SosParameters w;
  w.C = u(rng);
  w.a.resize(K + 1);
  w.b.resize(K);
  for (int i = 0; i <= K; ++i) w.a[i] = u(rng);
  for (int i = 0; i < K; ++i) w.b[i] = u(rng);
  return w;
}

}  // namespace

TEST_CASE("stacking round-trips the parameter block") {
  std::mt19937_64 rng(3);
  for (int K : {0, 1, 4}) {
    const SosParameters w = random_params(K, rng);
    const Eigen::VectorXd flat = w.stacked();
    REQUIRE(flat.size() == 2 * K + 2);
    const SosParameters back = SosParameters::from_stacked(flat);
    CHECK(back.C == w.C);
    CHECK((back.a.array() == w.a.array()).all());
    CHECK((back.b.array() == w.b.array()).all());
    CHECK(back.order() == K);
  }
}

TEST_CASE("alpha matches the naive convolution oracle") {
  std::mt19937_64 rng(11);
  for (int K = 0; K <= 6; ++K) {
    for (int trial = 0; trial < 5; ++trial) {
      const SosParameters w = random_params(K, rng);
      const Eigen::VectorXd got = alpha_from_w(w);
      const Eigen::VectorXd want = oracle::sos_alpha(w.stacked(), K);
      REQUIRE(got.size() == want.size());
      CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("alpha jacobian matches finite differences") {
  std::mt19937_64 rng(13);
  for (int K : {0, 1, 3, 6}) {
    const SosParameters w = random_params(K, rng);
    const Eigen::MatrixXd jac = jacobian_alpha(w);
    const Eigen::VectorXd flat = w.stacked();
    const double h = 1e-7;
    for (Eigen::Index c = 0; c < flat.size(); ++c) {
      Eigen::VectorXd fp = flat, fm = flat;
      fp[c] += h;
      fm[c] -= h;
      const Eigen::VectorXd fd =
          (alpha_from_w(SosParameters::from_stacked(fp)) -
           alpha_from_w(SosParameters::from_stacked(fm))) /
          (2 * h);
      CHECK((fd - jac.col(c)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("fit problem assembles gram and moments from closed forms") {
  for (auto [target, lo, hi] :
       {std::tuple{Target::BoltzmannShannon, -1.5, 2.0},
        std::tuple{Target::BoseEinstein, -3.0, -0.25}}) {
    const int K = 2;
    const FitProblem problem = build_fit_problem(target, K, lo, hi);
    const Eigen::MatrixXd gram_ref = oracle::fit_gram(K, lo, hi);
    CHECK((problem.gram - gram_ref).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd beta_ref = oracle::fit_moments(
        [&](double x) { return target_value(target, x); }, K, lo, hi);
    for (Eigen::Index j = 0; j < beta_ref.size(); ++j)
      CHECK(problem.moments[j] ==
            doctest::Approx(beta_ref[j]).epsilon(1e-10));
    CHECK(problem.moment_check_error < 1e-8);
  }
  CHECK_THROWS_AS(build_fit_problem(Target::BoseEinstein, 1, -1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_fit_problem(Target::BoltzmannShannon, 1, 2.0, -2.0),
                  std::invalid_argument);
}

TEST_CASE("objective and gradient are consistent") {
  std::mt19937_64 rng(17);
  const FitProblem problem =
      build_fit_problem(Target::BoltzmannShannon, 2, -1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const SosParameters w = random_params(2, rng);
    const double f_oracle = oracle::sos_objective(
        problem.gram, problem.moments, w.stacked(), 2);
    CHECK(objective_value(problem, w) ==
          doctest::Approx(f_oracle).epsilon(1e-12));
    CHECK(objective_value(problem, alpha_from_w(w)) ==
          doctest::Approx(f_oracle).epsilon(1e-12));

    const Eigen::VectorXd grad = objective_gradient(problem, w);
    const Eigen::VectorXd flat = w.stacked();
    const double h = 1e-6;
    for (Eigen::Index c = 0; c < flat.size(); ++c) {
      Eigen::VectorXd fp = flat, fm = flat;
      fp[c] += h;
      fm[c] -= h;
      const double fd =
          (objective_value(problem, SosParameters::from_stacked(fp)) -
           objective_value(problem, SosParameters::from_stacked(fm))) /
          (2 * h);
      CHECK(grad[c] == doctest::Approx(fd).epsilon(5e-5));
    }
  }
}

TEST_CASE("degree-1 fit on [0,1] hits the unconstrained least squares") {
  // With p = C + a0^2 x the optimum is interior: alpha* = M^-1 beta gives
  // alpha* = (4e - 10, 18 - 6e), both parts representable, so the fit must
  // reproduce the plain projection of e^x onto {1, x}.
  const double e = std::exp(1.0);
  const FitProblem problem =
      build_fit_problem(Target::BoltzmannShannon, 0, 0.0, 1.0);
  const FitResult result = fit(problem);
  CHECK(result.objective ==
        doctest::Approx(-(2 * e * e - 10 * e + 14)).epsilon(1e-10));
  CHECK(result.w.C == doctest::Approx(4 * e - 10).epsilon(1e-7));
  CHECK(result.w.a[0] * result.w.a[0] ==
        doctest::Approx(18 - 6 * e).epsilon(1e-7));
  CHECK(result.map.p.coeff(1) ==
        doctest::Approx(18 - 6 * e).epsilon(1e-7));
  CHECK(result.converged_starts > 0);
}

TEST_CASE("fits are deterministic in the seed") {
  const FitProblem problem =
      build_fit_problem(Target::BoseEinstein, 2, -2.0, -0.5);
  FitOptions options;
  options.seed = 42;
  const FitResult a = fit(problem, options);
  const FitResult b = fit(problem, options);
  CHECK(a.objective == b.objective);
  CHECK(a.w.stacked() == b.w.stacked());
  CHECK(a.map.p.coeffs == b.map.p.coeffs);

  options.seed = 1234;
  const FitResult c = fit(problem, options);
  // different seed, same optimum
  CHECK(c.objective == doctest::Approx(a.objective).epsilon(1e-10));
}

TEST_CASE("fitted derivative is a sum of two squares coefficient-wise") {
  for (auto [target, lo, hi] :
       {std::tuple{Target::BoltzmannShannon, -1.0, 1.0},
        std::tuple{Target::BoseEinstein, -6.0, -1.0 / 6.0}}) {
    const FitResult result = fit(build_fit_problem(target, 3, lo, hi));
    const Eigen::VectorXd a = result.w.a, b = result.w.b;
    Eigen::VectorXd q = oracle::conv(a, a);
    Eigen::VectorXd qb = oracle::conv(b, b);
    q.head(qb.size()) += qb;
    const double scale = q.cwiseAbs().maxCoeff();
    for (Eigen::Index n = 0; n < q.size(); ++n)
      CHECK(std::abs(result.map.dp.coeff(n) - q[n]) <= 1e-12 * scale);
    // and the map really increases across the fit window
    for (int i = 0; i <= 100; ++i) {
      const double x = lo + (hi - lo) * i / 100.0;
      CHECK(result.map.dp(x) >= -1e-12);
    }
  }
}

TEST_CASE("map fitted on [-1,1] extrapolates better than the matched jet") {
  // the degree-5 fit stays usable well outside its interval, while the
  // Taylor jet of the same degree drifts quickly for large |x|
  const RenormalizationMap opt =
      fit(build_fit_problem(Target::BoltzmannShannon, 2, -1.0, 1.0)).map;
  const RenormalizationMap jet = taylor_map(Target::BoltzmannShannon, 2, 0.0);
  double worst_opt = 0.0, worst_jet = 0.0;
  for (int i = 0; i <= 500; ++i) {
    const double x = -3.0 + 8.0 * i / 500.0;
    const double e = std::exp(x);
    worst_opt = std::max(worst_opt, std::abs(opt(x) - e));
    worst_jet = std::max(worst_jet, std::abs(jet(x) - e));
  }
  CHECK(worst_opt < worst_jet);
}
