#include <doctest.h>

#include <cmath>

#include "affinity/errors.hpp"
#include "affinity/estimation.hpp"
#include "test_support.hpp"

using namespace affinity;

TEST_CASE("gradient at B = 0 is the independence moment minus the sample moment") {
  Rng rng(21);
  const Index n = 30;
  const Matrix X = testsup::normal_matrix(rng, n, 2);
  const Matrix Y = testsup::normal_matrix(rng, n, 2);
  const auto sample = testsup::sample_from(X, Y);
  const auto obj = objective_and_gradient(Matrix::Zero(2, 2), sample);

  const Vector xbar = X.colwise().mean();
  const Vector ybar = Y.colwise().mean();
  const Matrix expected = xbar * ybar.transpose() - X.transpose() * Y / static_cast<double>(n);
  CHECK((obj.gradient - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("objective gradient matches central finite differences") {
  Rng rng(22);
  const Index n = 50;
  const Matrix X = testsup::normal_matrix(rng, n, 3);
  const Matrix Y = testsup::normal_matrix(rng, n, 3);
  const auto sample = testsup::sample_from(X, Y);
  const Matrix B = testsup::uniform_matrix(rng, 3, 3, -0.6, 0.6);

  EstimationOptions tight;
  tight.inner_tol = 1e-13;
  const auto at = [&](const Matrix& Bq) {
    return objective_and_gradient(Bq, sample);
  };
  const auto base = at(B);
  const double h = 1e-5;
  for (Index k = 0; k < 3; ++k)
    for (Index l = 0; l < 3; ++l) {
      Matrix Bp = B, Bm = B;
      Bp(k, l) += h;
      Bm(k, l) -= h;
      const double fd = (at(Bp).value - at(Bm).value) / (2.0 * h);
      CHECK(std::abs(fd - base.gradient(k, l)) <=
            1e-5 * std::max(1.0, std::abs(base.gradient(k, l))));
    }
}

TEST_CASE("estimation drives the moment residuals to zero") {
  Rng rng(23);
  const Index n = 120;
  const Matrix X = testsup::normal_matrix(rng, n, 2);
  Matrix Y = 0.6 * X + 0.8 * testsup::normal_matrix(rng, n, 2);  // sorted couples
  const auto sample = testsup::sample_from(X, Y);
  const auto est = estimate_affinity(sample);
  CHECK(est.converged);
  CHECK(est.moment_residuals.cwiseAbs().maxCoeff() <= 1e-6);

  const auto verify = objective_and_gradient(est.B, sample);
  CHECK(verify.gradient.cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("objective is convex along random segments") {
  Rng rng(24);
  const Index n = 40;
  const auto sample = testsup::sample_from(testsup::normal_matrix(rng, n, 2),
                                           testsup::normal_matrix(rng, n, 2));
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix B1 = testsup::uniform_matrix(rng, 2, 2, -1.0, 1.0);
    const Matrix B2 = testsup::uniform_matrix(rng, 2, 2, -1.0, 1.0);
    const double t = rng.uniform(0.05, 0.95);
    const double v1 = objective_and_gradient(B1, sample).value;
    const double v2 = objective_and_gradient(B2, sample).value;
    const double vm = objective_and_gradient(t * B1 + (1.0 - t) * B2, sample).value;
    CHECK(vm <= t * v1 + (1.0 - t) * v2 + 1e-9);
  }
}

TEST_CASE("closed-loop recovery on a small synthetic market") {
  Matrix truth(2, 2);
  truth << 1.5, 0.0, 0.0, 0.4;
  const auto sample = simulate_market(truth, 1.0, 800, 800, 31, testsup::schema_of(2));
  const auto est = estimate_affinity(sample);
  CHECK(est.converged);
  CHECK(std::abs(est.B(0, 0) - 1.5) < 0.3);
  CHECK(std::abs(est.B(1, 1) - 0.4) < 0.3);
  CHECK(std::abs(est.B(0, 1)) < 0.3);
  CHECK(std::abs(est.B(1, 0)) < 0.3);
}

TEST_CASE("two-replicate bootstrap reduces to the two-point standard deviation") {
  Rng rng(25);
  const Index n = 60;
  const auto sample = testsup::sample_from(testsup::normal_matrix(rng, n, 2),
                                           testsup::normal_matrix(rng, n, 2));
  const auto boot = bootstrap_errors(sample, 2, 17);
  REQUIRE(boot.draws.size() == 2);
  const Matrix expected =
      ((boot.draws[0] - boot.draws[1]) / std::sqrt(2.0)).cwiseAbs();
  CHECK((boot.standard_errors - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bootstrap is deterministic in the seed") {
  Rng rng(26);
  const auto sample = testsup::sample_from(testsup::normal_matrix(rng, 50, 2),
                                           testsup::normal_matrix(rng, 50, 2));
  const auto b1 = bootstrap_errors(sample, 8, 5);
  const auto b2 = bootstrap_errors(sample, 8, 5);
  CHECK((b1.standard_errors - b2.standard_errors).cwiseAbs().maxCoeff() == 0.0);
  CHECK(b1.failures == b2.failures);
}

TEST_CASE("estimator contracts and guards") {
  Rng rng(27);
  SUBCASE("iteration cap returns the best iterate flagged unconverged") {
    const auto sample = testsup::sample_from(testsup::normal_matrix(rng, 80, 2),
                                             0.8 * testsup::normal_matrix(rng, 80, 2));
    EstimationOptions opts;
    opts.max_outer = 1;
    const auto est = estimate_affinity(sample, Matrix(), opts);
    CHECK_FALSE(est.converged);
    CHECK(est.B.allFinite());
  }
  SUBCASE("identification floor") {
    const auto sample = testsup::sample_from(testsup::normal_matrix(rng, 3, 3),
                                             testsup::normal_matrix(rng, 3, 3));
    CHECK_THROWS_AS(estimate_affinity(sample), ValidationError);
  }
  SUBCASE("bootstrap needs two replications") {
    const auto sample = testsup::sample_from(testsup::normal_matrix(rng, 20, 2),
                                             testsup::normal_matrix(rng, 20, 2));
    CHECK_THROWS_AS(bootstrap_errors(sample, 1, 0), ValidationError);
  }
}
