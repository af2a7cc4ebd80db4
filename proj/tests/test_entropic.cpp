#include <doctest.h>

#include <cmath>

#include "affinity/entropic.hpp"
#include "affinity/errors.hpp"
#include "test_support.hpp"

using namespace affinity;

TEST_CASE("surplus matrix hand cases") {
  SUBCASE("zero affinity") {
    Rng rng(1);
    const Matrix X = testsup::normal_matrix(rng, 4, 2);
    const Matrix Y = testsup::normal_matrix(rng, 5, 2);
    const Matrix Phi = surplus_matrix(Matrix::Zero(2, 2), X, Y);
    CHECK(Phi.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("identity on unit vectors") {
    Matrix X(1, 2), Y(1, 2);
    X << 1, 0;
    Y << 1, 0;
    const Matrix Phi = surplus_matrix(Matrix::Identity(2, 2), X, Y);
    CHECK(Phi(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("hand bilinear evaluation") {
    Matrix A(2, 2);
    A << 1, 2, 3, 4;
    Matrix X(1, 2), Y(1, 2);
    X << 1, 1;
    Y << 1, -1;
    const Matrix Phi = surplus_matrix(A, X, Y);
    CHECK(Phi(0, 0) == doctest::Approx(-2.0));  // (1-2)+(3-4)
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(surplus_matrix(Matrix::Zero(2, 3), Matrix::Zero(4, 2), Matrix::Zero(4, 2)),
                    DimensionMismatch);
  }
}

TEST_CASE("2x2 symmetric equilibrium matches the closed form and the naive oracle") {
  Matrix X(2, 2), Y(2, 2);
  X << 1, 0, 0, 1;
  Y << 1, 0, 0, 1;
  const Vector half = Vector::Constant(2, 0.5);
  const Matrix A = Matrix::Identity(2, 2);  // Phi = identity on these types
  const auto m = solve_equilibrium(A, 1.0, X, Y, half, half);

  const double expected = std::exp(1.0) / (2.0 * (1.0 + std::exp(1.0)));
  CHECK(m.pi(0, 0) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(m.pi(1, 1) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(m.pi(0, 1) == doctest::Approx(0.5 - expected).epsilon(1e-10));

  const Matrix oracle = testsup::naive_ipfp(surplus_matrix(A, X, Y), 1.0, half, half, 200);
  CHECK((m.pi - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero affinity gives the independence coupling") {
  Rng rng(2);
  const Matrix X = testsup::normal_matrix(rng, 7, 3);
  const Matrix Y = testsup::normal_matrix(rng, 9, 3);
  const Vector p = testsup::random_simplex(rng, 7);
  const Vector q = testsup::random_simplex(rng, 9);
  const auto m = solve_equilibrium(Matrix::Zero(3, 3), 0.7, X, Y, p, q);
  CHECK((m.pi - p * q.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("matching depends only on A/sigma") {
  Rng rng(3);
  const Matrix X = testsup::normal_matrix(rng, 12, 2);
  const Matrix Y = testsup::normal_matrix(rng, 10, 2);
  const Vector p = testsup::random_simplex(rng, 12);
  const Vector q = testsup::random_simplex(rng, 10);
  const Matrix A = testsup::uniform_matrix(rng, 2, 2, -1.0, 1.0);
  const auto m1 = solve_equilibrium(A, 0.8, X, Y, p, q);
  const auto m2 = solve_equilibrium(2.0 * A, 1.6, X, Y, p, q);
  CHECK((m1.pi - m2.pi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("marginals and the log-linear identity hold as stored") {
  Rng rng(4);
  const Index nm = 15, nw = 11;
  const Matrix X = testsup::normal_matrix(rng, nm, 3);
  const Matrix Y = testsup::normal_matrix(rng, nw, 3);
  const Vector p = testsup::random_simplex(rng, nm);
  const Vector q = testsup::random_simplex(rng, nw);
  const Matrix A = testsup::uniform_matrix(rng, 3, 3, -1.5, 1.5);
  const double sigma = 0.6;
  const auto m = solve_equilibrium(A, sigma, X, Y, p, q);

  CHECK(m.marginal_error <= 1e-10);
  CHECK((m.pi.rowwise().sum() - p).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((m.pi.colwise().sum().transpose() - q).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((m.pi.array() > 0.0).all());

  const Matrix Phi = surplus_matrix(A, X, Y);
  for (Index i = 0; i < nm; ++i)
    for (Index j = 0; j < nw; ++j) {
      const double lhs = sigma * std::log(m.pi(i, j));
      const double rhs = Phi(i, j) - m.a(i) - m.b(j);
      CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(rhs)));
    }

  // Potentials are pinned by p . a = 0.
  CHECK(std::abs(p.dot(m.a)) < 1e-9);
}

TEST_CASE("social gain: entropy-only case and the potential identity") {
  Matrix X(2, 1), Y(2, 1);
  X << 1, -1;
  Y << 1, -1;
  const Vector half = Vector::Constant(2, 0.5);
  const double sigma = 1.3;
  SUBCASE("zero affinity is pure entropy") {
    const auto m = solve_equilibrium(Matrix::Zero(1, 1), sigma, X, Y, half, half);
    const Matrix Phi = Matrix::Zero(2, 2);
    CHECK(social_gain(m, Phi) == doctest::Approx(sigma * std::log(4.0)).epsilon(1e-10));
  }
  SUBCASE("four-cell hand sum at identity surplus") {
    Matrix A(1, 1);
    A << 1.0;
    const auto m = solve_equilibrium(A, 1.0, X, Y, half, half);
    const Matrix Phi = surplus_matrix(A, X, Y);
    double hand = 0.0;
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j)
        hand += m.pi(i, j) * Phi(i, j) - m.pi(i, j) * std::log(m.pi(i, j));
    CHECK(social_gain(m, Phi) == doctest::Approx(hand).epsilon(1e-12));
    // W also equals p.a + q.b by the log-linear structure.
    const double from_potentials = half.dot(m.a) + half.dot(m.b);
    CHECK(social_gain(m, Phi) == doctest::Approx(from_potentials).epsilon(1e-9));
  }
}

TEST_CASE("social gain is positively homogeneous in (A, sigma)") {
  Rng rng(5);
  const Matrix X = testsup::normal_matrix(rng, 8, 2);
  const Matrix Y = testsup::normal_matrix(rng, 8, 2);
  const Vector p = Vector::Constant(8, 0.125);
  const Matrix A = testsup::uniform_matrix(rng, 2, 2, -1.0, 1.0);
  const auto m1 = solve_equilibrium(A, 0.9, X, Y, p, p);
  const auto m2 = solve_equilibrium(2.0 * A, 1.8, X, Y, p, p);
  const double w1 = social_gain(m1, surplus_matrix(A, X, Y));
  const double w2 = social_gain(m2, surplus_matrix(2.0 * A, X, Y));
  CHECK(w2 == doctest::Approx(2.0 * w1).epsilon(1e-9));
}

TEST_CASE("entropy bound attained at zero affinity with uniform marginals") {
  Matrix X(3, 1), Y(3, 1);
  X << 0, 1, 2;
  Y << 0, 1, 2;
  const Vector u = Vector::Constant(3, 1.0 / 3.0);
  const auto m = solve_equilibrium(Matrix::Zero(1, 1), 1.0, X, Y, u, u);
  const double entropy = -(m.pi.array() * m.pi.array().log()).sum();
  CHECK(entropy == doctest::Approx(std::log(9.0)).epsilon(1e-10));

  Rng rng(6);
  Matrix A(1, 1);
  A << 0.8;
  const auto skewed = solve_equilibrium(A, 1.0, X, Y, u, u);
  const double skew_entropy = -(skewed.pi.array() * skewed.pi.array().log()).sum();
  CHECK(skew_entropy <= std::log(9.0) + 1e-12);
}

TEST_CASE("surplus shares split the surplus") {
  SUBCASE("zero potentials give an even split") {
    EquilibriumMatching m;
    m.pi = Matrix::Constant(2, 2, 0.25);
    m.a = Vector::Zero(2);
    m.b = Vector::Zero(2);
    m.sigma = 1.0;
    Matrix Phi(2, 2);
    Phi << 1, 2, 3, 4;
    const auto s = surplus_shares(m, Phi);
    CHECK((s.U - Phi / 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.V - Phi / 2).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("U + V = Phi exactly and U matches the potential algebra") {
    Matrix X(2, 2), Y(2, 2);
    X << 1, 0, 0, 1;
    Y << 1, 0, 0, 1;
    const Vector half = Vector::Constant(2, 0.5);
    Matrix A(2, 2);
    A << 1.0, 0.3, -0.2, 0.7;
    const auto m = solve_equilibrium(A, 1.0, X, Y, half, half);
    const Matrix Phi = surplus_matrix(A, X, Y);
    const auto s = surplus_shares(m, Phi);
    CHECK(((s.U + s.V) - Phi).cwiseAbs().maxCoeff() <=
          2e-16 * (1.0 + Phi.cwiseAbs().maxCoeff()));
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j) {
        CHECK(s.U(i, j) ==
              doctest::Approx((Phi(i, j) + m.a(i) - m.b(j)) / 2.0).epsilon(1e-12));
        CHECK(s.V(i, j) ==
              doctest::Approx((Phi(i, j) + m.b(j) - m.a(i)) / 2.0).epsilon(1e-10));
      }
  }
}

TEST_CASE("gradient of the social gain equals the cross moments") {
  Rng rng(7);
  const Index n = 20;
  const Matrix X = testsup::normal_matrix(rng, n, 2);
  const Matrix Y = testsup::normal_matrix(rng, n, 2);
  const Vector u = Vector::Constant(n, 1.0 / n);
  Matrix A = testsup::uniform_matrix(rng, 2, 2, -0.8, 0.8);
  const double sigma = 1.0;
  const double h = 1e-5;
  for (Index k = 0; k < 2; ++k)
    for (Index l = 0; l < 2; ++l) {
      Matrix Ap = A, Am = A;
      Ap(k, l) += h;
      Am(k, l) -= h;
      const auto mp = solve_equilibrium(Ap, sigma, X, Y, u, u, 1e-12);
      const auto mm = solve_equilibrium(Am, sigma, X, Y, u, u, 1e-12);
      const double fd = (social_gain(mp, surplus_matrix(Ap, X, Y)) -
                         social_gain(mm, surplus_matrix(Am, X, Y))) /
                        (2.0 * h);
      const auto m0 = solve_equilibrium(A, sigma, X, Y, u, u, 1e-12);
      double analytic = 0.0;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) analytic += m0.pi(i, j) * X(i, k) * Y(j, l);
      CHECK(std::abs(fd - analytic) <= 1e-5 * std::max(1.0, std::abs(analytic)));
    }
}

TEST_CASE("sampling follows the density") {
  SUBCASE("concentrated density sends every draw to one cell") {
    Matrix X(2, 1), Y(2, 1);
    X << 1, -1;
    Y << 1, -1;
    EquilibriumMatching m;
    m.pi.resize(2, 2);
    m.pi << 1.0 - 3e-13, 1e-13, 1e-13, 1e-13;
    m.a = Vector::Zero(2);
    m.b = Vector::Zero(2);
    const auto sample = sample_couples(m, X, Y, 50, 99, testsup::schema_of(1));
    CHECK((sample.X.array() == 1.0).all());
    CHECK((sample.Y.array() == 1.0).all());
  }
  SUBCASE("same seed reproduces the sample") {
    Matrix X(3, 1), Y(3, 1);
    X << 0, 1, 2;
    Y << 0, 1, 2;
    const Vector u = Vector::Constant(3, 1.0 / 3.0);
    const auto m = solve_equilibrium(Matrix::Zero(1, 1), 1.0, X, Y, u, u);
    const auto s1 = sample_couples(m, X, Y, 40, 7, testsup::schema_of(1));
    const auto s2 = sample_couples(m, X, Y, 40, 7, testsup::schema_of(1));
    CHECK((s1.X - s2.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s1.Y - s2.Y).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("empirical frequencies match the independence density") {
    Matrix X(2, 1), Y(2, 1);
    X << 0, 1;
    Y << 0, 1;
    const Vector half = Vector::Constant(2, 0.5);
    const auto m = solve_equilibrium(Matrix::Zero(1, 1), 1.0, X, Y, half, half);
    const long n = 100000;
    const auto sample = sample_couples(m, X, Y, n, 12345, testsup::schema_of(1));
    // Each cell has pi = 1/4; multinomial SE = sqrt(p(1-p)/n).
    const double se = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
    for (double mx : {0.0, 1.0})
      for (double fy : {0.0, 1.0}) {
        double freq = 0.0;
        for (Index k = 0; k < n; ++k)
          if (sample.X(k, 0) == mx && sample.Y(k, 0) == fy) freq += 1.0;
        freq /= static_cast<double>(n);
        CHECK(std::abs(freq - 0.25) <= 3.0 * se);
      }
  }
}

TEST_CASE("solver error paths") {
  Rng rng(71);
  const Matrix X = testsup::normal_matrix(rng, 6, 2);
  const Matrix Y = testsup::normal_matrix(rng, 6, 2);
  const Vector p = testsup::random_simplex(rng, 6);
  const Vector q = testsup::random_simplex(rng, 6);
  Matrix A(2, 2);
  A << 1.0, -0.5, 0.4, 0.9;
  SUBCASE("iteration cap raises NonConvergence with diagnostics") {
    try {
      solve_equilibrium(A, 1.0, X, Y, p, q, 1e-14, 1);
      FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
      CHECK(e.iterations == 1);
      CHECK(e.marginal_error > 1e-14);
    }
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(solve_equilibrium(A, 0.0, X, Y, p, q), ValidationError);
    Vector bad(6);
    bad << 0.0, 0.2, 0.2, 0.2, 0.2, 0.2;
    CHECK_THROWS_AS(solve_equilibrium(A, 1.0, X, Y, bad, q), ValidationError);
    CHECK_THROWS_AS(solve_equilibrium(A, 1.0, X, Y, p, q, -1.0), ValidationError);
  }
}

TEST_CASE("densities unrepresentable even in log space raise NumericalOverflow") {
  Matrix X(2, 1), Y(2, 1);
  X << 1, -1;
  Y << 1, -1;
  const Vector half = Vector::Constant(2, 0.5);
  Matrix A(1, 1);
  A << 800.0;  // off-diagonal log density ~ -1600
  CHECK_THROWS_AS(solve_equilibrium(A, 1.0, X, Y, half, half), NumericalOverflow);
}

TEST_CASE("simulate_market is deterministic and well-formed") {
  Matrix A = Matrix::Identity(2, 2);
  const auto s1 = simulate_market(A, 1.0, 50, 100, 42, testsup::schema_of(2));
  const auto s2 = simulate_market(A, 1.0, 50, 100, 42, testsup::schema_of(2));
  CHECK(s1.size() == 100);
  CHECK((s1.X - s2.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1.Y - s2.Y).cwiseAbs().maxCoeff() == 0.0);
}
