#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "paneitz/jets.hpp"

using namespace plab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

std::size_t binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<std::size_t>(std::llround(r));
}

Jet random_polynomial(std::mt19937_64& rng, const Eigen::VectorXd& x, int order, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto X = coordinate_jets(x, order);
  Jet p = Jet::constant(u(rng), static_cast<int>(x.size()), order, X[0].base());
  for (int d = 1; d <= degree; ++d) {
    Jet term = Jet::constant(u(rng), static_cast<int>(x.size()), order, X[0].base());
    for (int k = 0; k < d; ++k) term = term * X[static_cast<std::size_t>(rng() % X.size())];
    p += term;
  }
  return p;
}

}  // namespace

TEST_CASE("layout size is C(n+K, K) and graded") {
  for (int n = 1; n <= 6; ++n)
    for (int K = 0; K <= kMaxJetOrder; ++K) {
      const auto L = JetLayout::get(n, K);
      CHECK(L->size() == binomial(n + K, K));
      for (std::size_t r = 0; r < L->size(); ++r) CHECK(L->rank(L->index(r)) == r);
    }
  const auto L = JetLayout::get(2, 2);
  CHECK(L->index(3) == MultiIndex{2, 0});
  CHECK(L->index(4) == MultiIndex{1, 1});
  CHECK_THROWS_AS(JetLayout::get(2, kMaxJetOrder + 1), OrderError);
}

TEST_CASE("coefficient lookup beyond the order is an error") {
  const auto X = coordinate_jets(vec({1.0, 2.0}), 2);
  CHECK_THROWS_AS(X[0].coeff({2, 1}), OrderError);
  CHECK_THROWS_AS(X[0].coeff({1}), ShapeError);
}

TEST_CASE("difference of squares") {
  const auto X = coordinate_jets(vec({0.0}), 2);
  const Jet p = (1.0 + X[0]) * (1.0 - X[0]);
  CHECK(p.coeffs() == std::vector<double>{1.0, 0.0, -1.0});
}

TEST_CASE("additive identity") {
  const auto X = coordinate_jets(vec({0.3, -0.2}), 3);
  const Jet f = exp(X[0] * X[1]);
  const Jet g = f + Jet::constant_like(0.0, f);
  CHECK(g.coeffs() == f.coeffs());
}

TEST_CASE("(xy)^2 has a single coefficient at (2,2)") {
  const auto X = coordinate_jets(vec({0.0, 0.0}), 4);
  const Jet p = (X[0] * X[1]) * (X[0] * X[1]);
  const auto L = p.layout();
  for (std::size_t r = 0; r < L->size(); ++r) {
    const bool target = L->index(r) == MultiIndex{2, 2};
    CHECK(p.coeffs()[r] == (target ? 1.0 : 0.0));
  }
}

TEST_CASE("mismatched jets are rejected") {
  const auto X = coordinate_jets(vec({0.0, 0.0}), 2);
  const auto Y = coordinate_jets(vec({1.0, 0.0}), 2);
  const auto Z = coordinate_jets(vec({0.0, 0.0}), 3);
  CHECK_THROWS_AS(X[0] + Y[0], ShapeError);
  CHECK_THROWS_AS(X[0] * Z[0], ShapeError);
}

TEST_CASE("elementary functions") {
  SUBCASE("exp of zero") {
    const auto X = coordinate_jets(vec({0.5, 0.5}), 3);
    const Jet e = exp(Jet::constant_like(0.0, X[0]));
    CHECK(e.value() == 1.0);
    for (std::size_t r = 1; r < e.coeffs().size(); ++r) CHECK(e.coeffs()[r] == 0.0);
  }
  SUBCASE("pow(4) of 1 + c/rho") {
    const auto X = coordinate_jets(vec({10.0}), 2);
    const Jet p = pow(1.0 + inv(X[0]), 4.0);
    CHECK(p.value() == doctest::Approx(1.4641).epsilon(1e-14));
    CHECK(p.coeff({1}) == doctest::Approx(-4.0 * std::pow(1.1, 3) / 100.0).epsilon(1e-13));
  }
  SUBCASE("log of a non-positive value") {
    const auto X = coordinate_jets(vec({-1.0}), 2);
    CHECK_THROWS_AS(log(X[0]), DomainError);
    CHECK_THROWS_AS(pow(X[0], 0.5), DomainError);
  }
  SUBCASE("log(exp(f)) = f") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd x = vec({0.3, -0.7, 0.2});
      const Jet f = random_polynomial(rng, x, 5, 4) * 0.2;
      const Jet g = log(exp(f));
      for (std::size_t r = 0; r < f.coeffs().size(); ++r) CHECK(std::abs(g.coeffs()[r] - f.coeffs()[r]) <= 1e-12);
    }
  }
  SUBCASE("sqrt squared and inverse") {
    const auto X = coordinate_jets(vec({1.2, 0.4}), 4);
    const Jet f = 2.0 + X[0] * X[1];
    const Jet s = sqrt(f);
    const Jet back = s * s;
    const Jet one = f * inv(f);
    for (std::size_t r = 0; r < f.coeffs().size(); ++r) {
      CHECK(back.coeffs()[r] == doctest::Approx(f.coeffs()[r]).epsilon(1e-14));
      CHECK(std::abs(one.coeffs()[r] - (r == 0 ? 1.0 : 0.0)) <= 1e-14);
    }
  }
}

TEST_CASE("ring axioms on polynomials") {
  std::mt19937_64 rng(5);
  const Eigen::VectorXd x = vec({0.1, 0.4, -0.3});
  for (int trial = 0; trial < 10; ++trial) {
    const Jet a = random_polynomial(rng, x, 4, 2);
    const Jet b = random_polynomial(rng, x, 4, 2);
    const Jet c = random_polynomial(rng, x, 4, 2);
    const Jet l1 = (a * b) * c, r1 = a * (b * c);
    const Jet l2 = a * (b + c), r2 = a * b + a * c;
    const Jet l3 = a * b, r3 = b * a;
    for (std::size_t r = 0; r < a.coeffs().size(); ++r) {
      const double s = 1.0 + std::abs(l1.coeffs()[r]) + std::abs(l2.coeffs()[r]);
      CHECK(std::abs(l1.coeffs()[r] - r1.coeffs()[r]) <= 1e-14 * s);
      CHECK(std::abs(l2.coeffs()[r] - r2.coeffs()[r]) <= 1e-14 * s);
      CHECK(std::abs(l3.coeffs()[r] - r3.coeffs()[r]) <= 1e-14 * s);
    }
  }
}

TEST_CASE("partial, truncation and restriction to a line") {
  const auto X = coordinate_jets(vec({1.0, 2.0}), 4);
  const Jet f = X[0] * X[0] * X[1];
  CHECK(f.derivative({2, 1}) == doctest::Approx(2.0));
  CHECK(f.partial(0).value() == doctest::Approx(4.0));
  CHECK(f.truncated(2).order() == 2);
  CHECK(f.truncated(2).coeffs()[3] == f.coeffs()[3]);
  // t -> (1 + t)^2 (2 + t) = 2 + 5t + 4t^2 + t^3
  const auto line = restrict_to_line(f, vec({1.0, 1.0}));
  CHECK(line[0] == doctest::Approx(2.0));
  CHECK(line[1] == doctest::Approx(5.0));
  CHECK(line[2] == doctest::Approx(4.0));
  CHECK(line[3] == doctest::Approx(1.0));
}

TEST_CASE("finite-difference oracle") {
  SUBCASE("d/dx x^2 at 3") {
    PointField f = [](const Eigen::VectorXd& y) { return y(0) * y(0); };
    const int a[] = {1};
    CHECK(std::abs(fd_derivative(f, vec({3.0}), a, 1e-4) - 6.0) <= 1e-7);
  }
  SUBCASE("second derivative of sin at 0") {
    PointField f = [](const Eigen::VectorXd& y) { return std::sin(y(0)); };
    const int a[] = {2};
    CHECK(std::abs(fd_derivative(f, vec({0.0}), a)) <= 1e-6);
  }
  SUBCASE("central weights") {
    const auto w = central_weights(2, 1);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(-2.0));
    CHECK(w[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(central_weights(3, 1), ShapeError);
  }
  SUBCASE("Schwarzschild conformal factor") {
    // (1 + m/(2r))^4 in n = 3 with m = 1, every coefficient up to order 4
    auto phi = [](const std::vector<Jet>& X) {
      const Jet r = sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2]);
      return pow(1.0 + 0.5 * inv(r), 4.0);
    };
    PointField f = [&](const Eigen::VectorXd& y) { return phi(coordinate_jets(y, 0)).value(); };
    const Eigen::VectorXd x = vec({2.0, -1.0, 1.5});
    const Jet j = phi(coordinate_jets(x, 4));
    const auto L = j.layout();
    // relative to the largest derivative of the same order
    std::vector<double> scale(5, 0.0);
    for (std::size_t r = 1; r < L->size(); ++r) {
      const auto& a = L->index(r);
      const int m = std::accumulate(a.begin(), a.end(), 0);
      scale[static_cast<std::size_t>(m)] = std::max(scale[static_cast<std::size_t>(m)], std::abs(j.derivative(a)));
    }
    for (std::size_t r = 1; r < L->size(); ++r) {
      const auto& a = L->index(r);
      const int m = std::accumulate(a.begin(), a.end(), 0);
      const double h = m <= 2 ? 2e-2 : 5e-2;
      const double fd = fd_derivative(f, x, a, h, 8);
      CHECK(std::abs(fd - j.derivative(a)) <= 1e-6 * scale[static_cast<std::size_t>(m)]);
    }
  }
}
