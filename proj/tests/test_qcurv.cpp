#include <doctest.h>

#include <cmath>
#include <random>

#include "paneitz/metrics.hpp"
#include "paneitz/qcurv.hpp"

using namespace plab;

namespace {

Eigen::VectorXd point(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

Jet radius_squared(const std::vector<Jet>& X) {
  Jet s = Jet::constant_like(0.0, X[0]);
  for (const auto& xi : X) s += xi * xi;
  return s;
}

}  // namespace

TEST_CASE("Q of the round sphere") {
  for (int n = 3; n <= 7; ++n) {
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, -0.3, 0.4);
    const QCurvature q = q_curvature(sphere_stereo(n).jet(x, 4));
    const double expect = n * (n * n - 4.0) / 8.0;
    CHECK(q.q_sigma == doctest::Approx(expect).epsilon(1e-10));
    CHECK(q.q_expanded == doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK(q_curvature(round_s4_chart().jet(point({0, 0, 0, 0}), 4)).q == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("Q vanishes on flat space and its two forms agree elsewhere") {
  CHECK(q_curvature(flat(5).jet(point({1, 0, 2, 0, 1}), 4)).q == 0.0);
  for (const MetricFamily& f : {bump(5, 0.05), bump(4, 0.05), c_family(6, 0.2), radial_tail(3, 0.5)}) {
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(f.dim, 0.5, 1.5);
    const QCurvature q = q_curvature(f.jet(x, 4));
    CHECK(std::abs(q.q_sigma - q.q_expanded) <= 1e-10 * std::max(1.0, std::abs(q.q)));
  }
  CHECK_THROWS_AS(q_curvature(flat(5).jet(point({1, 0, 2, 0, 1}), 3)), OrderError);
}

TEST_CASE("Paneitz operator on flat space") {
  // |x|^2 is biharmonic; |x|^{-1} is the fundamental solution of Δ^2 in five dimensions
  const Eigen::VectorXd x = point({2, 0, 0, 0, 0});
  const MetricJet g = flat(5).jet(x, 4);
  const auto X = coordinate_jets(x, 4);
  CHECK(std::abs(paneitz_apply(g, radius_squared(X))) <= 1e-14);
  CHECK(std::abs(paneitz_apply(g, pow(radius_squared(X), -0.5))) <= 1e-13);
  // Δ^2 |x|^4 = 8 n (n + 2) in n dimensions
  const Jet r4 = radius_squared(X) * radius_squared(X);
  CHECK(paneitz_apply(g, r4) == doctest::Approx(8.0 * 5 * 7).epsilon(1e-13));
}

TEST_CASE("conformal transformation laws") {
  SUBCASE("Q-power on a five-dimensional bump") {
    const Eigen::VectorXd x = point({0.4, 0.3, -0.8, 1.1, 0.2});
    const MetricJet g = bump(5, 0.05).jet(x, 4);
    const auto X = coordinate_jets(x, 4);
    const Jet u = 1.0 + 0.2 * X[0] - 0.1 * X[1] * X[2] + 0.05 * X[3] * X[3];
    const TransformCheck t = q_transform_check(g, ConformalMode::QPower, u);
    CHECK(t.residual <= 1e-9 * std::max(1.0, std::abs(t.lhs)));
    const Jet phi = 1.0 + 0.3 * X[4] * X[0] - 0.2 * X[2];
    const TransformCheck p = paneitz_covariance_check(g, ConformalMode::QPower, u, phi);
    CHECK(p.residual <= 1e-9 * std::max(1.0, std::abs(p.lhs)));
  }
  SUBCASE("exponential in four dimensions") {
    const Eigen::VectorXd x = point({0.2, -0.5, 0.1, 0.7});
    const MetricJet g = sphere_stereo(4).jet(x, 4);
    const auto X = coordinate_jets(x, 4);
    const Jet u = 0.1 * X[0] * X[1] - 0.3 * X[2] + 0.2 * X[3] * X[3] * X[3];
    const TransformCheck t = q_transform_check(g, ConformalMode::Exponential, u);
    CHECK(t.residual <= 1e-9 * std::max(1.0, std::abs(t.lhs)));
    const TransformCheck p = paneitz_covariance_check(g, ConformalMode::Exponential, u, 1.0 + X[1] * X[2]);
    CHECK(p.residual <= 1e-9 * std::max(1.0, std::abs(p.lhs)));
  }
  SUBCASE("Yamabe in three dimensions") {
    const Eigen::VectorXd x = point({1.0, 0.5, -0.5});
    const MetricJet g = bump(3, 0.05).jet(x, 4);
    const auto X = coordinate_jets(x, 4);
    const TransformCheck t = q_transform_check(g, ConformalMode::Yamabe, 2.0 + 0.3 * X[0] * X[2]);
    CHECK(t.residual <= 1e-10 * std::max(1.0, std::abs(t.lhs)));
  }
  SUBCASE("mode and dimension mismatch") {
    const Eigen::VectorXd x = point({1.0, 0.5, -0.5, 0.2});
    const MetricJet g = flat(4).jet(x, 4);
    const Jet u = Jet::constant_like(1.0, coordinate_jets(x, 4)[0]);
    CHECK_THROWS(q_transform_check(g, ConformalMode::QPower, u));
  }
}

TEST_CASE("A-tensor") {
  SUBCASE("vanishes on Ricci-flat metrics") {
    const MetricFamily s = schwarzschild_spacetime(1.0);
    const PointTensor A = a_tensor_value(s.jet(point({0.0, 3.0, 1.0, -1.0}), 4), 0.7, -1.3);
    for (double v : A.data()) CHECK(std::abs(v) <= 1e-12);
    const PointTensor M = a_tensor_value(minkowski(3).jet(point({0, 1, 2, 3}), 4), 1.0, 1.0);
    for (double v : M.data()) CHECK(v == 0.0);
  }
  SUBCASE("Einstein metrics in four dimensions") {
    // on S^4 every term of A is a multiple of g and they cancel for every coupling
    const PointTensor A = a_tensor_value(sphere_stereo(4).jet(point({0.2, 0.1, -0.3, 0.4}), 4), 0.7, -1.3);
    for (double v : A.data()) CHECK(std::abs(v) <= 1e-10);
  }
  SUBCASE("divergence free") {
    std::mt19937_64 rng(7);
    const MetricFamily f = polynomial_perturbation(4, 1e-2, rng);
    for (auto [alpha, beta] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {0.7, -1.3}}) {
      const ADivergence d = a_divergence(f.jet(point({0.2, -0.3, 0.1, 0.4}), 5), alpha, beta);
      CHECK(d.relative_residual <= 1e-6);
      CHECK(d.scale > 0.0);
    }
  }
}
