#include <doctest.h>

#include <cmath>
#include <random>

#include "paneitz/geometry.hpp"
#include "paneitz/metrics.hpp"

using namespace plab;

namespace {

Eigen::VectorXd point(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

double max_abs(const PointTensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

// Pullback of a family through the linear chart x = Q z.
MetricJet rotated_jet(const MetricFamily& f, const Eigen::MatrixXd& Q, const Eigen::VectorXd& z, int order) {
  const int n = f.dim;
  const auto Z = coordinate_jets(z, order);
  std::vector<Jet> X;
  for (int i = 0; i < n; ++i) {
    Jet xi = Jet::constant_like(0.0, Z[0]);
    for (int a = 0; a < n; ++a) xi.add_scaled(Q(i, a), Z[static_cast<std::size_t>(a)]);
    X.push_back(xi);
  }
  const MetricJet g = f.jet_from(X);
  std::vector<Jet> out;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet s = Jet::constant_like(0.0, Z[0]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s.add_scaled(Q(i, a) * Q(j, b), g(i, j));
      out.push_back(s);
    }
  return MetricJet(out);
}

}  // namespace

TEST_CASE("flat metric has zero curvature") {
  const CurvaturePack cp = curvature_at(flat(5).jet(point({1, 2, 3, 4, 5}), 4));
  CHECK(max_abs(values(cp.riemann_down)) == 0.0);
  CHECK(cp.scalar.value() == 0.0);
  CHECK(max_abs(values(cp.weyl)) == 0.0);
}

TEST_CASE("scalar curvature of reference metrics") {
  CHECK(curvature_at(sphere_stereo(2).jet(point({0.3, -0.2}), 2)).scalar.value() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(curvature_at(schwarzschild_slice(3, 1.0).jet(point({4, 0, 0}), 2)).scalar.value()) <= 1e-12);
  CHECK(std::abs(curvature_at(schwarzschild_slice(5, 1.0).jet(point({1, 1, 0, 1, 0.5}), 2)).scalar.value()) <= 1e-12);
  CHECK(curvature_at(sphere_stereo(5).jet(point({0.1, 0.2, 0.3, 0.4, 0.5}), 2)).scalar.value() ==
        doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("Laplace-Beltrami on flat space") {
  const Eigen::VectorXd x = point({0.5, -1.0, 2.0, 0.3, 1.0});
  const Connection c = connection(flat(5).jet(x, 4));
  const auto X = coordinate_jets(x, 4);
  Jet r2 = Jet::constant_like(0.0, X[0]);
  for (const auto& xi : X) r2 += xi * xi;
  CHECK(laplace_beltrami(r2, c).value() == doctest::Approx(10.0).epsilon(1e-14));

  const Eigen::VectorXd y = point({2, 0, 0, 0, 0});
  const Connection cy = connection(flat(5).jet(y, 4));
  const auto Y = coordinate_jets(y, 4);
  Jet s = Jet::constant_like(0.0, Y[0]);
  for (const auto& yi : Y) s += yi * yi;
  CHECK(laplace_beltrami(pow(s, -0.5), cy).value() == doctest::Approx(-0.25).epsilon(1e-13));
}

TEST_CASE("contracted Bianchi identity") {
  for (const MetricFamily& f : {schwarzschild_slice(4, 1.0), bump(5, 0.05), sphere_stereo(3)}) {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(f.dim, 0.4, 1.3);
    const MetricJet g = f.jet(x, 4);
    const Connection c = connection(g);
    const JetTensor ric = ricci_tensor(c);
    const Jet R = scalar_curvature(c, ric);
    const PointTensor div = values(divergence_sym2(ric, c));
    for (int b = 0; b < f.dim; ++b)
      CHECK(std::abs(div[static_cast<std::size_t>(b)] - 0.5 * R.partial(b).value()) <= 1e-11);
  }
}

TEST_CASE("algebraic symmetries of the curvature tensor") {
  const MetricFamily f = bump(4, 0.05);
  const MetricJet g = f.jet(point({0.7, -0.4, 1.1, 0.2}), 3);
  const PointTensor R = values(curvature_at(g).riemann_down);
  const int n = 4;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          worst = std::max(worst, std::abs(R({i, j, k, l}) + R({j, i, k, l})));
          worst = std::max(worst, std::abs(R({i, j, k, l}) + R({i, j, l, k})));
          worst = std::max(worst, std::abs(R({i, j, k, l}) - R({k, l, i, j})));
          worst = std::max(worst, std::abs(R({i, j, k, l}) + R({i, k, l, j}) + R({i, l, j, k})));
        }
  CHECK(worst <= 1e-13);
  CHECK(max_abs(R) > 1e-4);
}

TEST_CASE("Weyl tensor is traceless and conformally invariant") {
  const MetricFamily f = bump(5, 0.05);
  const Eigen::VectorXd x = point({0.3, 0.9, -0.5, 0.1, 0.6});
  const MetricJet g = f.jet(x, 3);
  const auto X = coordinate_jets(x, 3);
  const Jet w = exp(0.3 * X[0] - 0.2 * X[1] * X[2] + 0.1 * X[4] * X[4] * X[3]);
  const MetricJet gw = conformal_metric(g, w);
  const PointTensor W = values(curvature_at(g).weyl);
  const PointTensor Ww = values(curvature_at(gw).weyl);
  CHECK(max_abs(W) > 1e-4);
  for (std::size_t k = 0; k < W.size(); ++k) CHECK(std::abs(Ww[k] - w.value() * W[k]) <= 1e-12);
  const Eigen::MatrixXd gi = g.value().inverse();
  for (int j = 0; j < 5; ++j)
    for (int l = 0; l < 5; ++l) {
      double tr = 0.0;
      for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) tr += gi(i, k) * W({i, j, k, l});
      CHECK(std::abs(tr) <= 1e-13);
    }
}

TEST_CASE("curvature invariants survive a rigid rotation of the chart") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  const MetricFamily f = bump(4, 0.05);
  Eigen::MatrixXd A(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = N(rng);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
  const Eigen::VectorXd z = point({0.5, -0.8, 0.2, 1.0});
  const CurvaturePack rotated = curvature_at(rotated_jet(f, Q, z, 4));
  const CurvaturePack direct = curvature_at(f.jet(Q * z, 4));
  CHECK(rotated.scalar.value() == doctest::Approx(direct.scalar.value()).epsilon(1e-11));
  const Eigen::MatrixXd gr = rotated_jet(f, Q, z, 0).value().inverse();
  const Eigen::MatrixXd gd = f.value(Q * z).inverse();
  CHECK(squared_norm(rotated.riemann_down, gr) == doctest::Approx(squared_norm(direct.riemann_down, gd)).epsilon(1e-11));
  CHECK(squared_norm(rotated.weyl, gr) == doctest::Approx(squared_norm(direct.weyl, gd)).epsilon(1e-11));
}

TEST_CASE("second fundamental form of a flat coordinate sphere") {
  const double r = 2.0;
  const Eigen::VectorXd x = point({r, 0, 0, 0});
  const SecondFundamentalForm s = second_fundamental_form(r, flat(4).jet(x, 1));
  CHECK(s.H == doctest::Approx(1.5).epsilon(1e-14));
  for (std::size_t k = 0; k < s.II.size(); ++k) CHECK(std::abs(s.II[k] - 0.5 * s.induced[k]) <= 1e-14);
  CHECK(s.normal(0) == doctest::Approx(-1.0));
  CHECK_THROWS(second_fundamental_form(3.0, flat(4).jet(x, 1)));
}

TEST_CASE("metric jet validation") {
  const auto X = coordinate_jets(point({0.0, 0.0}), 2);
  const Jet one = Jet::constant_like(1.0, X[0]);
  CHECK_THROWS_AS(MetricJet({one, X[0], X[1], one}), ShapeError);
  CHECK_THROWS_AS(MetricJet({one, one, one, one}), DegeneracyError);
  CHECK_THROWS_AS(MetricJet({one, one, one}), ShapeError);
}
