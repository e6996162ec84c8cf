#include <doctest.h>

#include <random>

#include "paneitz/geometry.hpp"
#include "paneitz/metrics.hpp"
#include "paneitz/tensor.hpp"

using namespace plab;

namespace {

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = u(rng);
  return A * A.transpose() + Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("trace of the identity") {
  PointTensor I(5, {Variance::Up, Variance::Down}, 0.0);
  for (int i = 0; i < 5; ++i) I({i, i}) = 1.0;
  const PointTensor t = contract(I, 0, 1);
  CHECK(t.rank() == 0);
  CHECK(t[0] == 5.0);
  PointTensor g(5, lower_slots(2), 0.0);
  CHECK_THROWS_AS(contract(g, 0, 1), ShapeError);
}

TEST_CASE("declared symmetries are enforced") {
  PointTensor t(3, lower_slots(2), 0.0);
  t({0, 1}) = 1.0;
  t({1, 0}) = 1.0;
  CHECK_NOTHROW(t.declare_symmetry(0, 1));
  PointTensor s(3, lower_slots(2), 0.0);
  s({0, 1}) = 1.0;
  CHECK_THROWS_AS(s.declare_symmetry(0, 1), ShapeError);
  CHECK_THROWS_AS(t({0, 3}), ShapeError);
  CHECK_THROWS_AS(t({0}), ShapeError);
}

TEST_CASE("round S^2: Ricci equals g and R_0101 = det g") {
  const MetricFamily f = sphere_stereo(2);
  Eigen::VectorXd x(2);
  x << 0.3, -0.2;
  const CurvaturePack cp = curvature_at(f.jet(x, 2));
  const Eigen::MatrixXd g = f.value(x);
  const PointTensor ric = values(cp.ricci);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(ric({i, j}) == doctest::Approx(g(i, j)).epsilon(1e-12));
  const PointTensor riem = values(cp.riemann_down);
  CHECK(riem({0, 1, 0, 1}) == doctest::Approx(g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1)).epsilon(1e-12));
  CHECK(riem({0, 1, 1, 0}) == doctest::Approx(-riem({0, 1, 0, 1})).epsilon(1e-12));
}

TEST_CASE("Lorentzian raise flips the time component") {
  const MetricFamily f = minkowski(3);
  const Eigen::MatrixXd g = f.value(Eigen::Vector4d(0.0, 1.0, 2.0, 3.0));
  const PointTensor G = from_matrix(g, Variance::Down);
  const PointTensor Gi = from_matrix(g.inverse(), Variance::Up);
  PointTensor v(4, lower_slots(1), 0.0);
  v[0] = 1.0;
  v[2] = 1.0;
  const PointTensor up = raise_lower(v, 0, G, Gi);
  CHECK(up.slots()[0] == Variance::Up);
  CHECK(up[0] == -1.0);
  CHECK(up[2] == 1.0);
  CHECK(inner_product(v, v, G, Gi) == doctest::Approx(0.0));
}

TEST_CASE("norms of the metric and of Ric on S^4") {
  const MetricFamily f = sphere_stereo(4);
  Eigen::VectorXd x(4);
  x << 0.4, 0.1, -0.3, 0.2;
  const MetricJet g = f.jet(x, 2);
  const CurvaturePack cp = curvature_at(g);
  const Eigen::MatrixXd gi = g.value().inverse();
  const PointTensor G = from_matrix(g.value(), Variance::Down);
  const PointTensor Gi = from_matrix(gi, Variance::Up);
  CHECK(inner_product(G, G, G, Gi) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(squared_norm(cp.ricci, gi) == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(cp.scalar.value() == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("raise then lower is the identity") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    const Eigen::MatrixXd g = random_spd(n, rng);
    const PointTensor G = from_matrix(g, Variance::Down);
    const PointTensor Gi = from_matrix(g.inverse(), Variance::Up);
    PointTensor t(n, {Variance::Down, Variance::Up, Variance::Down}, 0.0);
    for (auto& v : t.data()) v = u(rng);
    for (int s = 0; s < 3; ++s) {
      const PointTensor back = raise_lower(raise_lower(t, s, G, Gi), s, G, Gi);
      CHECK(back.slots() == t.slots());
      for (std::size_t k = 0; k < t.size(); ++k) CHECK(std::abs(back[k] - t[k]) <= 1e-12 * std::max(1.0, std::abs(t[k])));
    }
    CHECK(inner_product(t, t, G, Gi) >= 0.0);
  }
}

TEST_CASE("degenerate metric is rejected") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(3, 3);
  g(2, 2) = 0.0;
  PointTensor v(3, lower_slots(1), 1.0);
  CHECK_THROWS_AS(raise_lower(v, 0, from_matrix(g, Variance::Down), from_matrix(g, Variance::Up)), DegeneracyError);
}

TEST_CASE("Kulkarni-Nomizu product of g with itself") {
  // g ∧ g = 2 (g_ik g_jl - g_il g_jk), twice the unit-sphere curvature tensor
  const MetricFamily f = sphere_stereo(3);
  Eigen::VectorXd x(3);
  x << 0.2, 0.5, -0.1;
  const MetricJet g = f.jet(x, 2);
  const JetTensor G = g.tensor();
  const PointTensor kn = values(kulkarni_nomizu(G, G));
  const PointTensor riem = values(curvature_at(g).riemann_down);
  for (std::size_t k = 0; k < kn.size(); ++k) CHECK(kn[k] == doctest::Approx(2.0 * riem[k]).epsilon(1e-11).scale(1.0));
}
