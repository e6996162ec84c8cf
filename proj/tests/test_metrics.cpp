#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "paneitz/metrics.hpp"

using namespace plab;

namespace {

Eigen::VectorXd point(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

}  // namespace

TEST_CASE("profile evaluation") {
  CHECK(parse_profile("1 + m/(2*r)", {{"m", 1.0}}).evaluate(4.0) == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(parse_profile("log(r^-2)", {}).evaluate(std::numbers::e) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(parse_profile("sqrt(r) * exp(-r) - -2", {}).evaluate(4.0) == doctest::Approx(2.0 * std::exp(-4.0) + 2.0));
  CHECK(parse_profile("2^3 + r^2/4", {}).evaluate(2.0) == doctest::Approx(9.0));

  const RadialProfile p = parse_profile("(1 + c/r)^4", {{"c", 0.1}});
  const auto R = coordinate_jets(point({10.0}), 2);
  const Jet j = p.evaluate(R[0]);
  CHECK(j.value() == doctest::Approx(std::pow(1.01, 4)).epsilon(1e-14));
  CHECK(j.coeff({1}) == doctest::Approx(-4.0 * std::pow(1.01, 3) * 0.1 / 100.0).epsilon(1e-13));
}

TEST_CASE("profile errors") {
  try {
    (void)RadialProfile::parse("1 + * r");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(RadialProfile::parse("1 + (r"), ParseError);
  CHECK_THROWS_AS(RadialProfile::parse("cos(r)"), ParseError);
  CHECK_THROWS_AS(parse_profile("1 + m/r + q", {{"m", 1.0}}), UnboundIdentifierError);
  const RadialProfile raw = RadialProfile::parse("a*r + b/r");
  CHECK(raw.free_identifiers() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("profile round-trip through the printer") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  for (const char* text : {"1 + m/(2*r)", "(1 + c*(1 + r^2)^-0.5)^4", "log(r^-2) - exp(-r/3)*sqrt(r + 1)",
                           "-(r - 2)^2/(1 + r^2) + 3", "1 - -r*2/r^1.5"}) {
    const RadialProfile p = parse_profile(text, {{"m", 1.0}, {"c", 0.3}});
    const RadialProfile q = RadialProfile::parse(p.to_string());
    for (int k = 0; k < 100; ++k) {
      const double r = u(rng);
      const double a = p.evaluate(r), b = q.evaluate(r);
      CHECK(std::abs(a - b) <= 1e-15 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("profile tail analysis") {
  const auto t = parse_profile("1 + c/r", {{"c", 0.5}}).tail();
  REQUIRE(t.has_value());
  CHECK(t->limit == doctest::Approx(1.0));
  CHECK(t->coefficient == doctest::Approx(0.5));
  CHECK(t->decay == doctest::Approx(1.0));
  const auto s = parse_profile("(1 + c*(1 + r^2)^-1.5)^2", {{"c", 0.5}}).tail();
  REQUIRE(s.has_value());
  CHECK(s->decay == doctest::Approx(3.0));
  CHECK(s->coefficient == doctest::Approx(1.0));
  CHECK_FALSE(parse_profile("log(r)", {}).tail().has_value());
}

TEST_CASE("registered families pass the decay audit") {
  for (int n = 3; n <= 6; ++n)
    for (const MetricFamily& f : registered_ae_families(n)) {
      const DecayAudit a = audit_decay(f);
      INFO(f.name << " slope " << a.slope << " tau " << f.tau << " " << a.note);
      CHECK(a.passed);
    }
}

TEST_CASE("decay orders of the blow-up families") {
  CHECK(invert_blowup(flat(5), paneitz_green(5, 1.0)).tau == doctest::Approx(1.0));
  CHECK(invert_blowup(flat(6), paneitz_green(6, 1.0)).tau == doctest::Approx(2.0));
  CHECK(make_family("blowup4").tau == doctest::Approx(1.0));
  const MetricFamily grow = make_family("blowup4", {.kappa = 8.0 * std::numbers::pi * std::numbers::pi});
  CHECK_FALSE(grow.asymptotically_flat());
  CHECK(grow.exact.at("growth_exponent") == doctest::Approx(-2.0));
}

TEST_CASE("blow-up of flat space with zero mass constant is flat") {
  for (int n : {5, 6, 7}) {
    const MetricFamily f = invert_blowup(flat(n), paneitz_green(n, 0.0));
    for (double r : {1.5, 2.0, 30.0}) {
      Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
      z *= r / z.norm();
      const Eigen::MatrixXd d = f.value(z) - Eigen::MatrixXd::Identity(n, n);
      CHECK(d.cwiseAbs().maxCoeff() <= 1e-13);
    }
  }
}

TEST_CASE("conformally flat families") {
  const MetricFamily one = conformally_flat(parse_profile("1", {}), ConformalMode::Yamabe, 5, "one");
  const QCurvature q = q_curvature(one.jet(point({1, 2, 0, 1, 1}), 4));
  CHECK(q.scalar == 0.0);
  CHECK(q.q == 0.0);

  const MetricFamily s = conformally_flat(parse_profile("1 + m/(2*r)", {{"m", 1.0}}), ConformalMode::Yamabe, 3, "s");
  CHECK(s.tau == doctest::Approx(1.0));
  const Eigen::VectorXd x = point({3.0, -1.0, 2.0});
  CHECK((s.value(x) - schwarzschild_slice(3, 1.0).value(x)).cwiseAbs().maxCoeff() <= 1e-15);

  const MetricFamily c = conformally_flat(parse_profile("1 + c/r", {{"c", 0.01}}), ConformalMode::QPower, 5, "c");
  const Eigen::VectorXd y = point({3.0, -1.0, 2.0, 0.5, 1.0});
  CHECK((c.value(y) - c_family(5, 0.01).value(y)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(conformally_flat(parse_profile("1 + c/r", {{"c", 0.01}}), ConformalMode::QPower, 4, "bad"), ConfigError);
}

TEST_CASE("normal-coordinate families") {
  std::mt19937_64 rng(19);
  for (int n : {4, 5, 6}) {
    const CurvatureData d = random_normal_coordinate_data(n, rng);
    const MetricFamily f = normal_coordinate_family(d);
    const MetricJet g0 = f.jet(Eigen::VectorXd::Zero(n), 2);
    // ∂_a ∂_a g_ii and ∂_i ∂_j g_ij vanish at the origin when Ric(p) = 0
    double trace_lap = 0.0, double_div = 0.0;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) {
        MultiIndex aa(static_cast<std::size_t>(n), 0);
        aa[static_cast<std::size_t>(a)] += 2;
        trace_lap += g0(i, i).derivative(aa);
        MultiIndex ia(static_cast<std::size_t>(n), 0);
        ia[static_cast<std::size_t>(i)] += 1;
        ia[static_cast<std::size_t>(a)] += 1;
        double_div += g0(i, a).derivative(ia);
      }
    CHECK(std::abs(trace_lap) <= 1e-13);
    CHECK(std::abs(double_div) <= 1e-13);
    // det g = 1 + O(r^4) along random rays
    std::normal_distribution<double> N;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = N(rng);
    v.normalize();
    const double e1 = std::abs(f.value(0.02 * v).determinant() - 1.0);
    const double e2 = std::abs(f.value(0.01 * v).determinant() - 1.0);
    CHECK(e1 <= 1e-5);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
  }
  CurvatureData zero;
  zero.n = 4;
  zero.riem.assign(256, 0.0);
  zero.driem.assign(1024, 0.0);
  const MetricFamily f = normal_coordinate_family(zero);
  CHECK((f.value(point({0.3, 0.2, 0.1, 0.5})) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  zero.riem[1] = 1.0;
  CHECK_THROWS_AS(normal_coordinate_family(zero), ShapeError);
}

TEST_CASE("stereographic sphere determinant") {
  const int n = 4;
  const MetricFamily s = sphere_stereo(n);
  const double t = 0.3;
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 0.2, 1.0).normalized();
  // g = (2/(1+t^2))^2 δ
  CHECK(s.value(t * v).determinant() == doctest::Approx(std::pow(2.0 / (1.0 + t * t), 2 * n)).epsilon(1e-14));
}

TEST_CASE("metrics files") {
  const std::string text =
      "# two families\n"
      "name=schw3\n"
      "n=3\n"
      "mode=yamabe\n"
      "profile=\"1 + m/(2*r)\"\n"
      "params m=1.0\n"
      "\n"
      "name=cq5   # q-power\n"
      "n=5\n"
      "mode=q-power\n"
      "profile=\"1 + c/r\"\n"
      "params c=0.5, d=2\n";
  const auto fams = parse_metrics_file(text);
  REQUIRE(fams.size() == 2);
  CHECK(fams[0].name == "schw3");
  CHECK(fams[0].dim == 3);
  CHECK(fams[1].name == "cq5");
  CHECK(fams[1].params.at("d") == 2.0);
  CHECK(std::abs(curvature_at(fams[0].jet(point({4, 0, 0}), 2)).scalar.value()) <= 1e-12);
  const Eigen::VectorXd x = point({1, 2, 0, 1, 1});
  CHECK((fams[1].value(x) - c_family(5, 0.5).value(x)).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(parse_metrics_file("name=a\nn=3\nmode=yamabe\n"), ParseError);
  CHECK_THROWS_AS(parse_metrics_file("name=a\nn=3\nmode=yamabe\nprofile=\"1 + q/r\"\n"), UnboundIdentifierError);
  CHECK_THROWS_AS(parse_metrics_file("name=a\ncolour=red\n"), ParseError);
  CHECK_THROWS_AS(parse_metrics_file("name=a\nn=3\nmode=sideways\nprofile=\"1\"\n"), ConfigError);
  CHECK_THROWS_AS(load_metrics_file("/nonexistent/metrics.txt"), ConfigError);
}

TEST_CASE("registry selectors") {
  CHECK(make_family("flat5").dim == 5);
  CHECK(make_family("c", {.n = 6}).name == c_family(6, 0.01).name);
  CHECK(make_family("schwarzschild_slice", {.n = 4, .m = 2.0}).params.at("m") == 2.0);
  CHECK_THROWS_AS(make_family("flat5", {.n = 4}), ConfigError);
  CHECK_THROWS_AS(make_family("nosuch5"), ConfigError);
  CHECK(sphere_area(4) == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
  CHECK(green_gamma(5) == doctest::Approx(1.0 / (16.0 * std::numbers::pi * std::numbers::pi)));
}
