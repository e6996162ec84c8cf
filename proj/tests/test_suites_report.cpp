#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "paneitz/report.hpp"
#include "paneitz/suites.hpp"

using namespace plab;

namespace {

// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cols(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cols.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cols.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cols.emplace_back();
    } else {
      cols.back() += c;
    }
  }
  return cols;
}

}  // namespace

TEST_CASE("point invariants") {
  SUBCASE("flat") {
    Eigen::VectorXd x(5);
    x << 1, 0, 0, 0, 0;
    const PointInvariants p = point_invariants(flat(5), x);
    CHECK(p.scalar == 0.0);
    CHECK(p.q_sigma == 0.0);
    CHECK(p.weyl_norm2 == 0.0);
    CHECK(p.ricci_eigenvalues.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("round S^4 at the pole of the chart") {
    const PointInvariants p = point_invariants(sphere_stereo(4), Eigen::VectorXd::Zero(4));
    CHECK(p.scalar == doctest::Approx(12.0).epsilon(1e-13));
    CHECK(p.q_sigma == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(p.q_expanded == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(p.ricci_norm2 == doctest::Approx(36.0).epsilon(1e-12));
    CHECK(std::abs(p.weyl_norm2) <= 1e-12);
    CHECK(p.sigma1 == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(p.sigma2 == doctest::Approx(1.5).epsilon(1e-13));
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(p.ricci_eigenvalues(i) == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(point_invariants(flat(5), Eigen::VectorXd::Zero(4)), ConfigError);
    Eigen::VectorXd core(5);
    core << 0.1, 0, 0, 0, 0;
    CHECK_THROWS_AS(point_invariants(c_family(5, 0.01), core), DomainError);
    CHECK_THROWS(point_invariants(flat(2), Eigen::VectorXd::Zero(2)));
  }
}

TEST_CASE("suite registry") {
  const auto names = suite_names();
  CHECK(names.size() == 11);
  CHECK(std::find(names.begin(), names.end(), "a-tensor") != names.end());
  for (const auto& [key, tol] : suite_tolerances()) {
    const auto dot = key.find('.');
    REQUIRE(dot != std::string::npos);
    CHECK(std::find(names.begin(), names.end(), key.substr(0, dot)) != names.end());
    CHECK(tol >= 0.0);
  }
  CHECK_THROWS_AS(run_suite("nosuch"), ConfigError);
  SuiteOptions bad;
  bad.tolerance_overrides["conformal.nosuch"] = 1.0;
  CHECK_THROWS_AS(run_suite("conformal", bad), ConfigError);
}

TEST_CASE("a tightened tolerance makes a suite fail") {
  SuiteOptions tight;
  tight.tolerance_overrides["twodim.slope"] = 1e-6;
  const SuiteResult r = run_suite("twodim", tight);
  CHECK_FALSE(r.passed());
  REQUIRE(r.first_failure() != nullptr);
  CHECK(r.first_failure()->tolerance_key == "twodim.slope");
  CHECK(run_suite("twodim").passed());
}

TEST_CASE("suite output is deterministic and JSON and CSV agree") {
  const SuiteResult a = run_suite("conformal");
  const SuiteResult b = run_suite("conformal");
  CHECK(a.passed());
  CHECK(format_suite(a, OutputFormat::Json) == format_suite(b, OutputFormat::Json));

  const auto j = nlohmann::json::parse(format_suite(a, OutputFormat::Json));
  CHECK(j["suite"] == "conformal");
  CHECK(j["passed"] == true);
  std::istringstream csv(format_suite(a, OutputFormat::Csv));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "suite,check,value,expected,residual,tolerance,passed");
  std::size_t k = 0;
  while (std::getline(csv, line)) {
    REQUIRE(k < j["checks"].size());
    const std::vector<std::string> cols = split_csv(line);
    REQUIRE(cols.size() == 7);
    const auto& jc = j["checks"][k];
    CHECK(cols[1] == jc["name"].get<std::string>());
    CHECK(std::stod(cols[2]) == jc["value"].get<double>());
    CHECK(std::stod(cols[4]) == jc["residual"].get<double>());
    CHECK(std::stod(cols[5]) == jc["tolerance"].get<double>());
    ++k;
  }
  CHECK(k == j["checks"].size());
  CHECK(format_suite(a, OutputFormat::Table).find("PASS conformal") != std::string::npos);
}

TEST_CASE("energy report formats") {
  const EnergyReport r = energy_surface(c_family(5, 0.01));
  const auto j = nlohmann::json::parse(format_energy(r, OutputFormat::Json));
  CHECK(j["family"] == r.family);
  CHECK(j["value"].get<double>() == r.value);
  CHECK(j["gates"]["tau_ok"] == true);
  CHECK(j["radii"].size() == 4);
  std::istringstream csv(format_energy(r, OutputFormat::Csv));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "family,functional,form,radius,flux,value,exponent,residual,tau_ok,q_l1_ok");
  int rows = 0;
  while (std::getline(csv, line)) {
    const std::vector<std::string> cols = split_csv(line);
    REQUIRE(cols.size() == 10);
    CHECK(std::stod(cols[4]) == j["flux"][static_cast<std::size_t>(rows)].get<double>());
    CHECK(std::stod(cols[5]) == r.value);
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(format_energy(energy_surface(flat(5)), OutputFormat::Table).find("value     0  (exact)") != std::string::npos);
}

TEST_CASE("invariants formats") {
  const std::vector<PointInvariants> pts{point_invariants(sphere_stereo(4), Eigen::VectorXd::Zero(4))};
  const auto j = nlohmann::json::parse(format_invariants("sphere_stereo4", pts, OutputFormat::Json));
  CHECK(j["points"][0]["R"].get<double>() == pts[0].scalar);
  CHECK(j["points"][0]["ricci_eigenvalues"].size() == 4);
  const std::string csv = format_invariants("sphere_stereo4", pts, OutputFormat::Csv);
  CHECK(csv.find("sphere_stereo4,0 0 0 0,") != std::string::npos);
  CHECK_THROWS_AS(output_format_from_string("xml"), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
