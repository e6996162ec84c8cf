#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paneitz/functionals.hpp"
#include "paneitz/metrics.hpp"

namespace plab {

/// Curvature invariants of a family at one point.
struct PointInvariants {
  Eigen::VectorXd point;
  double scalar = 0.0;
  Eigen::VectorXd ricci_eigenvalues;  // eigenvalues of g^{-1} Ric, ascending
  double ricci_norm2 = 0.0;
  double weyl_norm2 = 0.0;
  double q_sigma = 0.0;
  double q_expanded = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

/// Needs a Riemannian family with n >= 3 and jet_order >= 4.
PointInvariants point_invariants(const MetricFamily& f, const Eigen::VectorXd& x, int jet_order = kDefaultJetOrder);

/// One numerical check: |value - expected| (or a residual computed directly)
/// compared with a named tolerance.
struct CheckResult {
  std::string name;
  std::string tolerance_key;
  double value = 0.0;
  double expected = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool passed() const;
  /// nullptr when every check passed.
  const CheckResult* first_failure() const;
};

struct SuiteOptions {
  std::map<std::string, double> tolerance_overrides;  // keys from suite_tolerances()
  int quad_degree = 16;
  unsigned seed = 20240611;
};

/// forms, lowdim, blowup-mass, conformal, fourd-gursky, gbc, twodim, a-tensor,
/// rigidity, threedim, oracle.
std::vector<std::string> suite_names();
/// Default tolerance of every named check tolerance, keyed "suite.name".
const std::map<std::string, double>& suite_tolerances();
/// Throws ConfigError for an unknown suite or an unknown override key.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opts = {});

}  // namespace plab
