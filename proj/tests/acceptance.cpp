// Acceptance gate: one line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "paneitz/suites.hpp"

namespace {

using namespace plab;

struct Criterion {
  int id;
  std::string title;
  std::vector<std::string> suites;
  std::map<std::string, double> tolerances;  // pinned here, independent of the library defaults
  double max_seconds;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "form equivalence", {"forms"}, {{"forms.agreement", 1e-4}, {"forms.gates", 0.0}}, 30.0},
      {2, "blow-up mass relation", {"blowup-mass"}, {{"blowup-mass.relative", 1e-4}}, 60.0},
      {3, "low-dimension vanishing", {"lowdim"}, {{"lowdim.energy", 1e-6}}, 30.0},
      {4, "conformal transformation laws", {"conformal"}, {{"conformal.residual", 1e-8}}, 60.0},
      {5, "kappa and the Gursky equality value", {"fourd-gursky"},
       {{"fourd-gursky.kappa", 1e-6}, {"fourd-gursky.relative", 1e-4}}, 30.0},
      {6, "Gauss-Bonnet-Chern and the 2-d suite", {"gbc", "twodim"},
       {{"gbc.boundary", 1e-9}, {"gbc.closed", 1e-6}, {"gbc.ball", 1e-8}, {"gbc.pointwise", 1e-8},
        {"twodim.chi", 1e-9}, {"twodim.defect", 1e-8}, {"twodim.slope", 0.1}}, 60.0},
      {7, "A-tensor", {"a-tensor"},
       {{"a-tensor.exact", 0.0}, {"a-tensor.zero", 1e-8}, {"a-tensor.divergence", 1e-6}}, 60.0},
      {8, "rigidity identity and scalar flattening", {"rigidity"},
       {{"rigidity.identity", 1e-3}, {"rigidity.finite", 1e-8}, {"rigidity.scalar", 1e-7}, {"rigidity.tail", 1e-6},
        {"rigidity.unit", 1e-10}}, 60.0},
      {9, "three-dimensional profile identity", {"threedim"}, {{"threedim.relative", 1e-4}}, 60.0},
      {10, "finite-difference oracle agreement", {"oracle"}, {{"oracle.relative", 1e-6}}, 120.0},
  };
  return list;
}

}  // namespace

int main() {
  int failed = 0;
  for (const Criterion& c : criteria()) {
    bool ok = true;
    std::size_t checks = 0;
    double worst_ratio = 0.0;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      for (const auto& suite : c.suites) {
        SuiteOptions opts;
        for (const auto& [key, tol] : c.tolerances)
          if (key.rfind(suite + ".", 0) == 0) opts.tolerance_overrides[key] = tol;
        const SuiteResult r = run_suite(suite, opts);
        checks += r.checks.size();
        for (const auto& chk : r.checks) {
          const double ratio = chk.tolerance > 0.0 ? chk.residual / chk.tolerance : (chk.residual > 0.0 ? 1e300 : 0.0);
          worst_ratio = std::max(worst_ratio, ratio);
        }
        if (const CheckResult* bad = r.first_failure()) {
          ok = false;
          if (detail.empty()) detail = bad->name + " residual " + std::to_string(bad->residual);
        }
      }
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.max_seconds) {
      ok = false;
      if (detail.empty()) detail = "runtime above " + std::to_string(c.max_seconds) + " s";
    }
    if (!ok) ++failed;
    std::printf("%s criterion %2d  %-42s checks %4zu  worst residual/tol %.2e  %.1f s%s%s\n", ok ? "PASS" : "FAIL", c.id,
                c.title.c_str(), checks, worst_ratio, secs, detail.empty() ? "" : "  ", detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria().size()) - failed, criteria().size());
  return failed == 0 ? 0 : 1;
}
