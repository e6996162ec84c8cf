// paneitz-lab: curvature invariants, fourth-order energies and verification suites.
//
// Exit codes: 0 ok, 1 evaluation or configuration error, 2 energy gate warning,
// 3 verification failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paneitz/functionals.hpp"
#include "paneitz/integrate.hpp"
#include "paneitz/metrics.hpp"
#include "paneitz/report.hpp"
#include "paneitz/suites.hpp"

namespace {

using namespace plab;

struct Config {
  std::string family;
  std::optional<int> n;
  std::optional<double> m, c, alpha, kappa, eps;
  std::vector<std::string> points;
  std::vector<double> radii;
  int quad_degree = 16;
  int jet_order = kDefaultJetOrder;
  std::string form = "surface";
  std::string suite;
  std::string metrics_file;
  std::string out = "json";
  std::vector<std::string> tol_overrides;
  std::optional<int> threads;
};

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError("cannot parse number '" + item + "' in '" + text + "'");
    v.push_back(x);
  }
  return v;
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("tolerance override '" + item + "' is not key=value");
    const auto v = parse_numbers(item.substr(eq + 1));
    if (v.size() != 1) throw ConfigError("tolerance override '" + item + "' needs one value");
    out[item.substr(0, eq)] = v[0];
  }
  return out;
}

MetricFamily resolve_family(const Config& cfg) {
  if (!cfg.metrics_file.empty()) {
    const auto fams = load_metrics_file(cfg.metrics_file);
    if (fams.empty()) throw ConfigError("metrics file " + cfg.metrics_file + " defines no metric");
    if (cfg.family.empty()) return fams.front();
    for (const auto& f : fams)
      if (f.name == cfg.family) return f;
    throw ConfigError("metric '" + cfg.family + "' not found in " + cfg.metrics_file);
  }
  if (cfg.family.empty()) throw ConfigError("--family is required");
  FamilyOptions o;
  o.n = cfg.n;
  o.m = cfg.m;
  o.c = cfg.c;
  o.alpha = cfg.alpha;
  o.kappa = cfg.kappa;
  o.eps = cfg.eps;
  return make_family(cfg.family, o);
}

void apply_threads(const Config& cfg) {
  int threads = 1;
  if (const char* env = std::getenv("PANEITZ_LAB_THREADS")) {
    const auto v = parse_numbers(env);
    if (v.size() != 1 || v[0] < 1) throw ConfigError("PANEITZ_LAB_THREADS must be a positive integer");
    threads = static_cast<int>(v[0]);
  }
  if (cfg.threads) threads = *cfg.threads;
  if (threads < 1) throw ConfigError("--threads must be positive");
  set_thread_count(threads);
}

int cmd_invariants(const Config& cfg) {
  const MetricFamily f = resolve_family(cfg);
  std::vector<PointInvariants> pts;
  if (cfg.points.empty()) throw ConfigError("--point is required");
  for (const auto& p : cfg.points) {
    const auto v = parse_numbers(p);
    pts.push_back(point_invariants(f, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())),
                                   cfg.jet_order));
  }
  std::cout << format_invariants(f.name, pts, output_format_from_string(cfg.out));
  return 0;
}

int cmd_energy(const Config& cfg) {
  const MetricFamily f = resolve_family(cfg);
  EnergyOptions eo;
  if (!cfg.radii.empty()) eo.radii = cfg.radii;
  eo.quad_degree = cfg.quad_degree;
  const auto fmt = output_format_from_string(cfg.out);
  EnergyReport rep = cfg.form == "adm" ? adm_energy(f, eo) : energy(f, energy_form_from_string(cfg.form), eo);
  for (const auto& [key, value] : parse_overrides(cfg.tol_overrides)) {
    if (key != "extrapolation_residual")
      throw ConfigError("unknown tolerance key '" + key + "' for energy (extrapolation_residual)");
    rep.tolerances[key] = value;
    rep.series.converged = rep.series.residual <= value * std::max(1.0, std::abs(rep.value));
  }
  std::cout << format_energy(rep, fmt);
  return rep.series.converged && rep.gates_ok() ? 0 : 2;
}

int cmd_verify(const Config& cfg) {
  SuiteOptions so;
  so.quad_degree = cfg.quad_degree;
  so.tolerance_overrides = parse_overrides(cfg.tol_overrides);
  const auto fmt = output_format_from_string(cfg.out);
  std::vector<std::string> suites;
  if (cfg.suite == "all") suites = suite_names();
  else suites.push_back(cfg.suite);
  int status = 0;
  for (const auto& name : suites) {
    const SuiteResult res = run_suite(name, so);
    std::cout << format_suite(res, fmt);
    if (const CheckResult* bad = res.first_failure()) {
      std::cerr << "verify: suite " << name << " failed at '" << bad->name << "' (residual "
                << format_double(bad->residual) << " > " << format_double(bad->tolerance) << ")\n";
      if (status == 0) status = 3;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paneitz-lab: fourth-order curvature invariants and energies"};
  app.require_subcommand(1);
  Config cfg;

  auto add_family = [&cfg](CLI::App* sub) {
    sub->add_option("--family", cfg.family, "family selector (flat5, c5, sphere_stereo, ...) or metrics-file name");
    sub->add_option("--n", cfg.n, "dimension");
    sub->add_option("--m", cfg.m, "mass parameter");
    sub->add_option("--c", cfg.c, "amplitude parameter");
    sub->add_option("--alpha", cfg.alpha, "Green function mass constant");
    sub->add_option("--kappa", cfg.kappa, "total Q-curvature (four-dimensional blow-up)");
    sub->add_option("--eps", cfg.eps, "perturbation size (bump families)");
    sub->add_option("--metrics-file", cfg.metrics_file, "metric definition file")->check(CLI::ExistingFile);
  };
  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "json, csv or table")->check(CLI::IsMember({"json", "csv", "table"}));
    sub->add_option("--threads", cfg.threads, "worker threads (overrides PANEITZ_LAB_THREADS)");
  };

  auto* inv = app.add_subcommand("invariants", "R, Ric, |W|^2, Q and sigma_k(S) at points");
  add_family(inv);
  add_common(inv);
  inv->add_option("--point", cfg.points, "comma-separated coordinates (repeatable)")->take_all();
  inv->add_option("--jet-order", cfg.jet_order, "jet truncation order")->check(CLI::Range(4, kMaxJetOrder));

  auto* en = app.add_subcommand("energy", "fourth-order energy (or ADM energy) on a radius ladder");
  add_family(en);
  add_common(en);
  en->add_option("--form", cfg.form, "surface, scalar-flux, volume or adm")
      ->check(CLI::IsMember({"surface", "surface-third-derivative", "scalar-flux", "volume", "adm"}));
  en->add_option("--radii", cfg.radii, "comma-separated ladder (>= 4 radii)")->delimiter(',');
  en->add_option("--quad-degree", cfg.quad_degree, "sphere quadrature degree")->check(CLI::Range(0, 40));
  en->add_option("--tol-override", cfg.tol_overrides, "key=value (repeatable)");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  add_common(ver);
  std::string suite_help = "all";
  for (const auto& s : suite_names()) suite_help += ", " + s;
  ver->add_option("--suite", cfg.suite, suite_help)->required();
  ver->add_option("--quad-degree", cfg.quad_degree, "sphere quadrature degree")->check(CLI::Range(0, 40));
  ver->add_option("--tol-override", cfg.tol_overrides, "key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_threads(cfg);
    if (*inv) return cmd_invariants(cfg);
    if (*en) return cmd_energy(cfg);
    return cmd_verify(cfg);
  } catch (const std::exception& e) {
    std::cerr << "paneitz-lab: " << e.what() << '\n';
    return 1;
  }
}
