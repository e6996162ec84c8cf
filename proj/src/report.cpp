#include "paneitz/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace plab {

namespace {

using nlohmann::ordered_json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::string point_string(const Eigen::VectorXd& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? " " : "") + format_double(x(i));
  return s;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "table") return OutputFormat::Table;
  throw ConfigError("unknown output format '" + s + "' (json, csv, table)");
}

std::string format_energy(const EnergyReport& rep, OutputFormat fmt) {
  const FluxSeries& s = rep.series;
  if (fmt == OutputFormat::Json) {
    ordered_json j;
    j["family"] = rep.family;
    j["functional"] = rep.functional;
    j["form"] = rep.form;
    j["radii"] = s.radii;
    j["flux"] = s.flux;
    j["value"] = rep.value;
    j["exponent"] = s.exponent;
    j["amplitude"] = s.amplitude;
    j["residual"] = s.residual;
    j["converged"] = s.converged;
    j["exact"] = s.exact;
    j["gates"] = {{"tau", rep.gates.tau},         {"tau_n", rep.gates.tau_n},     {"tau_ok", rep.gates.tau_ok},
                  {"q_l1_ok", rep.gates.q_l1_ok}, {"q_slope", rep.gates.q_slope}, {"note", rep.gates.note},
                  {"r_positive", rep.gates.r_positive}, {"q_nonnegative", rep.gates.q_nonnegative}};
    j["tolerances"] = rep.tolerances;
    j["notes"] = rep.notes;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  if (fmt == OutputFormat::Csv) {
    out << "family,functional,form,radius,flux,value,exponent,residual,tau_ok,q_l1_ok\n";
    for (std::size_t k = 0; k < s.radii.size(); ++k)
      out << csv_field(rep.family) << ',' << rep.functional << ',' << rep.form << ',' << format_double(s.radii[k]) << ','
          << format_double(s.flux[k]) << ',' << format_double(rep.value) << ',' << format_double(s.exponent) << ','
          << format_double(s.residual) << ',' << rep.gates.tau_ok << ',' << rep.gates.q_l1_ok << '\n';
    return out.str();
  }
  out << rep.functional << " of " << rep.family << " (" << rep.form << ")\n";
  for (std::size_t k = 0; k < s.radii.size(); ++k)
    out << "  r = " << pad(format_double(s.radii[k]), 24) << " flux = " << format_double(s.flux[k]) << '\n';
  out << "  value     " << format_double(rep.value) << (s.exact ? "  (exact)" : "") << '\n';
  out << "  exponent  " << format_double(s.exponent) << "   fit residual " << format_double(s.residual) << '\n';
  out << "  tau gate  " << (rep.gates.tau_ok ? "ok" : "FAIL") << "   Q in L^1 " << (rep.gates.q_l1_ok ? "ok" : "FAIL")
      << "   (" << rep.gates.note << ")\n";
  out << "  R > 0 on the ladder " << (rep.gates.r_positive ? "yes" : "no") << "   Q >= 0 on the ladder "
      << (rep.gates.q_nonnegative ? "yes" : "no") << '\n';
  for (const auto& n : rep.notes) out << "  note: " << n << '\n';
  return out.str();
}

std::string format_suite(const SuiteResult& res, OutputFormat fmt) {
  if (fmt == OutputFormat::Json) {
    ordered_json j;
    j["suite"] = res.suite;
    j["passed"] = res.passed();
    ordered_json checks = ordered_json::array();
    for (const auto& c : res.checks)
      checks.push_back({{"name", c.name},
                        {"tolerance_key", c.tolerance_key},
                        {"value", c.value},
                        {"expected", c.expected},
                        {"residual", c.residual},
                        {"tolerance", c.tolerance},
                        {"passed", c.passed},
                        {"note", c.note}});
    j["checks"] = checks;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  if (fmt == OutputFormat::Csv) {
    out << "suite,check,value,expected,residual,tolerance,passed\n";
    for (const auto& c : res.checks)
      out << res.suite << ',' << csv_field(c.name) << ',' << format_double(c.value) << ','
          << format_double(c.expected) << ',' << format_double(c.residual) << ',' << format_double(c.tolerance) << ','
          << c.passed << '\n';
    return out.str();
  }
  std::size_t width = 10;
  for (const auto& c : res.checks) width = std::max(width, c.name.size());
  out << "suite " << res.suite << '\n';
  for (const auto& c : res.checks) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  residual %.3e  tol %.1e", c.residual, c.tolerance);
    out << (c.passed ? "  ok    " : "  FAIL  ") << pad(c.name, width) << buf;
    if (!c.note.empty()) out << "  " << c.note;
    out << '\n';
  }
  out << (res.passed() ? "PASS" : "FAIL") << ' ' << res.suite << '\n';
  return out.str();
}

std::string format_invariants(const std::string& family, const std::vector<PointInvariants>& pts, OutputFormat fmt) {
  if (fmt == OutputFormat::Json) {
    ordered_json j;
    j["family"] = family;
    ordered_json arr = ordered_json::array();
    for (const auto& p : pts)
      arr.push_back({{"point", vector_json(p.point)},
                     {"R", p.scalar},
                     {"ricci_eigenvalues", vector_json(p.ricci_eigenvalues)},
                     {"ricci_norm2", p.ricci_norm2},
                     {"weyl_norm2", p.weyl_norm2},
                     {"Q_sigma", p.q_sigma},
                     {"Q_expanded", p.q_expanded},
                     {"sigma1", p.sigma1},
                     {"sigma2", p.sigma2}});
    j["points"] = arr;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  if (fmt == OutputFormat::Csv) {
    out << "family,point,R,ricci_norm2,weyl_norm2,Q_sigma,Q_expanded,sigma1,sigma2,ricci_eigenvalues\n";
    for (const auto& p : pts)
      out << csv_field(family) << ',' << point_string(p.point) << ',' << format_double(p.scalar) << ','
          << format_double(p.ricci_norm2) << ',' << format_double(p.weyl_norm2) << ',' << format_double(p.q_sigma) << ','
          << format_double(p.q_expanded) << ',' << format_double(p.sigma1) << ',' << format_double(p.sigma2) << ','
          << point_string(p.ricci_eigenvalues) << '\n';
    return out.str();
  }
  for (const auto& p : pts) {
    out << family << " at (" << point_string(p.point) << ")\n";
    out << "  R            " << format_double(p.scalar) << '\n';
    out << "  Ric eigenv.  " << point_string(p.ricci_eigenvalues) << '\n';
    out << "  |Ric|^2      " << format_double(p.ricci_norm2) << '\n';
    out << "  |W|^2        " << format_double(p.weyl_norm2) << '\n';
    out << "  Q (sigma)    " << format_double(p.q_sigma) << '\n';
    out << "  Q (expanded) " << format_double(p.q_expanded) << '\n';
    out << "  sigma1(S)    " << format_double(p.sigma1) << '\n';
    out << "  sigma2(S)    " << format_double(p.sigma2) << '\n';
  }
  return out.str();
}

}  // namespace plab
