#include "paneitz/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

bool outside_support(const MetricFamily& f, const Eigen::VectorXd& x) { return x.norm() > f.flat_beyond; }

std::vector<int> multi_index(int n, std::initializer_list<int> slots) {
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  for (int s : slots) ++a[static_cast<std::size_t>(s)];
  return a;
}

Eigen::VectorXd unit(const Eigen::VectorXd& x) { return x / x.norm(); }

/// Gradient of R_g at the base point of a metric jet of order >= 3.
Eigen::VectorXd scalar_gradient(const MetricJet& g) {
  const Connection c = connection(g);
  const Jet R = scalar_curvature(c, ricci_tensor(c));
  return R.gradient();
}

/// ∫_{R^n} fn dx through r = t / (1 - t), t in [0, 1).
double whole_chart_integral(const PointFunction& fn, const SphereRule& rule, int nodes) {
  const GaussRule g = gauss_legendre(nodes);
  const std::size_t m = rule.size();
  double total = 0.0;
  for (const auto& [lo, hi] : {std::pair{0.0, 0.5}, std::pair{0.5, 1.0}}) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    const std::vector<double> terms = parallel_map<double>(g.nodes.size() * m, [&](std::size_t k) {
      const std::size_t i = k / m, j = k % m;
      const double t = mid + half * g.nodes[i];
      const double r = t / (1.0 - t), jac = 1.0 / ((1.0 - t) * (1.0 - t));
      return half * g.weights[i] * jac * std::pow(r, rule.n - 1) * rule.weights[j] * fn(r * rule.nodes[j]);
    });
    total += pairwise_sum(terms);
  }
  return total;
}

double log_log_slope(const std::vector<double>& r, const std::vector<double>& v) {
  const std::size_t k = r.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double lx = std::log(r[i]), ly = std::log(v[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::vector<Eigen::VectorXd> audit_directions(int n) {
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      d(i) = s;
      dirs.push_back(d);
    }
  dirs.push_back(Eigen::VectorXd::Ones(n).normalized());
  Eigen::VectorXd alt(n);
  for (int i = 0; i < n; ++i) alt(i) = i % 2 == 0 ? 1.0 : -0.5;
  dirs.push_back(alt.normalized());
  return dirs;
}

EnergyReport make_report(const MetricFamily& f, const std::string& functional, const std::string& form,
                         const std::vector<double>& radii, std::vector<double> flux, double sign) {
  EnergyReport rep;
  rep.family = f.name;
  rep.functional = functional;
  rep.form = form;
  for (double& v : flux) v *= sign;
  rep.series = extrapolate_limit(radii, std::move(flux));
  rep.value = rep.series.limit;
  rep.tolerances["extrapolation_residual"] = 1e-3;
  if (!rep.series.converged) rep.notes.push_back("flux series did not settle on E + a r^{-s}");
  return rep;
}

void require_riemannian_ae(const MetricFamily& f, const char* what) {
  if (f.negative != 0) throw ConfigError(std::string(what) + " needs a Riemannian metric");
  if (f.dim < 2) throw ConfigError(std::string(what) + " needs n >= 2");
}

void attach_gates(EnergyReport& rep, const MetricFamily& f, const EnergyOptions& opts) {
  if (opts.audit_q) {
    rep.gates = energy_gates(f, opts.radii);
  } else {
    rep.gates.tau = f.tau;
    rep.gates.tau_n = tau_threshold(f.dim);
    rep.gates.tau_ok = f.tau > rep.gates.tau_n;
    rep.gates.q_l1_ok = true;
    rep.gates.note = "Q audit skipped";
  }
  if (!rep.gates.tau_ok)
    rep.notes.push_back("decay order " + std::to_string(rep.gates.tau) + " does not exceed tau_n = " +
                        std::to_string(rep.gates.tau_n) + "; the limit is not guaranteed");
  if (!rep.gates.q_l1_ok) rep.notes.push_back("Q in L^1 audit failed: " + rep.gates.note);
  if (f.dim <= 4 && rep.functional == "energy")
    rep.notes.push_back("tau_n = 0 for n <= 4: the energy vanishes for every decay order tau > 0");
}

}  // namespace

double tau_threshold(int n) { return n <= 4 ? 0.0 : n / 2.0 - 2.0; }

const char* to_string(EnergyForm f) {
  switch (f) {
    case EnergyForm::Surface: return "surface";
    case EnergyForm::ScalarFlux: return "scalar-flux";
    case EnergyForm::Volume: return "volume";
  }
  return "?";
}

EnergyForm energy_form_from_string(const std::string& s) {
  if (s == "surface" || s == "surface-third-derivative") return EnergyForm::Surface;
  if (s == "scalar-flux" || s == "scalar_flux") return EnergyForm::ScalarFlux;
  if (s == "volume") return EnergyForm::Volume;
  throw ConfigError("unknown energy form '" + s + "' (surface, scalar-flux, volume)");
}

SphereRule family_sphere_rule(const MetricFamily& f, int degree, bool use_symmetry) {
  if (use_symmetry && f.radial) return radial_sphere_rule(f.dim);
  return sphere_quadrature(f.dim, degree);
}

double energy_surface_integrand(const MetricFamily& f, const Eigen::VectorXd& x) {
  if (outside_support(f, x)) return 0.0;
  const int n = f.dim;
  const MetricJet g = f.jet(x, 3);
  const Eigen::VectorXd th = unit(x);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    if (th(j) == 0.0) continue;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) s += g(a, a).derivative(multi_index(n, {j, i, i}));
    for (int u = 0; u < n; ++u)
      for (int i = 0; i < n; ++i) s -= g(u, i).derivative(multi_index(n, {j, u, i}));
    acc += s * th(j);
  }
  return acc;
}

double radial_scalar_derivative(const MetricFamily& f, const Eigen::VectorXd& x) {
  if (outside_support(f, x)) return 0.0;
  return scalar_gradient(f.jet(x, 3)).dot(unit(x));
}

double laplacian_scalar_density(const MetricFamily& f, const Eigen::VectorXd& x) {
  if (outside_support(f, x)) return 0.0;
  const MetricJet g = f.jet(x, 4);
  const Connection c = connection(g);
  const Jet R = scalar_curvature(c, ricci_tensor(c));
  return laplace_beltrami(R, c).value() * std::sqrt(g.value().determinant());
}

Gates energy_gates(const MetricFamily& f, const std::vector<double>& radii) {
  Gates gates;
  gates.tau = f.tau;
  gates.tau_n = tau_threshold(f.dim);
  gates.tau_ok = f.asymptotically_flat() && f.tau > gates.tau_n;
  if (f.dim < 3) {
    gates.q_l1_ok = true;
    gates.q_nonnegative = true;
    gates.q_slope = std::nan("");
    gates.note = "Q is not defined for n = 2";
    return gates;
  }
  const auto dirs = f.radial ? std::vector<Eigen::VectorXd>{Eigen::VectorXd::Unit(f.dim, 0)} : audit_directions(f.dim);
  struct Sample {
    double abs_q, q, scalar;
  };
  std::vector<double> vals;
  gates.r_positive = true;
  gates.q_nonnegative = true;
  for (double r : radii) {
    double worst = 0.0;
    if (r <= f.flat_beyond) {
      const std::vector<Sample> q = parallel_map<Sample>(dirs.size(), [&](std::size_t k) {
        const QCurvature qc = q_curvature(f.jet(r * dirs[k], 4));
        // Q below the rounding floor of its own terms or of fourth metric derivatives counts as zero
        const int n = f.dim;
        const double scale = std::abs(qc.laplacian_scalar) / (2.0 * (n - 1.0)) +
                             2.0 * qc.ricci_norm2 / ((n - 2.0) * (n - 2.0)) + qc.scalar * qc.scalar;
        const double floor = std::max(1e-6 * scale, 1e4 * std::numeric_limits<double>::epsilon() / std::pow(r, 4));
        const double qv = std::abs(qc.q) <= floor ? 0.0 : qc.q;
        return Sample{std::abs(qv), qv, qc.scalar};
      });
      for (const Sample& smp : q) {
        worst = std::max(worst, smp.abs_q);
        gates.r_positive = gates.r_positive && smp.scalar > 0.0;
        gates.q_nonnegative = gates.q_nonnegative && smp.q >= 0.0;
      }
    } else {
      gates.r_positive = false;
    }
    vals.push_back(worst * std::pow(r, f.dim - 1));
  }
  if (vals.back() == 0.0) {
    gates.q_l1_ok = true;
    gates.q_slope = std::nan("");
    gates.note = "Q vanishes on the outer ladder";
    return gates;
  }
  std::vector<double> rr, vv;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (vals[i] > 0.0) {
      rr.push_back(radii[i]);
      vv.push_back(vals[i]);
    }
  if (rr.size() < 2) {
    gates.q_l1_ok = false;
    gates.q_slope = std::nan("");
    gates.note = "too few nonzero Q samples for a slope";
    return gates;
  }
  gates.q_slope = log_log_slope(rr, vv);
  gates.q_l1_ok = gates.q_slope <= -1.1;
  gates.note = "slope of max|Q| r^{n-1} = " + std::to_string(gates.q_slope);
  return gates;
}

EnergyReport energy_surface(const MetricFamily& f, const EnergyOptions& opts) {
  require_riemannian_ae(f, "energy_surface");
  const SphereRule rule = family_sphere_rule(f, opts.quad_degree, opts.use_symmetry);
  std::vector<double> flux;
  for (double r : opts.radii)
    flux.push_back(surface_flux([&](const Eigen::VectorXd& x) { return energy_surface_integrand(f, x); }, r, rule));
  EnergyReport rep = make_report(f, "energy", to_string(EnergyForm::Surface), opts.radii, std::move(flux), 1.0);
  attach_gates(rep, f, opts);
  return rep;
}

EnergyReport energy_scalar_flux(const MetricFamily& f, const EnergyOptions& opts) {
  require_riemannian_ae(f, "energy_scalar_flux");
  const SphereRule rule = family_sphere_rule(f, opts.quad_degree, opts.use_symmetry);
  std::vector<double> flux;
  for (double r : opts.radii)
    flux.push_back(surface_flux([&](const Eigen::VectorXd& x) { return radial_scalar_derivative(f, x); }, r, rule));
  EnergyReport rep = make_report(f, "energy", to_string(EnergyForm::ScalarFlux), opts.radii, std::move(flux), -1.0);
  attach_gates(rep, f, opts);
  return rep;
}

EnergyReport energy_volume(const MetricFamily& f, const EnergyOptions& opts) {
  require_riemannian_ae(f, "energy_volume");
  if (opts.radii.empty() || opts.radii.front() <= f.r_min)
    throw ConfigError("volume energy needs ladder radii above the inner radius " + std::to_string(f.r_min));
  const SphereRule rule = family_sphere_rule(f, opts.volume_degree, opts.use_symmetry);
  std::vector<double> vol = cumulative_ball_integrals([&](const Eigen::VectorXd& x) { return laplacian_scalar_density(f, x); },
                                              f.r_min, opts.radii, rule, opts.radial_nodes, f.flat_beyond);
  double inner = 0.0;
  if (f.r_min > 0.0 && f.r_min < f.flat_beyond) {
    const SphereRule flux_rule = family_sphere_rule(f, opts.quad_degree, opts.use_symmetry);
    inner = surface_flux(
        [&](const Eigen::VectorXd& x) {
          const MetricJet g = f.jet(x, 3);
          const Eigen::MatrixXd G = g.value();
          return std::sqrt(G.determinant()) * unit(x).dot(G.inverse() * scalar_gradient(g));
        },
        f.r_min, flux_rule);
  }
  for (double& v : vol) v += inner;
  EnergyReport rep = make_report(f, "energy", to_string(EnergyForm::Volume), opts.radii, std::move(vol), -1.0);
  if (f.r_min > 0.0) rep.notes.push_back("core |x| <= r_min replaced by its boundary flux");
  attach_gates(rep, f, opts);
  return rep;
}

EnergyReport energy(const MetricFamily& f, EnergyForm form, const EnergyOptions& opts) {
  switch (form) {
    case EnergyForm::Surface: return energy_surface(f, opts);
    case EnergyForm::ScalarFlux: return energy_scalar_flux(f, opts);
    case EnergyForm::Volume: return energy_volume(f, opts);
  }
  throw ConfigError("unknown energy form");
}

EnergyReport adm_energy(const MetricFamily& f, const EnergyOptions& opts) {
  require_riemannian_ae(f, "adm_energy");
  const int n = f.dim;
  const SphereRule rule = family_sphere_rule(f, opts.quad_degree, opts.use_symmetry);
  auto integrand = [&](const Eigen::VectorXd& x) {
    if (outside_support(f, x)) return 0.0;
    const MetricJet g = f.jet(x, 1);
    const Eigen::VectorXd th = unit(x);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g(j, i).derivative(multi_index(n, {i})) - g(i, i).derivative(multi_index(n, {j}));
      acc += s * th(j);
    }
    return acc;
  };
  std::vector<double> flux;
  for (double r : opts.radii) flux.push_back(surface_flux(integrand, r, rule));
  const double cn = 1.0 / (2.0 * (n - 1.0) * sphere_area(n));
  EnergyReport rep = make_report(f, "adm", "surface", opts.radii, std::move(flux), cn);
  rep.gates.tau = f.tau;
  rep.gates.tau_n = (n - 2.0) / 2.0;
  rep.gates.tau_ok = f.tau > rep.gates.tau_n;
  rep.gates.q_l1_ok = true;
  rep.gates.q_slope = std::nan("");
  rep.gates.note = "ADM decay threshold (n-2)/2";
  return rep;
}

HProfile h_profile(const MetricFamily& f, double r, int quad_degree) {
  require_riemannian_ae(f, "h_profile");
  const int n = f.dim;
  const SphereRule rule = family_sphere_rule(f, quad_degree, true);
  struct Sample {
    double R, dR_line, dR_grad;
  };
  const std::vector<Sample> s = parallel_map<Sample>(rule.size(), [&](std::size_t k) {
    const Eigen::VectorXd x = r * rule.nodes[k];
    if (outside_support(f, x)) return Sample{0.0, 0.0, 0.0};
    const MetricJet g = f.jet(x, 3);
    const Connection c = connection(g);
    const Jet R = scalar_curvature(c, ricci_tensor(c));
    const std::vector<double> line = restrict_to_line(R, rule.nodes[k]);
    return Sample{R.value(), line.size() > 1 ? line[1] : 0.0, R.gradient().dot(rule.nodes[k])};
  });
  std::vector<double> a(s.size()), b(s.size()), c(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    a[k] = rule.weights[k] * s[k].R;
    b[k] = rule.weights[k] * s[k].dR_line;
    c[k] = rule.weights[k] * s[k].dR_grad;
  }
  const double meanR = pairwise_sum(a), mean_line = pairwise_sum(b), mean_grad = pairwise_sum(c);
  HProfile h;
  h.r = r;
  h.h = std::pow(r, n - 2) * meanR;
  h.flux = std::pow(r, n - 1) * mean_grad;
  // (r h)' = (n-1) r^{n-2} ∮R + r^{n-1} ∮ dR/dr
  const double rh_prime = (n - 1.0) * std::pow(r, n - 2) * meanR + std::pow(r, n - 1) * mean_line;
  h.rhs = rh_prime - (n - 1.0) * h.h;
  h.residual = std::abs(h.flux - h.rhs);
  return h;
}

KappaReport kappa(const MetricFamily& f, const EnergyOptions& opts) {
  if (f.dim != 4) throw ConfigError("kappa is defined for n = 4 only");
  require_riemannian_ae(f, "kappa");
  auto density = [&](const Eigen::VectorXd& x) {
    if (outside_support(f, x)) return 0.0;
    const MetricJet g = f.jet(x, 4);
    return q_curvature(g).q * std::sqrt(g.value().determinant());
  };
  KappaReport out;
  if (f.euler_characteristic == 2) {
    if (!f.radial) throw ConfigError("whole-chart kappa needs a rotation-invariant compactified chart");
    out.value = whole_chart_integral(density, radial_sphere_rule(4), 48);
    return out;
  }
  if (f.r_min > 0.0) throw ConfigError("kappa needs a chart that covers the origin");
  const SphereRule rule = family_sphere_rule(f, opts.volume_degree, opts.use_symmetry);
  std::vector<double> cum = cumulative_ball_integrals(density, 0.0, opts.radii, rule, opts.radial_nodes, f.flat_beyond);
  out.series = extrapolate_limit(opts.radii, cum);
  out.value = out.series.limit;
  out.tail_bound = std::abs(out.series.limit - out.series.flux.back());
  return out;
}

double gbc_boundary_density(const MetricFamily& f, const Eigen::VectorXd& x) {
  if (f.dim != 4) throw ConfigError("the Gauss-Bonnet-Chern boundary term is four-dimensional");
  const int n = 4;
  const MetricJet g = f.jet(x, 2);
  const CurvaturePack cp = curvature_at(g);
  const SecondFundamentalForm sff = second_fundamental_form(x.norm(), g);
  const Eigen::MatrixXd G = g.value(), Gi = G.inverse();
  const Eigen::VectorXd nu = sff.normal_up;  // sign drops out of every term below
  const Eigen::MatrixXd II = as_matrix(sff.II);
  const Eigen::MatrixXd hup = Gi - nu * nu.transpose();
  const Eigen::MatrixXd IIup = Gi * II * Gi;
  const Eigen::MatrixXd M = Gi * II;
  const double H = sff.H;
  const double R = cp.scalar.value();
  double ric_nn = 0.0, T = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ric_nn += cp.ricci({i, j}).value() * nu(i) * nu(j);
  for (int c = 0; c < n; ++c)
    for (int d = 0; d < n; ++d) {
      if (hup(c, d) == 0.0) continue;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) T += hup(c, d) * cp.riemann_down({c, a, d, b}).value() * IIup(a, b);
    }
  const double II2 = (M * M).trace(), II3 = (M * M * M).trace();
  return R * H / 2.0 - ric_nn * H - T + H * H * H / 3.0 - H * II2 + 2.0 / 3.0 * II3;
}

double gbc_boundary_term(const MetricFamily& f, double r, int quad_degree) {
  const SphereRule rule = family_sphere_rule(f, quad_degree, true);
  return 8.0 * surface_flux(
                   [&](const Eigen::VectorXd& x) {
                     const Eigen::MatrixXd G = f.value(x);
                     const Eigen::VectorXd th = unit(x);
                     const double area = std::sqrt(G.determinant() * th.dot(G.inverse() * th));
                     return gbc_boundary_density(f, x) * area;
                   },
                   r, rule);
}

namespace {

struct BulkTerms {
  double weyl = 0.0, sigma2 = 0.0, q = 0.0;
};

BulkTerms bulk_terms(const MetricFamily& f, const Eigen::VectorXd& x, bool with_q) {
  BulkTerms b;
  if (outside_support(f, x)) return b;
  const MetricJet g = f.jet(x, with_q ? 4 : 2);
  const double vol = std::sqrt(g.value().determinant());
  const MetricJet g2(truncate_all(g.components(), 2), g.negative());
  const CurvaturePack cp = curvature_at(g2);
  const Eigen::MatrixXd Gi = g.value().inverse();
  b.weyl = squared_norm(cp.weyl, Gi) * vol;
  const Eigen::MatrixXd S = Gi * as_matrix(values(cp.schouten));
  b.sigma2 = 0.5 * (S.trace() * S.trace() - (S * S).trace()) * vol;
  if (with_q) b.q = q_curvature(g).q * vol;
  return b;
}

}  // namespace

GbcBall gauss_bonnet_chern_ball(const MetricFamily& f, double r, const EnergyOptions& opts) {
  if (f.dim != 4) throw ConfigError("gauss_bonnet_chern_ball needs n = 4");
  if (f.r_min > 0.0) throw ConfigError("gauss_bonnet_chern_ball needs a chart that covers the origin");
  GbcBall out;
  out.r = r;
  const SphereRule rule = family_sphere_rule(f, opts.volume_degree, opts.use_symmetry);
  out.bulk = cumulative_ball_integrals(
      [&](const Eigen::VectorXd& x) {
        const BulkTerms b = bulk_terms(f, x, false);
        return b.weyl + 16.0 * b.sigma2;
      },
      0.0, {r}, rule, opts.radial_nodes, f.flat_beyond)[0];
  out.boundary = gbc_boundary_term(f, r, opts.quad_degree);
  out.total = out.bulk + out.boundary;
  const SphereRule probe = sphere_quadrature(4, 2);
  for (const Eigen::VectorXd& th : probe.nodes) {
    const QCurvature q = q_curvature(f.jet(0.5 * r * th, 4));
    out.pointwise_q_residual =
        std::max(out.pointwise_q_residual, std::abs(q.q_expanded - (-q.laplacian_scalar / 6.0 + 4.0 * q.sigma2)));
  }
  return out;
}

GbcClosed gauss_bonnet_chern_closed(const MetricFamily& f, int radial_nodes) {
  if (f.dim != 4) throw ConfigError("gauss_bonnet_chern_closed needs n = 4");
  if (f.euler_characteristic != 2 || !f.radial)
    throw ConfigError("gauss_bonnet_chern_closed needs a rotation-invariant compactified chart");
  const SphereRule rule = radial_sphere_rule(4);
  GbcClosed out;
  out.weyl_integral = whole_chart_integral([&](const Eigen::VectorXd& x) { return bulk_terms(f, x, false).weyl; }, rule,
                                           radial_nodes / 2);
  out.sigma2_integral = 16.0 * whole_chart_integral(
                                   [&](const Eigen::VectorXd& x) { return bulk_terms(f, x, false).sigma2; }, rule,
                                   radial_nodes / 2);
  const double q_int =
      whole_chart_integral([&](const Eigen::VectorXd& x) { return bulk_terms(f, x, true).q; }, rule, radial_nodes / 2);
  out.weyl_plus_4q = out.weyl_integral + 4.0 * q_int;
  out.expected = 32.0 * kPi * kPi * 2.0;
  return out;
}

GbcDefect gauss_bonnet_chern_defect(const MetricFamily& f, const EnergyOptions& opts) {
  if (f.dim != 4) throw ConfigError("gauss_bonnet_chern_defect needs n = 4");
  if (f.r_min > 0.0) throw ConfigError("gauss_bonnet_chern_defect needs a chart that covers the origin");
  const SphereRule rule = family_sphere_rule(f, opts.volume_degree, opts.use_symmetry);
  const std::vector<double> cum = cumulative_ball_integrals(
      [&](const Eigen::VectorXd& x) {
        const BulkTerms b = bulk_terms(f, x, true);
        return b.weyl + 4.0 * b.q;
      },
      0.0, opts.radii, rule, opts.radial_nodes, f.flat_beyond);
  GbcDefect out;
  out.series = extrapolate_limit(opts.radii, cum);
  const int chi = f.euler_characteristic.value_or(1);
  out.defect = out.series.limit - 32.0 * kPi * kPi * (chi - 1);
  return out;
}

GaussBonnet2d gauss_bonnet_2d(const MetricFamily& f, double r, const EnergyOptions& opts) {
  if (f.dim != 2) throw ConfigError("gauss_bonnet_2d needs n = 2");
  if (f.r_min > 0.0) throw ConfigError("gauss_bonnet_2d needs a chart that covers the origin");
  GaussBonnet2d out;
  out.r = r;
  const SphereRule rule = family_sphere_rule(f, opts.quad_degree, opts.use_symmetry);
  out.curvature_integral = cumulative_ball_integrals(
      [&](const Eigen::VectorXd& x) {
        if (outside_support(f, x)) return 0.0;
        const MetricJet g = f.jet(x, 2);
        const Connection c = connection(g);
        return 0.5 * scalar_curvature(c, ricci_tensor(c)).value() * std::sqrt(g.value().determinant());
      },
      0.0, {r}, rule, opts.radial_nodes, f.flat_beyond)[0];
  auto kg = [&](const Eigen::VectorXd& x) {
    const MetricJet g = f.jet(x, 1);
    return second_fundamental_form(x.norm(), g).H;
  };
  out.geodesic_curvature = surface_flux(
      [&](const Eigen::VectorXd& x) {
        const Eigen::MatrixXd G = f.value(x);
        const Eigen::VectorXd th = unit(x);
        return kg(x) * std::sqrt(G.determinant() * th.dot(G.inverse() * th));
      },
      r, rule);
  out.chi_estimate = (out.curvature_integral + out.geodesic_curvature) / (2.0 * kPi);
  const int chi = f.euler_characteristic.value_or(1);
  out.defect = 2.0 * kPi * chi - 2.0 * kPi - out.curvature_integral;
  std::vector<double> excess;
  for (double rad : opts.radii) {
    double worst = 0.0;
    for (const Eigen::VectorXd& th : rule.nodes) worst = std::max(worst, std::abs(kg(rad * th) - 1.0 / rad));
    excess.push_back(worst <= 1e-12 / rad ? 0.0 : worst);
  }
  const bool vanishes = std::all_of(excess.begin(), excess.end(), [](double e) { return e == 0.0; });
  out.kg_excess_slope = vanishes ? std::nan("") : log_log_slope(opts.radii, excess);
  return out;
}

double paneitz_boundary_flux(const MetricFamily& f, const JetField& phi, double r, double c, const SphereRule& rule) {
  if (f.negative != 0) throw ConfigError("paneitz_boundary_flux needs a Riemannian metric");
  const int n = f.dim;
  return surface_flux(
      [&](const Eigen::VectorXd& x) {
        const MetricJet g = f.jet(x, 3);
        const std::vector<Jet> X = coordinate_jets(x, 3);
        const Jet P = phi(X);
        if (P.order() < 3) throw OrderError("paneitz_boundary_flux needs Φ jets of order >= 3");
        // move Φ onto the metric's base pointer
        const Jet Pg(P.layout(), g.base(), P.coeffs());
        const Connection conn = connection(g);
        const Eigen::VectorXd grad_lap = laplace_beltrami(Pg, conn).gradient();
        const Eigen::VectorXd grad_phi = Pg.gradient();
        const JetTensor ric = ricci_tensor(conn);
        const Eigen::MatrixXd G = g.value(), Gi = G.inverse();
        Eigen::MatrixXd Ric(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) Ric(i, j) = ric({i, j}).value();
        const Eigen::VectorXd th = unit(x);
        const double norm = std::sqrt(th.dot(Gi * th));
        const Eigen::VectorXd nu = Gi * th / norm;  // outer unit normal ν^i
        const double area = std::sqrt(G.determinant()) * norm;
        const double term = grad_lap.dot(nu) + c * (Ric * (Gi * grad_phi)).dot(nu);
        return term * area;
      },
      r, rule);
}

}  // namespace plab
