#include "paneitz/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd random_point(std::mt19937_64& rng, int n, double r_lo, double r_hi) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> radius(r_lo, r_hi);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = gauss(rng);
  return radius(rng) * d.normalized();
}

Jet squared_radius(const std::vector<Jet>& x) {
  Jet s = x[0] * x[0];
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
  return s;
}

/// Collects checks against the (possibly overridden) tolerance table.
class Recorder {
 public:
  Recorder(std::string suite, const SuiteOptions& opts) : suite_(std::move(suite)), opts_(opts) {}

  double tolerance(const std::string& key) const {
    const std::string full = suite_ + "." + key;
    if (auto it = opts_.tolerance_overrides.find(full); it != opts_.tolerance_overrides.end()) return it->second;
    return suite_tolerances().at(full);
  }

  void residual(const std::string& name, const std::string& key, double residual, double value = 0.0,
                double expected = 0.0, std::string note = {}) {
    CheckResult c;
    c.name = name;
    c.tolerance_key = suite_ + "." + key;
    c.value = value;
    c.expected = expected;
    c.residual = residual;
    c.tolerance = tolerance(key);
    c.passed = std::isfinite(residual) && residual <= c.tolerance;
    c.note = std::move(note);
    out_.checks.push_back(std::move(c));
  }
  void absolute(const std::string& name, const std::string& key, double value, double expected) {
    residual(name, key, std::abs(value - expected), value, expected);
  }
  /// |value - expected| / max(|expected|, scale).
  void relative(const std::string& name, const std::string& key, double value, double expected, double scale = 0.0) {
    const double denom = std::max(std::abs(expected), scale);
    residual(name, key, denom > 0.0 ? std::abs(value - expected) / denom : std::abs(value - expected), value,
             expected);
  }
  void failure(const std::string& name, const std::string& key, const std::exception& e) {
    residual(name, key, std::numeric_limits<double>::infinity(), 0.0, 0.0, e.what());
  }

  SuiteResult take() {
    out_.suite = suite_;
    return std::move(out_);
  }

 private:
  std::string suite_;
  const SuiteOptions& opts_;
  SuiteResult out_;
};

// --- forms ---------------------------------------------------------------------

void suite_forms(Recorder& rec, const SuiteOptions& opts) {
  EnergyOptions eo;
  eo.quad_degree = opts.quad_degree;
  for (const auto& f : {flat(5), schwarzschild_slice(5, 1.0), c_family(5, 0.01), bump(5, 0.01)}) {
    std::map<EnergyForm, double> e;
    for (EnergyForm form : {EnergyForm::Surface, EnergyForm::ScalarFlux, EnergyForm::Volume}) {
      const EnergyReport rep = energy(f, form, eo);
      e[form] = rep.value;
      rec.residual(f.name + " " + to_string(form) + " gates", "gates", rep.gates_ok() ? 0.0 : 1.0, rep.value);
    }
    const double scale = std::max(1.0, std::abs(e[EnergyForm::Surface]));
    auto pair = [&](EnergyForm a, EnergyForm b) {
      rec.residual(f.name + " " + to_string(a) + " vs " + to_string(b), "agreement",
                   std::abs(e[a] - e[b]) / scale, e[a], e[b]);
    };
    pair(EnergyForm::Surface, EnergyForm::ScalarFlux);
    pair(EnergyForm::Surface, EnergyForm::Volume);
    pair(EnergyForm::ScalarFlux, EnergyForm::Volume);
    if (auto it = f.exact.find("E"); it != f.exact.end())
      rec.relative(f.name + " surface vs closed form", "agreement", e[EnergyForm::Surface], it->second, 1.0);
  }
}

// --- low dimensions --------------------------------------------------------------

void suite_lowdim(Recorder& rec, const SuiteOptions& opts) {
  EnergyOptions eo;
  eo.quad_degree = opts.quad_degree;
  eo.radii = {1e4, 1e5, 1e6, 1e7};
  for (int n : {3, 4})
    for (const auto& f : registered_ae_families(n)) {
      if (!(f.tau > 0.0)) continue;
      for (EnergyForm form : {EnergyForm::Surface, EnergyForm::ScalarFlux, EnergyForm::Volume}) {
        try {
          const EnergyReport rep = energy(f, form, eo);
          rec.absolute(f.name + " " + to_string(form), "energy", rep.value, 0.0);
        } catch (const std::exception& e) {
          rec.failure(f.name + " " + to_string(form), "energy", e);
        }
      }
    }
}

// --- blow-up mass ------------------------------------------------------------------

void suite_blowup_mass(Recorder& rec, const SuiteOptions& opts) {
  EnergyOptions eo;
  eo.quad_degree = opts.quad_degree;
  rec.relative("gamma_5 = 1/(16 pi^2)", "relative", green_gamma(5), 1.0 / (16.0 * kPi * kPi));
  for (int n : {5, 6})
    for (double alpha : {0.1, 1.0}) {
      const MetricFamily f = invert_blowup(flat(n), paneitz_green(n, alpha));
      const double expected = 8.0 * (n - 1.0) * (n - 2.0) * sphere_area(n) * green_gamma(n) * alpha;
      for (EnergyForm form : {EnergyForm::Surface, EnergyForm::ScalarFlux, EnergyForm::Volume}) {
        const EnergyReport rep = energy(f, form, eo);
        rec.relative(f.name + " alpha=" + std::to_string(alpha).substr(0, 3) + " " + to_string(form), "relative",
                     rep.value, expected);
      }
    }
}

// --- conformal laws ------------------------------------------------------------------

struct Factor {
  std::string name;
  std::function<Jet(const std::vector<Jet>&)> u;
};

std::vector<Factor> conformal_factors(ConformalMode mode) {
  if (mode == ConformalMode::Exponential)
    return {{"0.05 x1", [](const std::vector<Jet>& x) { return 0.05 * x[0]; }},
            {"0.1 exp(-|x|^2/10)", [](const std::vector<Jet>& x) { return 0.1 * exp(-squared_radius(x) / 10.0); }},
            {"0.02 x1 x2 + 0.03 x3^2", [](const std::vector<Jet>& x) { return 0.02 * x[0] * x[1] + 0.03 * x[2] * x[2]; }}};
  return {{"1 + 0.1 exp(-|x|^2/10)", [](const std::vector<Jet>& x) { return 1.0 + 0.1 * exp(-squared_radius(x) / 10.0); }},
          {"sqrt(1 + 0.1 (x1 - 0.3 x2)^2)",
           [](const std::vector<Jet>& x) {
             const Jet t = x[0] - 0.3 * x[1];
             return sqrt(1.0 + 0.1 * t * t);
           }},
          {"exp(0.05 x1 - 0.03 x3)", [](const std::vector<Jet>& x) { return exp(0.05 * x[0] - 0.03 * x[2]); }}};
}

void suite_conformal(Recorder& rec, const SuiteOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const std::vector<MetricFamily> bases{sphere_stereo(4), schwarzschild_slice(5, 1.0), bubble(6, 0.3)};
  for (const auto& g : bases) {
    const int n = g.dim;
    const ConformalMode mode = n == 4 ? ConformalMode::Exponential : ConformalMode::QPower;
    std::vector<Eigen::VectorXd> points;
    for (int k = 0; k < 10; ++k) points.push_back(random_point(rng, n, 1.0, 2.0));
    for (const auto& factor : conformal_factors(mode)) {
      double law = 0.0, cov = 0.0;
      for (const auto& x : points) {
        const MetricJet gj = g.jet(x, 4);
        const auto X = coordinate_jets(x, 4);
        const Jet u = factor.u(X);
        const Jet phi = 1.0 + 0.2 * X[0] - 0.1 * X[1] * X[1] + 0.05 * X[0] * X[2] * X[n - 1];
        law = std::max(law, q_transform_check(gj, mode, u).residual);
        cov = std::max(cov, paneitz_covariance_check(gj, mode, u, phi).residual);
      }
      rec.residual(g.name + " Q law, u = " + factor.name, "residual", law);
      rec.residual(g.name + " Paneitz covariance, u = " + factor.name, "residual", cov);
    }
  }
}

// --- four dimensions: κ and the Gursky flux model --------------------------------------

void suite_fourd_gursky(Recorder& rec, const SuiteOptions& opts) {
  const double sixteen_pi2 = 16.0 * kPi * kPi;
  const MetricFamily s4 = round_s4_chart();
  rec.relative("kappa(S^4)", "kappa", kappa(s4).value, sixteen_pi2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  rec.relative("Q(S^4) at the pole", "kappa", q_curvature(s4.jet(x, 4)).q, 6.0);

  // ĝ = G^2 δ with G = |x|^{-2} + A is flat beyond the core; Φ carries the
  // logarithmic part of the Green function of P.
  const MetricFamily g = invert_blowup(flat(4), laplacian_green(4, 0.25));
  const double A = 0.25, S0 = 0.3;
  const double scale = 8.0 * sphere_area(4);
  for (double ah : {0.5, 1.0}) {
    JetField phi = [=](const std::vector<Jet>& z) {
      const Jet s = squared_radius(z);
      return ah * log(s) + S0 - log(s + A);
    };
    std::vector<double> radii{10, 20, 40, 80}, flux;
    for (double r : radii) flux.push_back(paneitz_boundary_flux(g, phi, r, 2.0, radial_sphere_rule(4)));
    const FluxSeries s = extrapolate_limit(radii, flux);
    rec.relative("Gursky flux, alpha_hat = " + std::to_string(ah).substr(0, 3), "relative", s.limit,
                 scale * (1.0 - ah), scale);
  }
  (void)opts;
}

// --- Gauss-Bonnet-Chern ----------------------------------------------------------------------

void suite_gbc(Recorder& rec, const SuiteOptions& opts) {
  const double target = 32.0 * kPi * kPi;
  for (double r : {2.0, 10.0})
    rec.relative("flat ball boundary, r = " + std::to_string(static_cast<int>(r)), "boundary",
                 gbc_boundary_term(flat(4), r, opts.quad_degree), target);
  const GbcClosed closed = gauss_bonnet_chern_closed(round_s4_chart());
  rec.relative("S^4: integral of 16 sigma2(S)", "closed", closed.sigma2_integral, 2.0 * target);
  rec.relative("S^4: integral of |W|^2 + 4Q", "closed", closed.weyl_plus_4q, closed.expected);

  EnergyOptions eo;
  eo.quad_degree = opts.quad_degree;
  const GbcBall cap = gauss_bonnet_chern_ball(sphere_stereo(4), 1.0, eo);
  rec.relative("hemisphere ball total", "ball", cap.total, target);
  rec.residual("hemisphere pointwise Q identity", "pointwise", cap.pointwise_q_residual);
  const GbcBall bumped = gauss_bonnet_chern_ball(bump(4, 0.01), 4.0, eo);
  rec.relative("bump4 ball total, r = 4", "ball", bumped.total, target);
  rec.residual("bump4 pointwise Q identity", "pointwise", bumped.pointwise_q_residual);
}

// --- two dimensions --------------------------------------------------------------------------

void suite_twodim(Recorder& rec, const SuiteOptions& opts) {
  EnergyOptions eo;
  eo.quad_degree = opts.quad_degree;
  for (double r : {2.0, 10.0}) {
    const GaussBonnet2d p = gauss_bonnet_2d(flat(2), r, eo);
    rec.absolute("plane chi estimate, r = " + std::to_string(static_cast<int>(r)), "chi", p.chi_estimate, 1.0);
  }
  for (double r : {4.0, 8.0}) {
    const GaussBonnet2d b = gauss_bonnet_2d(surface_bump(0.05), r, eo);
    rec.residual("surface_bump defect, r = " + std::to_string(static_cast<int>(r)), "defect", std::abs(b.defect),
                 b.defect);
  }
  const GaussBonnet2d t = gauss_bonnet_2d(surface_tail(0.2), 40.0, eo);
  rec.absolute("surface_tail geodesic curvature excess slope", "slope", t.kg_excess_slope, -3.0);
}

// --- A-tensor ---------------------------------------------------------------------------------

double max_abs(const PointTensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

void suite_a_tensor(Recorder& rec, const SuiteOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const std::vector<std::pair<double, double>> couplings{{1.0, 0.0}, {0.0, 1.0}, {0.7, -1.3}};
  const MetricFamily mink = minkowski(3);
  const MetricFamily product =
      static_spacetime(flat(3), [](const Jet& r) { return Jet::constant_like(1.0, r); }, "static_flat");
  const MetricFamily schw = schwarzschild_spacetime(1.0);
  double mink_max = 0.0, product_max = 0.0, schw_max = 0.0;
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd x(4);
    x(0) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    x.tail(3) = random_point(rng, 3, 3.0, 6.0);
    for (auto [a, b] : couplings) {
      mink_max = std::max(mink_max, max_abs(a_tensor_value(mink.jet(x, 4), a, b)));
      product_max = std::max(product_max, max_abs(a_tensor_value(product.jet(x, 4), a, b)));
      schw_max = std::max(schw_max, max_abs(a_tensor_value(schw.jet(x, 4), a, b)));
    }
  }
  rec.residual("Minkowski", "exact", mink_max);
  rec.residual("static flat product", "exact", product_max);
  rec.residual("Schwarzschild spacetime", "zero", schw_max);

  const MetricFamily pert = polynomial_perturbation(4, 1e-2, rng);
  double div = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd x = random_point(rng, 4, 0.1, 0.8);
    for (auto [a, b] : couplings) div = std::max(div, a_divergence(pert.jet(x, 5), a, b).relative_residual);
  }
  rec.residual("divergence, quartic perturbation of flat", "divergence", div);
  double schw_div = 0.0;
  Eigen::VectorXd y(4);
  y << 0.3, 3.0, -1.0, 2.0;
  for (auto [a, b] : couplings) schw_div = std::max(schw_div, a_divergence(schw.jet(y, 5), a, b).divergence.cwiseAbs().maxCoeff());
  rec.residual("divergence, Schwarzschild spacetime", "zero", schw_div);
}

// --- rigidity ----------------------------------------------------------------------------------

void suite_rigidity(Recorder& rec, const SuiteOptions&) {
  const RigidityCheck rc = rigidity_identity_check(radial_tail(5, 0.05));
  rec.residual("radial_tail5 identity limit", "identity", rc.residual, rc.lhs_limit, rc.rhs_limit);
  rec.residual("radial_tail5 finite-radius identity", "finite", rc.finite_radius_residual);
  rec.relative("radial_tail5 energy vs closed form", "identity", rc.energy_limit, 32.0 * 0.05 * sphere_area(5));
  rec.residual("radial_tail5 flattened scalar curvature", "scalar", rc.flattening.max_abs_scalar);

  const ScalarFlattening bub = scalar_flatten_radial(bubble(5, 0.3));
  rec.residual("bubble5 flattened scalar curvature", "scalar", bub.max_abs_scalar);
  rec.residual("bubble5 tail fit u = 1 + a r^{2-n}", "tail", bub.tail_residual, bub.tail_coefficient);
  rec.residual("bubble5 u > 0", "scalar", bub.min_u > 0.0 ? 0.0 : 1.0, bub.min_u);

  const ScalarFlattening sch = scalar_flatten_radial(schwarzschild_slice(5, 1.0));
  rec.absolute("schwarzschild_slice5 u = 1", "unit", sch.min_u, 1.0);
  rec.absolute("schwarzschild_slice5 v_inf = 1", "unit", sch.v_inf(), 1.0);
}

// --- three dimensions -----------------------------------------------------------------------------

void suite_threedim(Recorder& rec, const SuiteOptions&) {
  // ĝ = G^4 δ with G = |x|^{-1} + 1/2; Φ = A(ρ + 1/2) in the blow-up chart.
  const MetricFamily g = invert_blowup(flat(3), laplacian_green(3, 0.5));
  for (double A : {1.0, 2.5}) {
    JetField phi = [=](const std::vector<Jet>& z) { return A * (sqrt(squared_radius(z)) + 0.5); };
    std::vector<double> radii{100, 200, 400, 800}, flux;
    for (double r : radii) flux.push_back(-paneitz_boundary_flux(g, phi, r, 4.0, radial_sphere_rule(3)));
    const FluxSeries s = extrapolate_limit(radii, flux);
    rec.relative("model flux, A = " + std::to_string(A).substr(0, 3), "relative", s.limit, 8.0 * kPi * A);
  }
}

// --- finite-difference oracle ----------------------------------------------------------------------

struct OracleFamily {
  MetricFamily family;
  double r_lo, r_hi;
};

/// Oracle step per differenced order, balancing the truncation error of the
/// eighth-order stencils against rounding in the differenced values.
double oracle_step(int order, double r) {
  static const double base[] = {0.0, 0.02, 0.05};
  return base[std::clamp(order, 1, 2)] * std::max(0.6, r / 2.5);
}

/// Worst relative disagreement between the metric jet at x and the oracle, for
/// every component and every multi-index of order 1..4.  Orders 1 and 2 difference
/// metric values; orders 3 and 4 difference second derivatives taken from order-2
/// jets at the stencil points, so rounding enters through h^{-(m-2)} only.
/// Disagreements are measured against the largest same-order derivative at x.
double metric_oracle(const MetricFamily& f, const Eigen::VectorXd& x) {
  const int n = f.dim;
  const int max_order = 4;
  const MetricJet gj = f.jet(x, max_order);
  std::map<std::vector<double>, MetricJet> cache;
  auto jet_at = [&](const Eigen::VectorXd& y, int order) -> const MetricJet& {
    std::vector<double> key(y.data(), y.data() + y.size());
    key.push_back(order);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(std::move(key), f.jet(y, order)).first;
    return it->second;
  };
  const auto layout = JetLayout::get(n, max_order);
  double worst = 0.0;
  for (int m = 1; m <= max_order; ++m) {
    const std::size_t end = m < max_order ? layout->degree_begin(m + 1) : layout->size();
    double scale = 0.0;
    for (std::size_t k = layout->degree_begin(m); k < end; ++k)
      for (const Jet& c : gj.components()) scale = std::max(scale, std::abs(c.derivative(layout->index(k))));
    for (std::size_t k = layout->degree_begin(m); k < end; ++k) {
      const MultiIndex& alpha = layout->index(k);
      // split alpha = beta + gamma with |gamma| = min(2, m - 2)
      MultiIndex gamma(static_cast<std::size_t>(n), 0), beta = alpha;
      for (int need = m >= 3 ? 2 : 0, i = 0; need > 0 && i < n; ++i)
        while (need > 0 && beta[static_cast<std::size_t>(i)] > 0) {
          --beta[static_cast<std::size_t>(i)];
          ++gamma[static_cast<std::size_t>(i)];
          --need;
        }
      const int differenced = m >= 3 ? m - 2 : m;
      const int order = m >= 3 ? 2 : 0;
      const double h = oracle_step(differenced, x.norm());
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          auto field = [&](const Eigen::VectorXd& y) { return jet_at(y, order)(i, j).derivative(gamma); };
          const double fd = fd_derivative(field, x, beta, h, 8);
          const double jet = gj(i, j).derivative(alpha);
          const double denom = std::max(std::abs(jet), scale);
          worst = std::max(worst, denom > 0.0 ? std::abs(jet - fd) / denom : std::abs(jet - fd));
        }
    }
  }
  return worst;
}

void suite_oracle(Recorder& rec, const SuiteOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::vector<OracleFamily> fams{
      {schwarzschild_slice(5, 1.0), 1.0, 6.0},
      {c_family(5, 0.01), 1.0, 6.0},
      {bump(5, 0.01), 0.5, 3.0},
      {invert_blowup(flat(5), paneitz_green(5, 1.0)), 1.5, 6.0},
      {invert_blowup(flat(6), paneitz_green(6, 0.1)), 1.5, 6.0},
      {bump(4, 0.01), 0.5, 3.0},
      {make_family("blowup4"), 1.5, 6.0},
      {round_s4_chart(), 0.2, 3.0},
      {invert_blowup(flat(4), laplacian_green(4, 0.25)), 1.5, 6.0},
      {invert_blowup(flat(3), laplacian_green(3, 0.5)), 1.5, 6.0},
      {registered_ae_families(3).back(), 1.5, 6.0},
      {surface_bump(0.05), 0.5, 3.0},
      {surface_tail(0.2), 0.5, 6.0},
      {radial_tail(5, 0.05), 0.5, 6.0},
      {bubble(5, 0.3), 0.5, 6.0},
      {schwarzschild_spacetime(1.0), 3.0, 6.0},
      {polynomial_perturbation(4, 1e-2, rng), 0.1, 0.8},
  };
  std::map<std::string, double> worst;
  double scalar_worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const OracleFamily& of = fams[static_cast<std::size_t>(k) % fams.size()];
    const MetricFamily& f = of.family;
    // keep the stencils (at most 4 steps per axis) clear of the excluded core
    const double r_lo = std::max(of.r_lo, f.r_min + 0.5);
    Eigen::VectorXd x;
    if (f.negative == 1) {
      x.resize(f.dim);
      x(0) = 0.5;
      x.tail(f.dim - 1) = random_point(rng, f.dim - 1, r_lo, of.r_hi);
    } else {
      x = random_point(rng, f.dim, r_lo, of.r_hi);
    }
    worst[f.name] = std::max(worst[f.name], metric_oracle(f, x));
    if (f.negative == 0 && f.dim >= 2) {
      // gradient of the jet-computed scalar curvature against differences of R,
      // measured against the size of ∂Ric (R vanishes on scalar-flat families)
      auto R = [&](const Eigen::VectorXd& y) { return curvature_at(f.jet(y, 2)).scalar.value(); };
      const CurvaturePack cp = curvature_at(f.jet(x, 3));
      const Eigen::VectorXd grad = cp.scalar.gradient();
      double gscale = grad.cwiseAbs().maxCoeff();
      for (const Jet& c : cp.ricci.data()) gscale = std::max(gscale, c.gradient().cwiseAbs().maxCoeff());
      for (int a = 0; a < f.dim; ++a) {
        std::vector<int> alpha(static_cast<std::size_t>(f.dim), 0);
        alpha[static_cast<std::size_t>(a)] = 1;
        const double fd = fd_derivative(R, x, alpha, oracle_step(1, x.norm()), 8);
        const double err = std::abs(grad(a) - fd);
        scalar_worst = std::max(scalar_worst, gscale > 0.0 ? err / gscale : err);
      }
    }
  }
  for (const auto& [name, w] : worst) rec.residual(name + " metric derivatives to order 4", "relative", w);
  rec.residual("scalar curvature gradient", "relative", scalar_worst);

  // radial flattening: u' against differences of u
  const ScalarFlattening s = scalar_flatten_radial(bubble(5, 0.3));
  double uw = 0.0;
  for (double r : {0.5, 1.0, 3.0, 10.0}) {
    const double h = 1e-3 * r;
    const double fd = (s.value(r - 2 * h).first - 8 * s.value(r - h).first + 8 * s.value(r + h).first -
                       s.value(r + 2 * h).first) /
                      (12 * h);
    const double du = s.value(r).second;
    uw = std::max(uw, std::abs(du - fd) / std::max(std::abs(du), 1e-12));
  }
  rec.residual("bubble5 flattening u'", "relative", uw);
}

using SuiteFn = void (*)(Recorder&, const SuiteOptions&);

const std::vector<std::pair<std::string, SuiteFn>>& suite_table() {
  static const std::vector<std::pair<std::string, SuiteFn>> table{
      {"forms", suite_forms},         {"lowdim", suite_lowdim},   {"blowup-mass", suite_blowup_mass},
      {"conformal", suite_conformal}, {"fourd-gursky", suite_fourd_gursky}, {"gbc", suite_gbc},
      {"twodim", suite_twodim},       {"a-tensor", suite_a_tensor}, {"rigidity", suite_rigidity},
      {"threedim", suite_threedim},   {"oracle", suite_oracle}};
  return table;
}

}  // namespace

PointInvariants point_invariants(const MetricFamily& f, const Eigen::VectorXd& x, int jet_order) {
  if (f.negative != 0) throw ConfigError("invariants need a Riemannian family");
  if (f.dim < 3) throw ConfigError("invariants need n >= 3");
  if (x.size() != f.dim) throw ConfigError("point has " + std::to_string(x.size()) + " coordinates, family " + f.name +
                                           " has dimension " + std::to_string(f.dim));
  if (jet_order < 4) throw OrderError("invariants need jet order >= 4");
  const MetricJet g = f.jet(x, jet_order);
  const CurvaturePack cp = curvature_at(g);
  const QCurvature q = q_curvature(g);
  const Eigen::MatrixXd G = g.value();
  const Eigen::MatrixXd Gi = G.inverse();
  PointInvariants out;
  out.point = x;
  out.scalar = q.scalar;
  const Eigen::MatrixXd ric = as_matrix(values(cp.ricci));
  // eigenvalues of g^{-1} Ric via the symmetric pencil (Ric, g)
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ric + ric.transpose()), G);
  out.ricci_eigenvalues = es.eigenvalues();
  out.ricci_norm2 = q.ricci_norm2;
  out.weyl_norm2 = squared_norm(cp.weyl, Gi);
  out.q_sigma = q.q_sigma;
  out.q_expanded = q.q_expanded;
  out.sigma1 = q.sigma1;
  out.sigma2 = q.sigma2;
  return out;
}

bool SuiteResult::passed() const { return first_failure() == nullptr; }

const CheckResult* SuiteResult::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : suite_table()) out.push_back(name);
  return out;
}

const std::map<std::string, double>& suite_tolerances() {
  static const std::map<std::string, double> table{
      {"forms.agreement", 1e-4},        {"forms.gates", 0.0},
      {"lowdim.energy", 1e-6},          {"blowup-mass.relative", 1e-4},
      {"conformal.residual", 1e-8},     {"fourd-gursky.kappa", 1e-6},
      {"fourd-gursky.relative", 1e-4},  {"gbc.boundary", 1e-9},
      {"gbc.closed", 1e-6},             {"gbc.ball", 1e-8},
      {"gbc.pointwise", 1e-8},          {"twodim.chi", 1e-9},
      {"twodim.defect", 1e-8},          {"twodim.slope", 0.1},
      {"a-tensor.exact", 0.0},          {"a-tensor.zero", 1e-8},
      {"a-tensor.divergence", 1e-6},    {"rigidity.identity", 1e-3},
      {"rigidity.finite", 1e-8},        {"rigidity.scalar", 1e-7},
      {"rigidity.tail", 1e-6},          {"rigidity.unit", 1e-10},
      {"threedim.relative", 1e-4},      {"oracle.relative", 1e-6}};
  return table;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts) {
  for (const auto& [key, value] : opts.tolerance_overrides) {
    if (!suite_tolerances().count(key)) throw ConfigError("unknown tolerance key '" + key + "'");
    if (!(value >= 0.0)) throw ConfigError("tolerance '" + key + "' must be non-negative");
  }
  for (const auto& [suite, fn] : suite_table()) {
    if (suite != name) continue;
    Recorder rec(suite, opts);
    const auto t0 = std::chrono::steady_clock::now();
    fn(rec, opts);
    SuiteResult out = rec.take();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }
  std::string known;
  for (const auto& s : suite_names()) known += (known.empty() ? "" : ", ") + s;
  throw ConfigError("unknown suite '" + name + "' (" + known + ")");
}

}  // namespace plab
