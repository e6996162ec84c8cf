#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include <boost/numeric/odeint.hpp>

#include "paneitz/functionals.hpp"

namespace plab {

namespace {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 2>;  // (v, r v') in t = ln r

constexpr double kStartRadius = 1e-4;
constexpr double kEndRadius = 1e8;
constexpr double kSampleStep = 0.02;  // spacing of stored samples in ln r

double yamabe_constant(int n) { return (n - 2.0) / (4.0 * (n - 1.0)); }

void require_radial(const MetricFamily& f) {
  if (!f.radial || !f.radial_weight) throw ConfigError("family " + f.name + " is not a radial conformally flat metric");
  if (f.dim < 3) throw ConfigError("scalar flattening needs n >= 3");
  if (f.negative != 0) throw ConfigError("scalar flattening needs a Riemannian metric");
}

/// r p(r) and r^2 q(r) of u'' + p u' = q u.
std::pair<double, double> ode_coefficients(const MetricFamily& f, double r) {
  const RadialCoefficients c = radial_coefficients(f, r, 0);
  const int n = f.dim;
  const double rp = (n - 1.0) + 0.5 * (n - 2.0) * r * c.log_w_prime.value();
  const double r2q = r * r * yamabe_constant(n) * c.w.value() * c.scalar.value();
  return {rp, r2q};
}

struct Rhs {
  const MetricFamily* f;
  void operator()(const State& y, State& dy, double t) const {
    const double r = std::exp(t);
    const auto [rp, r2q] = ode_coefficients(*f, r);
    dy[0] = y[1];
    dy[1] = y[1] + r2q * y[0] - rp * y[1];
  }
};

State integrate_to(const MetricFamily& f, State y, double r_from, double r_to, double tol) {
  if (r_to == r_from) return y;
  auto stepper = ode::make_controlled(tol * 1e-2, tol, ode::runge_kutta_dopri5<State>());
  const double t0 = std::log(r_from), t1 = std::log(r_to);
  ode::integrate_adaptive(stepper, Rhs{&f}, y, t0, t1, (t1 - t0) / 16.0);
  return y;
}

}  // namespace

RadialCoefficients radial_coefficients(const MetricFamily& f, double r, int order) {
  require_radial(f);
  if (!(r > 0.0)) throw DomainError("radial coefficients need r > 0");
  const int n = f.dim;
  Eigen::VectorXd p(1);
  p(0) = r;
  const BasePoint base = make_base(p);
  const Jet rj = Jet::variable(0, order + 2, base);
  const Jet w = f.radial_weight(rj * rj);
  const Jet U = pow(w, (n - 2.0) / 4.0);
  const Jet dU = U.partial(0);
  const Jet lap = dU.partial(0) + (n - 1.0) * (dU.truncated(order) / rj.truncated(order));
  RadialCoefficients out;
  out.w = w.truncated(order);
  out.log_w_prime = log(w).partial(0).truncated(order);
  out.scalar = -4.0 * (n - 1.0) / (n - 2.0) * pow(U.truncated(order), -(n + 2.0) / (n - 2.0)) * lap;
  return out;
}

ScalarFlattening::ScalarFlattening(MetricFamily family, double r_start, std::vector<Sample> path, double v_inf)
    : family_(std::move(family)), r_start_(r_start), path_(std::move(path)), v_inf_(v_inf) {}

std::pair<double, double> ScalarFlattening::value(double r) const {
  if (path_.empty()) throw ConfigError("empty scalar flattening");
  if (r < r_start_ * (1.0 - 1e-12) || r > path_.back().r)
    throw DomainError("radius " + std::to_string(r) + " lies outside the flattening range");
  r = std::max(r, r_start_);
  auto it = std::upper_bound(path_.begin(), path_.end(), r, [](double v, const Sample& s) { return v < s.r; });
  const Sample& s = *std::prev(it);
  const State y = integrate_to(family_, State{s.u, s.r * s.du}, s.r, r, 1e-13);
  return {y[0] / v_inf_, y[1] / (r * v_inf_)};
}

std::vector<double> ScalarFlattening::taylor(double r, int order) const {
  const auto [u0, u1] = value(r);
  std::vector<double> a(static_cast<std::size_t>(order + 1), 0.0);
  a[0] = u0;
  if (order >= 1) a[1] = u1;
  if (order < 2) return a;
  const RadialCoefficients c = radial_coefficients(family_, r, order - 2);
  const int n = family_.dim;
  const Jet rj = Jet::variable(0, order - 2, c.w.base());
  const Jet pj = (n - 1.0) * inv(rj) + 0.5 * (n - 2.0) * c.log_w_prime;
  const Jet qj = yamabe_constant(n) * c.w * c.scalar;
  const auto& P = pj.coeffs();
  const auto& Q = qj.coeffs();
  // (k+2)(k+1) a_{k+2} = -Σ_j p_j (k-j+1) a_{k-j+1} + Σ_j q_j a_{k-j}
  for (int k = 0; k + 2 <= order; ++k) {
    double s = 0.0;
    for (int j = 0; j <= k; ++j) {
      s -= P[static_cast<std::size_t>(j)] * (k - j + 1) * a[static_cast<std::size_t>(k - j + 1)];
      s += Q[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k - j)];
    }
    a[static_cast<std::size_t>(k + 2)] = s / ((k + 2.0) * (k + 1.0));
  }
  return a;
}

Jet ScalarFlattening::evaluate(const std::vector<Jet>& x) const {
  Jet s = x[0] * x[0];
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
  if (s.value() <= 0.0) throw DomainError("scalar flattening is not expanded at the origin");
  const Jet r = sqrt(s);
  const std::vector<double> a = taylor(r.value(), r.order());
  return compose_series(a, r);
}

MetricFamily ScalarFlattening::flattened() const {
  const auto self = std::make_shared<const ScalarFlattening>(*this);
  const int n = family_.dim;
  MetricFamily g;
  g.name = family_.name + "_flattened";
  g.dim = n;
  g.radial = true;
  g.tau = family_.tau;
  g.r_min = r_start_;
  g.euler_characteristic = family_.euler_characteristic;
  g.params = family_.params;
  g.exact = {{"R", 0.0}};
  const RadialWeightFn w0 = family_.radial_weight;
  g.radial_weight = [self, w0, n](const Jet& s) {
    const Jet r = sqrt(s);
    const Jet u = compose_series(self->taylor(r.value(), r.order()), r);
    return pow(u, 4.0 / (n - 2.0)) * w0(s);
  };
  g.components = [w = g.radial_weight, n](const std::vector<Jet>& x) {
    Jet s = x[0] * x[0];
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
    const Jet wv = w(s);
    std::vector<Jet> out(static_cast<std::size_t>(n * n), Jet::constant_like(0.0, wv));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i * n + i)] = wv;
    return out;
  };
  return g;
}

ScalarFlattening scalar_flatten_radial(const MetricFamily& f, const FlattenOptions& opts) {
  require_radial(f);
  const int n = f.dim;
  double r0 = f.r_min;
  State y{1.0, 0.0};  // Neumann start on the inner boundary
  if (r0 <= 0.0) {
    r0 = kStartRadius;
    const RadialCoefficients c = radial_coefficients(f, r0, 0);
    const double q0 = yamabe_constant(n) * c.w.value() * c.scalar.value();
    y = {1.0 + q0 * r0 * r0 / (2.0 * n), q0 * r0 * r0 / n};
  }
  std::vector<ScalarFlattening::Sample> path;
  double min_v = y[0];
  path.push_back({r0, y[0], y[1] / r0});
  const double t0 = std::log(r0), t1 = std::log(kEndRadius);
  std::vector<double> times;
  for (double t = t0; t < t1; t += kSampleStep) times.push_back(t);
  times.push_back(t1);
  try {
    auto stepper = ode::make_dense_output(opts.tol * 1e-2, opts.tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, Rhs{&f}, y, times.begin(), times.end(), kSampleStep / 4.0,
                         [&](const State& s, double t) {
                           if (!std::isfinite(s[0]) || !std::isfinite(s[1]))
                             throw std::runtime_error("scalar flattening produced a non-finite value");
                           if (s[0] <= 0.0)
                             throw DomainError("scalar flattening hit u <= 0 at r = " + std::to_string(std::exp(t)) +
                                               "; the conformal Laplacian is not positive on this family");
                           min_v = std::min(min_v, s[0]);
                           const double r = std::exp(t);
                           if (t > t0) path.push_back({r, s[0], s[1] / r});
                         });
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("scalar flattening did not converge: ") + e.what());
  }
  const auto& last = path.back();
  // v = v_inf + b r^{2-n} + ...  =>  v + r v' / (n-2) -> v_inf
  const double v_inf = last.u + last.r * last.du / (n - 2.0);
  if (!(v_inf > 0.0)) throw DomainError("scalar flattening does not tend to a positive constant");

  ScalarFlattening out(f, r0, std::move(path), v_inf);
  out.min_u = min_v / v_inf;
  out.tail_radii = opts.tail_radii;
  double num = 0.0, den = 0.0;
  std::vector<double> dev;
  for (double r : opts.tail_radii) {
    const double e = std::pow(r, 2.0 - n);
    const double d = out.value(r).first - 1.0;
    dev.push_back(d);
    num += d * e;
    den += e * e;
  }
  out.tail_coefficient = den > 0.0 ? num / den : 0.0;
  for (std::size_t i = 0; i < opts.tail_radii.size(); ++i)
    out.tail_residual =
        std::max(out.tail_residual, std::abs(dev[i] - out.tail_coefficient * std::pow(opts.tail_radii[i], 2.0 - n)));
  const MetricFamily g = out.flattened();
  for (double r : opts.audit_radii)
    if (r > r0) out.audit_radii.push_back(r);
  for (double r : out.audit_radii) {
    const Eigen::VectorXd x = r * Eigen::VectorXd::Unit(n, 0);
    const Connection c = connection(g.jet(x, 2));
    const double R = scalar_curvature(c, ricci_tensor(c)).value();
    out.audit_scalar.push_back(R);
    out.max_abs_scalar = std::max(out.max_abs_scalar, std::abs(R));
  }
  return out;
}

RigidityCheck rigidity_identity_check(const MetricFamily& f, const std::vector<double>& radii, int radial_nodes) {
  require_radial(f);
  const int n = f.dim;
  if (n < 5) throw ConfigError("the rigidity identity is checked for n >= 5");
  RigidityCheck out;
  out.radii = radii;
  out.flattening = scalar_flatten_radial(f);
  const ScalarFlattening& fl = out.flattening;
  const MetricFamily gt = fl.flattened();
  const double phi_pow = -(n - 4.0) / (n - 2.0);
  const double q_coef = (n - 4.0) / 2.0, ric_coef = (n - 4.0) / ((n - 2.0) * (n - 2.0));
  auto density = [&](const Eigen::VectorXd& x) {
    const double r = x.norm();
    const double u = fl.value(r).first;
    const double phi = std::pow(u, phi_pow);
    const double q = q_curvature(f.jet(x, 4)).q;
    const MetricJet gj = gt.jet(x, 2);
    const Eigen::MatrixXd G = gj.value();
    const Connection c = connection(gj);
    const double ric2 = squared_norm(ricci_tensor(c), G.inverse());
    const double vol = std::sqrt(G.determinant());
    return (q_coef * std::pow(phi, (n + 4.0) / (n - 4.0)) * q + ric_coef * ric2 * phi) * vol;
  };
  const SphereRule rule = radial_sphere_rule(n);
  out.lhs = cumulative_ball_integrals(density, f.r_min, radii, rule, radial_nodes);
  EnergyOptions eo;
  eo.radii = radii;
  eo.audit_q = false;
  const EnergyReport e = energy_surface(f, eo);
  out.energy = e.series.flux;
  out.energy_limit = e.value;
  const JetField phi = [&fl, phi_pow](const std::vector<Jet>& x) { return pow(fl.evaluate(x), phi_pow); };
  for (double r : radii) out.boundary.push_back(paneitz_boundary_flux(gt, phi, r, 4.0 / (n - 2.0), rule));
  if (f.r_min > 0.0) {
    // the core enters through its boundary flux, as in the volume energy
    const double inner = paneitz_boundary_flux(gt, phi, f.r_min, 4.0 / (n - 2.0), rule);
    for (double& v : out.lhs) v += inner;
  }
  out.lhs_limit = extrapolate_limit(radii, out.lhs).limit;
  out.rhs_limit = (n - 4.0) / (4.0 * (n - 1.0)) * out.energy_limit;
  out.residual = std::abs(out.lhs_limit - out.rhs_limit) / std::max(std::abs(out.rhs_limit), 1.0);
  for (std::size_t k = 0; k < radii.size(); ++k)
    out.finite_radius_residual = std::max(
        out.finite_radius_residual, std::abs(out.lhs[k] - out.boundary[k]) / std::max(std::abs(out.lhs[k]), 1.0));
  return out;
}

}  // namespace plab
