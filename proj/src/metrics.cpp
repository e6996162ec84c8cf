#include "paneitz/metrics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace plab {

namespace {

Jet radius_squared(const std::vector<Jet>& x) {
  Jet s = x[0] * x[0];
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
  return s;
}

std::vector<Jet> conformal_components(const Jet& w, int n) {
  std::vector<Jet> g(static_cast<std::size_t>(n * n), Jet::constant_like(0.0, w));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i * n + i)] = w;
  return g;
}

std::vector<Jet> identity_components(const Jet& like, int n) {
  return conformal_components(Jet::constant_like(1.0, like), n);
}

MetricFamily radial_conformal(const std::string& name, int n, RadialWeightFn w) {
  MetricFamily f;
  f.name = name;
  f.dim = n;
  f.radial = true;
  f.radial_weight = w;
  f.components = [w, n](const std::vector<Jet>& x) { return conformal_components(w(radius_squared(x)), n); };
  return f;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

MetricJet MetricFamily::jet_from(const std::vector<Jet>& x) const {
  if (static_cast<int>(x.size()) != dim)
    throw ShapeError("family " + name + " expects " + std::to_string(dim) + " coordinates");
  return MetricJet(components(x), negative);
}

MetricJet MetricFamily::jet(const Eigen::VectorXd& x, int order) const {
  if (x.size() != dim) throw ShapeError("point has dimension " + std::to_string(x.size()) + ", family " + name +
                                        " has " + std::to_string(dim));
  const int off = negative > 0 ? 1 : 0;  // spacetimes: radius of the spatial part
  const double r = x.tail(dim - off).norm();
  if (r < r_min * (1.0 - 1e-12) && r_min > 0.0)
    throw DomainError("point with |x| = " + fmt(r) + " lies inside the excluded core |x| < " + fmt(r_min) +
                      " of family " + name);
  return jet_from(coordinate_jets(x, order));
}

Eigen::MatrixXd MetricFamily::value(const Eigen::VectorXd& x) const { return jet(x, 0).value(); }

// ---------------------------------------------------------------------------

MetricFamily flat(int n) {
  MetricFamily f = radial_conformal("flat" + std::to_string(n), n, [](const Jet& s) { return Jet::constant_like(1.0, s); });
  f.components = [n](const std::vector<Jet>& x) { return identity_components(x[0], n); };
  f.tau = kInf;
  f.flat_beyond = 0.0;
  f.euler_characteristic = 1;
  f.exact = {{"E", 0.0}, {"mass", 0.0}, {"R", 0.0}, {"Q", 0.0}};
  return f;
}

MetricFamily conformally_flat(const RadialProfile& profile, ConformalMode mode, int n, const std::string& name,
                              double r_min) {
  if (!profile.free_identifiers().empty()) throw UnboundIdentifierError("profile has unbound identifiers");
  if (mode == ConformalMode::QPower && n == 4) throw ConfigError("q-power mode needs n != 4");
  if (mode == ConformalMode::Yamabe && n == 2) throw ConfigError("yamabe mode needs n != 2");
  MetricFamily f = radial_conformal(name.empty() ? "conformal" : name, n, [profile, mode, n](const Jet& s) {
    return conformal_weight(mode, n, profile.evaluate(sqrt(s)));
  });
  f.mode = mode;
  f.profile = profile;
  f.r_min = r_min;
  f.tau = conformal_decay(profile, mode, n).first;
  f.euler_characteristic = 1;
  return f;
}

std::pair<double, bool> conformal_decay(const RadialProfile& profile, ConformalMode mode, int n) {
  ProfileNodePtr w;
  switch (mode) {
    case ConformalMode::Yamabe: w = profile_pow(profile.root(), 4.0 / (n - 2.0)); break;
    case ConformalMode::QPower: w = profile_pow(profile.root(), 4.0 / (n - 4.0)); break;
    case ConformalMode::Exponential:
      w = profile_func(ProfileNode::Kind::Exp,
                       profile_binary(ProfileNode::Kind::Mul, profile_number(2.0), profile.root()));
      break;
  }
  const RadialProfile weight(w);
  if (auto t = weight.tail()) {
    if (std::abs(t->limit - 1.0) > 1e-12) return {std::nan(""), true};
    return {t->decay, true};
  }
  // Numerical fallback: successive differences d(r) = w(r) - w(2r) ~ r^{-tau}.
  try {
    if (std::abs(weight.evaluate(1e8) - 1.0) > 1e-3) return {std::nan(""), false};
    std::vector<double> lr, ld;
    for (double r : {10.0, 20.0, 40.0, 80.0, 160.0}) {
      const double d = std::abs(weight.evaluate(r) - weight.evaluate(2 * r));
      if (d <= 0) return {kInf, false};
      lr.push_back(std::log(r));
      ld.push_back(std::log(d));
    }
    const double mx = (lr[0] + lr[1] + lr[2] + lr[3] + lr[4]) / 5, my = (ld[0] + ld[1] + ld[2] + ld[3] + ld[4]) / 5;
    double sxy = 0, sxx = 0;
    for (int k = 0; k < 5; ++k) {
      sxy += (lr[k] - mx) * (ld[k] - my);
      sxx += (lr[k] - mx) * (lr[k] - mx);
    }
    return {-sxy / sxx, false};
  } catch (const std::exception&) {
    return {std::nan(""), false};
  }
}

MetricFamily schwarzschild_slice(int n, double m) {
  if (n < 3) throw ConfigError("schwarzschild_slice needs n >= 3");
  const std::string text = "1 + m/(2*r^" + std::to_string(n - 2) + ")";
  const double rh = m > 0 ? std::pow(m / 2.0, 1.0 / (n - 2.0)) : 0.0;
  MetricFamily f = conformally_flat(parse_profile(text, {{"m", m}}), ConformalMode::Yamabe, n,
                                    "schwarzschild_slice" + std::to_string(n), rh);
  f.params = {{"m", m}};
  f.exact = {{"E", 0.0}, {"mass", m}, {"R", 0.0}};
  return f;
}

MetricFamily sphere_stereo(int n, double a) {
  const double a2 = a * a;
  MetricFamily f = radial_conformal("sphere_stereo" + std::to_string(n), n, [a2](const Jet& s) {
    return 4.0 * a2 * a2 * ipow(a2 + s, -2);
  });
  f.chart = "stereographic";
  f.params = {{"radius", a}};
  f.euler_characteristic = 2;
  f.exact = {{"R", n * (n - 1.0) / a2}};
  if (n >= 3) f.exact["Q"] = n * (n * n - 4.0) / (8.0 * a2 * a2);
  return f;
}

MetricFamily round_s4_chart() {
  MetricFamily f = sphere_stereo(4, 1.0);
  f.name = "round_s4_chart";
  f.exact["kappa"] = 16.0 * std::numbers::pi * std::numbers::pi;
  return f;
}

MetricFamily bump(int n, double eps, double R) {
  MetricFamily f;
  f.name = "bump" + std::to_string(n);
  f.dim = n;
  f.tau = kInf;
  f.flat_beyond = R;
  f.euler_characteristic = 1;
  f.params = {{"eps", eps}, {"radius", R}};
  f.exact = {{"E", 0.0}, {"mass", 0.0}};
  f.components = [n, eps, R](const std::vector<Jet>& x) {
    const Jet s = radius_squared(x);
    if (s.value() >= R * R) return identity_components(x[0], n);
    const Jet psi = eps * ipow(1.0 - s / (R * R), 5);
    std::vector<Jet> g = identity_components(x[0], n);
    const Jet lin = 1.0 + x[0] / R;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const int i1 = (i + 1) % n, j1 = (j + 1) % n;
        Jet p = 0.5 / (R * R) * (x[i] * x[j1] + x[j] * x[i1]);
        if (i == j) p += lin;
        const Jet h = psi * p;
        g[static_cast<std::size_t>(i * n + j)] += h;
        if (i != j) g[static_cast<std::size_t>(j * n + i)] += h;
      }
    return g;
  };
  return f;
}

MetricFamily surface_bump(double eps, double R) {
  MetricFamily f;
  f.name = "surface_bump";
  f.dim = 2;
  f.tau = kInf;
  f.flat_beyond = R;
  f.euler_characteristic = 1;
  f.mode = ConformalMode::Exponential;
  f.params = {{"eps", eps}, {"radius", R}};
  f.components = [eps, R](const std::vector<Jet>& x) {
    const Jet s = radius_squared(x);
    if (s.value() >= R * R) return identity_components(x[0], 2);
    const Jet phi = eps * ipow(1.0 - s / (R * R), 6) * (1.0 + 0.5 / R * x[0] + 0.3 / (R * R) * (x[0] * x[1]));
    return conformal_components(exp(2.0 * phi), 2);
  };
  return f;
}

MetricFamily surface_tail(double c) {
  MetricFamily f = radial_conformal("surface_tail", 2, [c](const Jet& s) { return exp(2.0 * c * inv(1.0 + s)); });
  f.tau = 2.0;
  f.mode = ConformalMode::Exponential;
  f.euler_characteristic = 1;
  f.params = {{"c", c}};
  return f;
}

MetricFamily radial_tail(int n, double c) {
  if (n < 3) throw ConfigError("radial_tail needs n >= 3");
  MetricFamily f = radial_conformal("radial_tail" + std::to_string(n), n, [n, c](const Jet& s) {
    return pow(1.0 + c * pow(1.0 + s, -0.5), 4.0 / (n - 2.0));
  });
  f.mode = ConformalMode::Yamabe;
  f.profile = parse_profile("1 + c*(1 + r^2)^-0.5", {{"c", c}});
  f.tau = 1.0;
  f.euler_characteristic = 1;
  f.params = {{"c", c}};
  if (n == 5) f.exact["E"] = 32.0 * c * sphere_area(5);
  if (n == 3 || n == 4) f.exact["E"] = 0.0;
  return f;
}

MetricFamily bubble(int n, double c) {
  if (n < 3) throw ConfigError("bubble needs n >= 3");
  MetricFamily f = radial_conformal("bubble" + std::to_string(n), n, [n, c](const Jet& s) {
    return pow(1.0 + c * pow(1.0 + s, -(n - 2.0) / 2.0), 4.0 / (n - 2.0));
  });
  f.mode = ConformalMode::Yamabe;
  f.profile = parse_profile("1 + c*(1 + r^2)^" + fmt(-(n - 2.0) / 2.0), {{"c", c}});
  f.tau = n - 2.0;
  f.euler_characteristic = 1;
  f.params = {{"c", c}};
  f.exact["E"] = 0.0;
  return f;
}

MetricFamily c_family(int n, double c) {
  if (n < 5) throw ConfigError("the c-family is a q-power family and needs n >= 5");
  MetricFamily f = conformally_flat(parse_profile("1 + c/r", {{"c", c}}), ConformalMode::QPower, n,
                                    "c" + std::to_string(n), 1.0);
  f.params = {{"c", c}};
  if (n == 5) f.exact["E"] = 96.0 * sphere_area(5) * c;
  return f;
}

MetricFamily static_spacetime(const MetricFamily& spatial, std::function<Jet(const Jet& r)> lapse,
                              const std::string& name) {
  if (spatial.negative != 0) throw ConfigError("static_spacetime needs a Riemannian spatial metric");
  MetricFamily f;
  f.name = name;
  f.dim = spatial.dim + 1;
  f.negative = 1;
  f.chart = "R x " + spatial.chart;
  f.r_min = spatial.r_min;
  f.params = spatial.params;
  const int n = spatial.dim;
  auto comps = spatial.components;
  f.components = [n, comps, lapse](const std::vector<Jet>& x) {
    std::vector<Jet> xs(x.begin() + 1, x.end());
    const std::vector<Jet> gs = comps(xs);
    const Jet N = lapse(sqrt(radius_squared(xs)));
    const int m = n + 1;
    std::vector<Jet> g(static_cast<std::size_t>(m * m), Jet::constant_like(0.0, x[0]));
    g[0] = -(N * N);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[static_cast<std::size_t>((i + 1) * m + j + 1)] = gs[static_cast<std::size_t>(i * n + j)];
    return g;
  };
  return f;
}

MetricFamily schwarzschild_spacetime(double m) {
  MetricFamily f = static_spacetime(
      schwarzschild_slice(3, m), [m](const Jet& r) { return (1.0 - 0.5 * m * inv(r)) / (1.0 + 0.5 * m * inv(r)); },
      "schwarzschild_spacetime");
  f.exact = {{"A", 0.0}};
  return f;
}

MetricFamily polynomial_perturbation(int n, double eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  // monomials of degree 2..4 with one random coefficient per component
  std::vector<MultiIndex> monomials;
  for (int d = 2; d <= 4; ++d) {
    const auto layout = JetLayout::get(n, d);
    for (std::size_t k = layout->degree_begin(d); k < layout->size(); ++k) monomials.push_back(layout->index(k));
  }
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      auto& row = c[static_cast<std::size_t>(i * n + j)];
      for (std::size_t k = 0; k < monomials.size(); ++k) row.push_back(coef(rng) / static_cast<double>(monomials.size()));
      c[static_cast<std::size_t>(j * n + i)] = row;
    }
  MetricFamily f;
  f.name = "quartic_perturbation" + std::to_string(n);
  f.dim = n;
  f.r_max = 1.0;
  f.params = {{"eps", eps}};
  f.components = [n, eps, c, monomials](const std::vector<Jet>& x) {
    std::vector<Jet> g = identity_components(x[0], n);
    std::vector<Jet> mono;
    for (const auto& a : monomials) {
      Jet m = Jet::constant_like(1.0, x[0]);
      for (int k = 0; k < n; ++k)
        if (a[static_cast<std::size_t>(k)] > 0) m = m * ipow(x[static_cast<std::size_t>(k)], a[static_cast<std::size_t>(k)]);
      mono.push_back(std::move(m));
    }
    for (std::size_t ij = 0; ij < g.size(); ++ij)
      for (std::size_t k = 0; k < mono.size(); ++k) g[ij].add_scaled(eps * c[ij][k], mono[k]);
    return g;
  };
  return f;
}

MetricFamily minkowski(int spatial_dim) {
  MetricFamily f = static_spacetime(flat(spatial_dim), [](const Jet& r) { return Jet::constant_like(1.0, r); },
                                    "minkowski");
  f.exact = {{"A", 0.0}};
  return f;
}

// ---------------------------------------------------------------------------

double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0); }

double green_gamma(int n) {
  if (n < 5) throw ConfigError("γ_n is defined for n >= 5");
  return 1.0 / (2.0 * (n - 2.0) * (n - 4.0) * sphere_area(n));
}

double GreenModel::leading_coefficient() const {
  switch (kind) {
    case Kind::Paneitz: return green_gamma(n);
    case Kind::Laplacian: return 1.0;
    default: return 1.0;
  }
}

Jet GreenModel::evaluate(const std::vector<Jet>& x) const {
  const Jet s = radius_squared(x);
  Jet G = Jet::constant_like(0.0, s);
  switch (kind) {
    case Kind::Paneitz: G = green_gamma(n) * pow(s, (4.0 - n) / 2.0) + alpha; break;
    case Kind::Laplacian: G = pow(s, (2.0 - n) / 2.0) + alpha; break;
    case Kind::Constant: G = Jet::constant_like(alpha, s); break;
    case Kind::PaneitzLog: {
      G = -log(s) + S0;
      for (int i = 0; i < 4; ++i) {
        if (a.size() == 4 && a(i) != 0.0) G += a(i) * x[i];
        for (int j = 0; j < 4; ++j)
          if (b.rows() == 4 && b(i, j) != 0.0) G += b(i, j) * (x[i] * x[j]);
      }
      G *= kappa / (16.0 * std::numbers::pi * std::numbers::pi);
      break;
    }
  }
  if (remainder) G += remainder(x);
  return G;
}

GreenModel paneitz_green(int n, double alpha) {
  GreenModel g;
  g.kind = GreenModel::Kind::Paneitz;
  g.n = n;
  g.alpha = alpha;
  green_gamma(n);
  return g;
}

GreenModel log_green(double kappa, double S0, const Eigen::VectorXd& a, const Eigen::MatrixXd& b) {
  GreenModel g;
  g.kind = GreenModel::Kind::PaneitzLog;
  g.n = 4;
  g.kappa = kappa;
  g.S0 = S0;
  g.a = a;
  g.b = b;
  return g;
}

GreenModel laplacian_green(int n, double alpha) {
  GreenModel g;
  g.kind = GreenModel::Kind::Laplacian;
  g.n = n;
  g.alpha = alpha;
  return g;
}

GreenModel constant_green(int n, double A) {
  GreenModel g;
  g.kind = GreenModel::Kind::Constant;
  g.n = n;
  g.alpha = A;
  return g;
}

std::vector<Jet> inversion(const std::vector<Jet>& z, double lambda) {
  const Jet f = lambda * inv(radius_squared(z));
  std::vector<Jet> x;
  x.reserve(z.size());
  for (const Jet& zi : z) x.push_back(f * zi);
  return x;
}

MetricFamily invert_blowup(const MetricFamily& inner, const GreenModel& G) {
  const int n = inner.dim;
  if (G.n != n) throw ConfigError("Green model dimension does not match the inner metric");
  if (inner.negative != 0) throw ConfigError("blow-up needs a Riemannian inner metric");
  double lambda = 1.0, rescale = 0.0;  // z = e^{-rescale} zbar
  double weight_power = 0.0;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  MetricFamily f;
  f.dim = n;
  f.chart = "inverted";
  f.euler_characteristic = 1;
  const bool inner_flat = inner.flat_beyond == 0.0;
  switch (G.kind) {
    case GreenModel::Kind::Paneitz:
      if (n < 5) throw ConfigError("Paneitz power blow-up needs n >= 5");
      lambda = std::pow(green_gamma(n), 2.0 / (n - 4.0));
      weight_power = 4.0 / (n - 4.0);
      f.name = "blowup" + std::to_string(n);
      f.tau = inner_flat ? n - 4.0 : std::min(n - 4.0, 2.0);
      f.exact["E"] = 8.0 * (n - 1.0) * (n - 2.0) * sphere_area(n) * green_gamma(n) * G.alpha;
      break;
    case GreenModel::Kind::Laplacian:
      if (n < 3) throw ConfigError("Laplacian blow-up needs n >= 3");
      weight_power = 4.0 / (n - 2.0);
      f.name = "laplacian_blowup" + std::to_string(n);
      f.tau = inner_flat ? n - 2.0 : std::min(n - 2.0, 2.0);
      break;
    case GreenModel::Kind::PaneitzLog: {
      if (n != 4) throw ConfigError("logarithmic Green model needs n = 4");
      f.name = "blowup4";
      const double dk = G.kappa / (16.0 * pi2) - 1.0;
      if (std::abs(dk) <= 1e-12) {
        rescale = G.S0;
        const bool a_zero = G.a.size() == 0 || G.a.cwiseAbs().maxCoeff() == 0.0;
        const bool b_zero = G.b.size() == 0 || G.b.cwiseAbs().maxCoeff() == 0.0;
        f.tau = !a_zero ? 1.0 : !b_zero ? 2.0 : (inner_flat ? kInf : 2.0);
        if (a_zero && b_zero && inner_flat && !G.remainder) f.flat_beyond = 0.0;
      } else {
        f.tau = std::nan("");
        f.exact["growth_exponent"] = 4.0 * dk;
      }
      break;
    }
    case GreenModel::Kind::Constant:
      throw ConfigError("a constant Green model cannot be inverted; use it as a profile factor");
  }
  f.params = {{"alpha", G.alpha}, {"kappa", G.kappa}, {"S0", G.S0}};
  f.r_min = std::isfinite(inner.r_max) ? lambda / inner.r_max : 1.0;
  const auto inner_components = inner.components;
  const GreenModel model = G;
  f.components = [n, lambda, rescale, weight_power, inner_components, model](const std::vector<Jet>& zin) {
    std::vector<Jet> z = zin;
    if (rescale != 0.0)
      for (Jet& zi : z) zi *= std::exp(-rescale);
    const Jet inv_s = inv(radius_squared(z));
    std::vector<Jet> x;
    x.reserve(z.size());
    for (const Jet& zi : z) x.push_back(lambda * (inv_s * zi));
    // J(k, i) = dx^k/dz^i = λ (δ_ki / ρ^2 - 2 z^k z^i / ρ^4)
    const Jet inv_s2 = inv_s * inv_s;
    std::vector<Jet> J(static_cast<std::size_t>(n * n));
    for (int k = 0; k < n; ++k)
      for (int i = k; i < n; ++i) {
        Jet v = -2.0 * lambda * (inv_s2 * (z[k] * z[i]));
        if (i == k) v.add_scaled(lambda, inv_s);
        J[static_cast<std::size_t>(k * n + i)] = v;
        J[static_cast<std::size_t>(i * n + k)] = std::move(v);
      }
    const std::vector<Jet> g = inner_components(x);
    const Jet Gx = model.evaluate(x);
    Jet W = model.kind == GreenModel::Kind::PaneitzLog ? exp(2.0 * Gx) : pow(Gx, weight_power);
    if (rescale != 0.0) W *= std::exp(-2.0 * rescale);
    // gJ = g J, out = W J^T g J
    std::vector<Jet> gJ(static_cast<std::size_t>(n * n));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        Jet s = g[static_cast<std::size_t>(k * n)] * J[static_cast<std::size_t>(i)];
        for (int l = 1; l < n; ++l) s += g[static_cast<std::size_t>(k * n + l)] * J[static_cast<std::size_t>(l * n + i)];
        gJ[static_cast<std::size_t>(k * n + i)] = std::move(s);
      }
    std::vector<Jet> out(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s = J[static_cast<std::size_t>(i)] * gJ[static_cast<std::size_t>(j)];
        for (int k = 1; k < n; ++k) s += J[static_cast<std::size_t>(k * n + i)] * gJ[static_cast<std::size_t>(k * n + j)];
        s = W * s;
        out[static_cast<std::size_t>(j * n + i)] = s;
        out[static_cast<std::size_t>(i * n + j)] = std::move(s);
      }
    return out;
  };
  const bool radial_model =
      !G.remainder && (G.kind != GreenModel::Kind::PaneitzLog ||
                       ((G.a.size() == 0 || G.a.cwiseAbs().maxCoeff() == 0.0) &&
                        (G.b.size() == 0 || G.b.cwiseAbs().maxCoeff() == 0.0)));
  f.radial = inner.radial && radial_model;
  if (f.radial && inner_flat) {
    // ĝ = W(x) λ^2 ρ^{-4} δ with |x|^2 = λ^2 / ρ^2.
    const int nn = n;
    f.radial_weight = [nn, lambda, rescale, weight_power, model](const Jet& s_in) {
      const Jet s = s_in * std::exp(-2.0 * rescale);
      const Jet sx = lambda * lambda * inv(s);  // |x|^2
      Jet Gx = Jet::constant_like(0.0, s);
      switch (model.kind) {
        case GreenModel::Kind::Paneitz: Gx = green_gamma(nn) * pow(sx, (4.0 - nn) / 2.0) + model.alpha; break;
        case GreenModel::Kind::Laplacian: Gx = pow(sx, (2.0 - nn) / 2.0) + model.alpha; break;
        case GreenModel::Kind::PaneitzLog:
          Gx = model.kappa / (16.0 * std::numbers::pi * std::numbers::pi) * (model.S0 - log(sx));
          break;
        case GreenModel::Kind::Constant: break;
      }
      Jet W = model.kind == GreenModel::Kind::PaneitzLog ? exp(2.0 * Gx) : pow(Gx, weight_power);
      return W * (lambda * lambda) * inv(s * s) * std::exp(-2.0 * rescale);
    };
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {

double curvature_scale(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return std::max(1.0, m);
}

}  // namespace

MetricFamily normal_coordinate_family(const CurvatureData& d, bool include_quartic) {
  const int n = d.n;
  const std::size_t n4 = static_cast<std::size_t>(n * n * n * n);
  if (d.riem.size() != n4 || d.driem.size() != n4 * n) throw ShapeError("curvature data has the wrong size");
  const double sc = curvature_scale(d.riem), dsc = curvature_scale(d.driem);
  auto fail = [](const std::string& what) { throw ShapeError("curvature data violates " + what); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double r = d.R(i, j, k, l);
          if (std::abs(r + d.R(j, i, k, l)) > 1e-12 * sc || std::abs(r + d.R(i, j, l, k)) > 1e-12 * sc)
            fail("antisymmetry");
          if (std::abs(r - d.R(k, l, i, j)) > 1e-12 * sc) fail("pair symmetry");
          if (std::abs(r + d.R(i, k, l, j) + d.R(i, l, j, k)) > 1e-12 * sc) fail("the first Bianchi identity");
          for (int a = 0; a < n; ++a) {
            const double q = d.dR(i, j, k, l, a);
            if (std::abs(q + d.dR(j, i, k, l, a)) > 1e-12 * dsc || std::abs(q + d.dR(i, j, l, k, a)) > 1e-12 * dsc ||
                std::abs(q - d.dR(k, l, i, j, a)) > 1e-12 * dsc)
              fail("derivative symmetries");
          }
        }
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double ric = 0.0;
      for (int i = 0; i < n; ++i) ric += d.R(i, j, i, l);
      if (std::abs(ric) > 1e-12 * sc) fail("Ric(p) = 0");
      for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += d.dR(i, j, i, l, a) + d.dR(i, a, i, j, l) + d.dR(i, l, i, a, j);
        if (std::abs(s) > 1e-12 * dsc) fail("the symmetrised Ricci-derivative condition");
      }
    }
  // Coefficients: A[i][j][k][l] = R_{iklj}/3, B[..a] = R_{iklj,a}/6, C = (2/45) R_{iklc} R_{jabc}.
  std::vector<double> A(n4), B(n4 * n), C;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const std::size_t f = static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
          A[f] = d.R(i, k, l, j) / 3.0;
          for (int a = 0; a < n; ++a) B[f * n + a] = d.dR(i, k, l, j, a) / 6.0;
        }
  if (include_quartic) {
    C.assign(n4 * n * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int c = 0; c < n; ++c) s += d.R(i, k, l, c) * d.R(j, a, b, c);
                C[static_cast<std::size_t>((((((i * n + j) * n + k) * n + l) * n + a) * n + b))] = 2.0 / 45.0 * s;
              }
  }
  MetricFamily f;
  f.name = "normal_coordinates" + std::to_string(n);
  f.dim = n;
  f.chart = "normal coordinates";
  f.r_max = 0.5;
  f.components = [n, A, B, C](const std::vector<Jet>& x) {
    std::vector<Jet> g = identity_components(x[0], n);
    std::vector<Jet> xx(static_cast<std::size_t>(n * n));
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) xx[static_cast<std::size_t>(k * n + l)] = x[k] * x[l];
    std::vector<Jet> xxx;
    xxx.reserve(static_cast<std::size_t>(n * n * n));
    for (int k = 0; k < n * n; ++k)
      for (int a = 0; a < n; ++a) xxx.push_back(xx[static_cast<std::size_t>(k)] * x[a]);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s = Jet::constant_like(0.0, x[0]);
        const std::size_t ij = static_cast<std::size_t>(i * n + j);
        for (std::size_t kl = 0; kl < xx.size(); ++kl) {
          const double a2 = A[ij * xx.size() + kl];
          if (a2 != 0.0) s.add_scaled(a2, xx[kl]);
          for (int a = 0; a < n; ++a) {
            const double b3 = B[(ij * xx.size() + kl) * n + a];
            if (b3 != 0.0) s.add_scaled(b3, xxx[kl * n + a]);
          }
        }
        if (!C.empty())
          for (std::size_t kl = 0; kl < xx.size(); ++kl)
            for (std::size_t ab = 0; ab < xx.size(); ++ab) {
              const double c4 = C[(ij * xx.size() + kl) * xx.size() + ab];
              if (c4 != 0.0) s.add_scaled(c4, xx[kl] * xx[ab]);
            }
        g[ij] += s;
        if (i != j) g[static_cast<std::size_t>(j * n + i)] += s;
      }
    return g;
  };
  return f;
}

std::vector<double> random_weyl(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N01;
  const std::size_t n4 = static_cast<std::size_t>(n * n * n * n);
  std::vector<double> R(n4, 0.0);
  auto at = [n](int i, int j, int k, int l) { return static_cast<std::size_t>(((i * n + j) * n + k) * n + l); };
  for (int m = 0; m < 3; ++m) {
    Eigen::MatrixXd h = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return N01(rng); });
    h = (0.5 * (h + h.transpose())).eval();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) R[at(i, j, k, l)] += h(i, k) * h(j, l) - h(i, l) * h(j, k);
  }
  // Remove the trace part: W = R - S ∧ δ.
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i) ric(j, l) += R[at(i, j, i, l)];
  const double scal = ric.trace();
  const Eigen::MatrixXd S = (ric - scal / (2.0 * (n - 1)) * Eigen::MatrixXd::Identity(n, n)) / (n - 2.0);
  auto dl = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          R[at(i, j, k, l)] -= S(i, k) * dl(j, l) + S(j, l) * dl(i, k) - S(i, l) * dl(j, k) - S(j, k) * dl(i, l);
  double m = 0.0;
  for (double v : R) m = std::max(m, std::abs(v));
  if (m > 0)
    for (double& v : R) v /= m;
  return R;
}

CurvatureData random_normal_coordinate_data(int n, std::mt19937_64& rng, double scale) {
  CurvatureData d;
  d.n = n;
  d.riem = random_weyl(n, rng);
  for (double& v : d.riem) v *= scale;
  const std::size_t n4 = d.riem.size();
  d.driem.assign(n4 * n, 0.0);
  std::normal_distribution<double> N01;
  for (int m = 0; m < 2; ++m) {
    const std::vector<double> W = random_weyl(n, rng);
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(n, [&]() { return N01(rng); });
    for (std::size_t f = 0; f < n4; ++f)
      for (int a = 0; a < n; ++a) d.driem[f * n + a] += scale * W[f] * v(a);
  }
  return d;
}

// ---------------------------------------------------------------------------

DecayAudit audit_decay(const MetricFamily& family, std::vector<double> radii) {
  DecayAudit out;
  out.radii = radii;
  if (family.negative != 0 || !family.asymptotically_flat()) {
    out.note = "not asymptotically flat; audit skipped";
    out.passed = false;
    return out;
  }
  const int n = family.dim;
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < n; ++i) {
    dirs.push_back(Eigen::VectorXd::Unit(n, i));
    dirs.push_back(-Eigen::VectorXd::Unit(n, i));
  }
  Eigen::VectorXd d1 = Eigen::VectorXd::Ones(n), d2 = Eigen::VectorXd::Ones(n);
  for (int i = 1; i < n; i += 2) d2(i) = -1.0;
  dirs.push_back(d1.normalized());
  dirs.push_back(d2.normalized());
  for (double r : radii) {
    double dev = 0.0;
    for (const auto& d : dirs) {
      const Eigen::MatrixXd g = family.value(r * d);
      dev = std::max(dev, (g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    }
    out.deviation.push_back(dev);
  }
  bool all_zero = true, any_zero = false;
  for (double d : out.deviation) {
    all_zero = all_zero && d == 0.0;
    any_zero = any_zero || d == 0.0;
  }
  if (all_zero) {
    out.compact = true;
    out.passed = true;
    out.note = "deviation vanishes on the ladder (compact perturbation)";
    return out;
  }
  if (any_zero || std::isinf(family.tau)) {
    out.passed = false;
    out.note = "deviation neither decays by a power law nor vanishes";
    return out;
  }
  double mx = 0, my = 0;
  const double k = static_cast<double>(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    mx += std::log(radii[i]) / k;
    my += std::log(out.deviation[i]) / k;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    sxy += (std::log(radii[i]) - mx) * (std::log(out.deviation[i]) - my);
    sxx += (std::log(radii[i]) - mx) * (std::log(radii[i]) - mx);
  }
  out.slope = sxy / sxx;
  out.passed = std::abs(out.slope + family.tau) <= 0.2;
  if (!out.passed) out.note = "measured slope " + fmt(out.slope) + " vs declared decay " + fmt(family.tau);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<std::string, std::optional<int>> split_selector(const std::string& sel) {
  std::size_t k = sel.size();
  while (k > 0 && std::isdigit(static_cast<unsigned char>(sel[k - 1]))) --k;
  if (k == sel.size() || k == 0) return {sel, std::nullopt};
  return {sel.substr(0, k), std::stoi(sel.substr(k))};
}

}  // namespace

std::vector<std::string> family_names() {
  return {"flat",  "schwarzschild_slice", "sphere_stereo", "round_s4_chart", "bump",         "surface_bump",
          "surface_tail", "radial_tail", "bubble", "c", "blowup", "laplacian_blowup", "schwarzschild_spacetime",
          "minkowski"};
}

MetricFamily make_family(const std::string& selector, const FamilyOptions& o) {
  if (selector == "round_s4_chart") return round_s4_chart();
  if (selector == "schwarzschild_spacetime") return schwarzschild_spacetime(o.m.value_or(1.0));
  if (selector == "minkowski") return minkowski(o.n.value_or(4) - 1);
  if (selector == "surface_bump") return surface_bump(o.eps.value_or(0.05));
  if (selector == "surface_tail") return surface_tail(o.c.value_or(0.2));
  auto [base, suffix] = split_selector(selector);
  if (suffix && o.n && *o.n != *suffix)
    throw ConfigError("selector " + selector + " conflicts with --n " + std::to_string(*o.n));
  const std::optional<int> n = suffix ? suffix : o.n;
  auto need_n = [&](int fallback) { return n.value_or(fallback); };
  if (base == "flat") return flat(need_n(5));
  if (base == "schwarzschild_slice" || base == "schwarzschild") return schwarzschild_slice(need_n(3), o.m.value_or(1.0));
  if (base == "sphere_stereo") return sphere_stereo(need_n(4), 1.0);
  if (base == "bump") return bump(need_n(5), o.eps.value_or(0.01));
  if (base == "radial_tail") return radial_tail(need_n(5), o.c.value_or(0.05));
  if (base == "bubble") return bubble(need_n(5), o.c.value_or(0.3));
  if (base == "c") return c_family(need_n(5), o.c.value_or(0.01));
  if (base == "laplacian_blowup") return invert_blowup(flat(need_n(3)), laplacian_green(need_n(3), o.alpha.value_or(0.25)));
  if (base == "blowup") {
    const int dim = need_n(5);
    if (dim == 4) {
      const double kappa = o.kappa.value_or(16.0 * std::numbers::pi * std::numbers::pi);
      Eigen::VectorXd a(4);
      a << 0.2, -0.1, 0.05, 0.1;
      return invert_blowup(flat(4), log_green(kappa, 0.3, a, Eigen::MatrixXd::Zero(4, 4)));
    }
    return invert_blowup(flat(dim), paneitz_green(dim, o.alpha.value_or(1.0)));
  }
  throw ConfigError("unknown family '" + selector + "'");
}

std::vector<MetricFamily> registered_ae_families(int n) {
  std::vector<MetricFamily> out{flat(n), schwarzschild_slice(n, 1.0), bump(n, 0.01), radial_tail(n, 0.05),
                                bubble(n, 0.3)};
  if (n >= 3) out.push_back(invert_blowup(flat(n), laplacian_green(n, 0.25)));
  if (n == 4) {
    out.push_back(make_family("blowup4"));
    out.push_back(conformally_flat(parse_profile("1 + c/r", {{"c", 0.5}}), ConformalMode::Yamabe, 4, "yamabe_c4", 1.0));
  }
  if (n == 3) out.push_back(conformally_flat(parse_profile("1 + c/r + c^2/r^2", {{"c", 0.5}}), ConformalMode::Yamabe, 3,
                                             "yamabe_c3", 1.0));
  if (n >= 5) {
    out.push_back(c_family(n, 0.01));
    out.push_back(invert_blowup(flat(n), paneitz_green(n, 1.0)));
  }
  return out;
}

}  // namespace plab
