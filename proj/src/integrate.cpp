#include "paneitz/integrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "paneitz/errors.hpp"

namespace plab {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) {
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  g_threads = threads;
}

int thread_count() { return g_threads.load(); }

double pairwise_sum(const double* v, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
  }
  const std::size_t h = count / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, count - h);
}

GaussRule gauss_gegenbauer(int points, double a) {
  if (points < 1) throw ConfigError("Gauss rule needs at least one point");
  // Jacobi matrix of the orthonormal polynomials for (1 - t^2)^a.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b2 = k * (k + 2.0 * a) / ((2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0));
    J(k, k - 1) = J(k - 1, k) = std::sqrt(b2);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  GaussRule r;
  for (int i = 0; i < points; ++i) {
    double t = es.eigenvalues()(i);
    // symmetrise the tiny asymmetry of the eigen-solver
    const double v = es.eigenvectors()(0, i);
    r.nodes.push_back(t);
    r.weights.push_back(mu0 * v * v);
  }
  for (int i = 0; i < points / 2; ++i) {
    const int j = points - 1 - i;
    const double t = 0.5 * (r.nodes[static_cast<std::size_t>(j)] - r.nodes[static_cast<std::size_t>(i)]);
    const double w = 0.5 * (r.weights[static_cast<std::size_t>(i)] + r.weights[static_cast<std::size_t>(j)]);
    r.nodes[static_cast<std::size_t>(i)] = -t;
    r.nodes[static_cast<std::size_t>(j)] = t;
    r.weights[static_cast<std::size_t>(i)] = r.weights[static_cast<std::size_t>(j)] = w;
  }
  if (points % 2 == 1) r.nodes[static_cast<std::size_t>(points / 2)] = 0.0;
  return r;
}

GaussRule gauss_legendre(int points) { return gauss_gegenbauer(points, 0.0); }

double sphere_monomial_integral(const std::vector<int>& alpha) {
  double num = 0.0, total = 0.0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    num += std::lgamma((a + 1) / 2.0);
    total += (a + 1) / 2.0;
  }
  return 2.0 * std::exp(num - std::lgamma(total));
}

namespace {

SphereRule build_sphere(int n, int L) {
  SphereRule rule;
  rule.n = n;
  rule.degree = L;
  if (n == 2) {
    const int m = L + 1;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * std::numbers::pi * k / m;
      Eigen::VectorXd x(2);
      x << std::cos(th), std::sin(th);
      rule.nodes.push_back(x);
      rule.weights.push_back(2.0 * std::numbers::pi / m);
    }
    return rule;
  }
  const SphereRule sub = build_sphere(n - 1, L);
  const GaussRule g = gauss_gegenbauer((L + 2) / 2, (n - 3) / 2.0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double t = g.nodes[i], c = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (std::size_t j = 0; j < sub.size(); ++j) {
      Eigen::VectorXd x(n);
      x.head(n - 1) = c * sub.nodes[j];
      x(n - 1) = t;
      rule.nodes.push_back(x);
      rule.weights.push_back(g.weights[i] * sub.weights[j]);
    }
  }
  return rule;
}

}  // namespace

double audit_sphere_rule(const SphereRule& rule, std::mt19937_64& rng, int samples) {
  std::uniform_int_distribution<int> pick(0, rule.n - 1);
  std::uniform_int_distribution<int> deg(0, rule.degree);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<int> alpha(static_cast<std::size_t>(rule.n), 0);
    // even degrees are the informative ones; odd monomials integrate to zero
    const int d = s % 2 == 0 ? deg(rng) & ~1 : deg(rng);
    for (int k = 0; k < d; ++k) ++alpha[static_cast<std::size_t>(pick(rng))];
    std::vector<double> terms(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      double v = rule.weights[i];
      for (int a = 0; a < rule.n; ++a) v *= std::pow(rule.nodes[i](a), alpha[static_cast<std::size_t>(a)]);
      terms[i] = v;
    }
    worst = std::max(worst, std::abs(pairwise_sum(terms) - sphere_monomial_integral(alpha)));
  }
  return worst;
}

SphereRule sphere_quadrature(int n, int L) {
  if (n < 2 || n > 8) throw ConfigError("sphere_quadrature supports 2 <= n <= 8, got " + std::to_string(n));
  if (L < 0 || L > 40) throw ConfigError("sphere_quadrature supports 0 <= L <= 40, got " + std::to_string(L));
  SphereRule rule = build_sphere(n, L);
  double total = pairwise_sum(rule.weights);
  const double omega = sphere_monomial_integral(std::vector<int>(static_cast<std::size_t>(n), 0));
  if (std::abs(total - omega) > 1e-12 * omega)
    throw std::logic_error("sphere rule weights do not sum to the sphere area");
  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(n * 64 + L));
  if (audit_sphere_rule(rule, rng, 16) > 1e-11 * omega)
    throw std::logic_error("sphere rule failed its exactness audit");
  return rule;
}

SphereRule radial_sphere_rule(int n) {
  SphereRule rule;
  rule.n = n;
  rule.degree = 0;
  rule.radial_only = true;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(0) = 1.0;
  rule.nodes.push_back(x);
  rule.weights.push_back(sphere_monomial_integral(std::vector<int>(static_cast<std::size_t>(n), 0)));
  return rule;
}

std::vector<double> surface_samples(const PointFunction& f, double r, const SphereRule& rule) {
  const double area = std::pow(r, rule.n - 1);
  return parallel_map<double>(rule.size(), [&](std::size_t i) {
    try {
      return area * rule.weights[i] * f(r * rule.nodes[i]);
    } catch (const QuadratureError&) {
      throw;
    } catch (const std::exception& e) {
      throw QuadratureError(e.what(), i);
    }
  });
}

double surface_flux(const PointFunction& f, double r, const SphereRule& rule) {
  return pairwise_sum(surface_samples(f, r, rule));
}

double annulus_volume_integral(const PointFunction& f, double r_in, double r_out, const SphereRule& rule,
                               int radial_nodes) {
  if (!(r_in < r_out)) throw ConfigError("annulus needs r_in < r_out");
  const GaussRule g = gauss_legendre(radial_nodes);
  const double mid = 0.5 * (r_in + r_out), half = 0.5 * (r_out - r_in);
  const std::size_t m = rule.size();
  const std::vector<double> terms = parallel_map<double>(g.nodes.size() * m, [&](std::size_t k) {
    const std::size_t i = k / m, j = k % m;
    const double r = mid + half * g.nodes[i];
    try {
      return half * g.weights[i] * std::pow(r, rule.n - 1) * rule.weights[j] * f(r * rule.nodes[j]);
    } catch (const std::exception& e) {
      throw QuadratureError(e.what(), k);
    }
  });
  return pairwise_sum(terms);
}

// ∫_a^b r^{n-1} Σ_j w_j fn(r θ_j) dr.  Gauss-Legendre in log r when a > 0.
double shell_integral(const PointFunction& fn, double a, double b, const SphereRule& rule, int nodes) {
  const GaussRule g = gauss_legendre(nodes);
  const bool log_scale = a > 0.0;
  const double lo = log_scale ? std::log(a) : a, hi = log_scale ? std::log(b) : b;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const std::size_t m = rule.size();
  const std::vector<double> terms = parallel_map<double>(g.nodes.size() * m, [&](std::size_t k) {
    const std::size_t i = k / m, j = k % m;
    const double t = mid + half * g.nodes[i];
    const double r = log_scale ? std::exp(t) : t;
    const double jac = log_scale ? r : 1.0;
    try {
      return half * g.weights[i] * jac * std::pow(r, rule.n - 1) * rule.weights[j] * fn(r * rule.nodes[j]);
    } catch (const QuadratureError&) {
      throw;
    } catch (const std::exception& e) {
      throw QuadratureError(e.what(), k);
    }
  });
  return pairwise_sum(terms);
}

// Cumulative ∫_{r0 < |x| < R_k} fn dx for each ladder radius R_k.  Segments break
// at 0, 1/2, 1, 2, 4, ... (or r0 2^k), at the ladder radii and at the support edge.
std::vector<double> cumulative_ball_integrals(const PointFunction& fn, double r0, const std::vector<double>& ladder,
                                      const SphereRule& rule, int nodes, double flat_beyond) {
  if (ladder.empty()) return {};
  const double top = ladder.back();
  std::vector<double> cuts{r0};
  if (r0 == 0.0) {
    cuts.push_back(0.5);
    for (double b = 1.0; b < top; b *= 2.0) cuts.push_back(b);
  } else {
    for (double b = 2.0 * r0; b < top; b *= 2.0) cuts.push_back(b);
  }
  for (double r : ladder) cuts.push_back(r);
  if (flat_beyond > r0 && flat_beyond < top) cuts.push_back(flat_beyond);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return c > top || c < r0; }), cuts.end());

  std::vector<double> out;
  double acc = 0.0;
  std::size_t next = 0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s], b = cuts[s + 1];
    if (a < flat_beyond) acc += shell_integral(fn, a, b, rule, nodes);
    while (next < ladder.size() && ladder[next] <= b) {
      out.push_back(acc);
      ++next;
    }
  }
  while (out.size() < ladder.size()) out.push_back(acc);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Fit {
  double E = 0, a = 0, sse = 0;
};

Fit fit_fixed_s(const std::vector<double>& r, const std::vector<double>& F, double s) {
  const std::size_t k = r.size();
  Eigen::MatrixXd A(k, 2);
  Eigen::VectorXd b(k);
  for (std::size_t i = 0; i < k; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::pow(r[i] / r[0], -s);  // scaled for conditioning
    b(i) = F[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  Fit f;
  f.E = c(0);
  f.a = c(1) * std::pow(r[0], s);
  f.sse = (A * c - b).squaredNorm();
  return f;
}

}  // namespace

FluxSeries extrapolate_limit(std::vector<double> radii, std::vector<double> flux) {
  if (radii.size() != flux.size()) throw ShapeError("radii and flux lengths differ");
  if (radii.size() < 4) throw ConfigError("extrapolate_limit needs at least 4 radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw ConfigError("radius ladder must be strictly increasing");
  FluxSeries out;
  out.radii = std::move(radii);
  out.flux = std::move(flux);
  double lo = out.flux[0], hi = out.flux[0];
  for (double v : out.flux) {
    if (!std::isfinite(v)) {
      out.limit = v;
      out.converged = false;
      out.exponent = std::nan("");
      out.residual = std::nan("");
      return out;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) {
    out.limit = out.flux.back();
    out.exponent = std::nan("");
    out.exact = true;
    out.converged = true;
    return out;
  }
  // coarse scan then golden-section refinement of s
  const double smin = 0.25, smax = 8.0;
  double best_s = smin, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1550; ++i) {
    const double s = smin + (smax - smin) * i / 1550.0;
    const double sse = fit_fixed_s(out.radii, out.flux, s).sse;
    if (sse < best) {
      best = sse;
      best_s = s;
    }
  }
  double a = std::max(smin, best_s - 0.005), b = std::min(smax, best_s + 0.005);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = fit_fixed_s(out.radii, out.flux, c).sse, fd = fit_fixed_s(out.radii, out.flux, d).sse;
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = fit_fixed_s(out.radii, out.flux, c).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = fit_fixed_s(out.radii, out.flux, d).sse;
    }
  }
  double s = 0.5 * (a + b);
  if (fit_fixed_s(out.radii, out.flux, best_s).sse < fit_fixed_s(out.radii, out.flux, s).sse) s = best_s;
  const Fit f = fit_fixed_s(out.radii, out.flux, s);
  out.limit = f.E;
  out.amplitude = f.a;
  out.exponent = s;
  double res = 0.0;
  for (std::size_t i = 0; i < out.radii.size(); ++i)
    res = std::max(res, std::abs(out.flux[i] - f.E - f.a * std::pow(out.radii[i], -s)));
  out.residual = res;
  out.converged = res <= 1e-3 * std::max(std::abs(f.E), 1.0);
  return out;
}

std::vector<double> geometric_ladder(double r0, double ratio, int count) {
  std::vector<double> out;
  double r = r0;
  for (int i = 0; i < count; ++i, r *= ratio) out.push_back(r);
  return out;
}

}  // namespace plab
