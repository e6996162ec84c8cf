#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace plab {

// --- parallelism -------------------------------------------------------------

/// Worker count used by parallel_map (default 1).
void set_thread_count(int threads);
int thread_count();

/// Evaluates f(0..count-1) on thread_count() workers.  Results land in index
/// order, so any reduction over them is independent of the thread count.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F&& f) {
  std::vector<T> out(count);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Pairwise (cascade) summation in index order.
double pairwise_sum(const double* v, std::size_t count);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// --- quadrature --------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int points);
/// Gauss rule for the weight (1 - t^2)^a on [-1, 1] (Golub-Welsch).
GaussRule gauss_gegenbauer(int points, double a);

/// Quadrature on the unit sphere S^{n-1} in R^n.
struct SphereRule {
  int n = 0;
  int degree = 0;                        // exact for polynomials up to this degree
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> weights;
  bool radial_only = false;              // one node; exact for rotation-invariant integrands only
  std::size_t size() const { return nodes.size(); }
};

/// Product rule: uniform in the azimuth, Gauss-Gegenbauer in the polar variables
/// (Gauss-Legendre for S^2).  2 <= n <= 8, 0 <= L <= 40.  The rule is audited on
/// construction against exact monomial integrals.
SphereRule sphere_quadrature(int n, int L);
/// Single-node rule of total weight ω_{n-1}, for integrands known to be radial.
SphereRule radial_sphere_rule(int n);

/// Exact ∫_{S^{n-1}} x^α dω.
double sphere_monomial_integral(const std::vector<int>& alpha);
/// Largest error of the rule over `samples` random monomials of degree <= L.
double audit_sphere_rule(const SphereRule& rule, std::mt19937_64& rng, int samples = 32);

using PointFunction = std::function<double(const Eigen::VectorXd&)>;

/// r^{n-1} Σ_i w_i f(r θ_i).  A failing node is rethrown as QuadratureError.
double surface_flux(const PointFunction& f, double r, const SphereRule& rule);
/// Σ_i w_i f(r θ_i) r^{n-1} split per node, evaluated in parallel.
std::vector<double> surface_samples(const PointFunction& f, double r, const SphereRule& rule);

/// ∫_{r_in < |x| < r_out} f dx (Euclidean measure; f carries any √det g factor).
/// Gauss-Legendre in r with `radial_nodes` points times the sphere rule.
double annulus_volume_integral(const PointFunction& f, double r_in, double r_out, const SphereRule& rule,
                               int radial_nodes = 16);

/// ∫_a^b r^{n-1} Σ_j w_j f(r θ_j) dr; Gauss-Legendre in log r when a > 0, in r when a = 0.
double shell_integral(const PointFunction& f, double a, double b, const SphereRule& rule, int nodes);

/// Cumulative ∫_{r0 < |x| < R_k} f dx for each radius R_k of an increasing ladder.
/// Segments break at 0, 1/2, 1, 2, 4, ... (or r0 2^k), at the ladder radii and at
/// `flat_beyond`; f is taken to vanish beyond `flat_beyond`.
std::vector<double> cumulative_ball_integrals(const PointFunction& f, double r0, const std::vector<double>& ladder,
                                              const SphereRule& rule, int nodes,
                                              double flat_beyond = std::numeric_limits<double>::infinity());

// --- limits --------------------------------------------------------------------

/// Flux values on a radius ladder and their fitted limit F(r) ≈ E + a r^{-s}.
struct FluxSeries {
  std::vector<double> radii;
  std::vector<double> flux;
  double limit = 0.0;
  double amplitude = 0.0;
  double exponent = 0.0;  // NaN when the series is constant
  double residual = 0.0;  // max |F - fit|
  bool converged = true;  // residual <= 1e-3 max(|E|, 1)
  bool exact = false;     // all F equal
};

/// Least-squares fit of E + a r^{-s} with s in [0.25, 8].  Needs >= 4 radii.
FluxSeries extrapolate_limit(std::vector<double> radii, std::vector<double> flux);

/// r0, 2 r0, 4 r0, ... (count values).
std::vector<double> geometric_ladder(double r0, double ratio, int count);

}  // namespace plab
