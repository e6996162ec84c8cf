#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "paneitz/geometry.hpp"
#include "paneitz/profile.hpp"
#include "paneitz/qcurv.hpp"

namespace plab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Metric components as functions of coordinate jets.
using ComponentFn = std::function<std::vector<Jet>(const std::vector<Jet>& x)>;
/// Conformal weight w of g = w δ as a function of s = |x|^2 (as a jet).
using RadialWeightFn = std::function<Jet(const Jet& s)>;

/// A metric on a chart of R^n (or R^{1,n-1} for spacetimes).
struct MetricFamily {
  std::string name;
  int dim = 0;
  int negative = 0;             // negative eigenvalues of the signature
  std::string chart = "R^n";
  double tau = std::nan("");    // asymptotic decay order; NaN when not asymptotically flat
  double r_min = 0.0;           // the chart excludes |x| < r_min
  double r_max = kInf;          // the chart is only trusted for |x| < r_max
  double flat_beyond = kInf;    // g = δ exactly for |x| > flat_beyond
  bool radial = false;          // invariant under rotations of the chart
  std::optional<int> euler_characteristic;
  std::map<std::string, double> params;
  std::map<std::string, double> exact;  // known reference values (E, mass, ...)

  ComponentFn components;
  RadialWeightFn radial_weight;  // set for conformally flat radial families
  std::optional<ConformalMode> mode;
  RadialProfile profile;         // u(r) when built from a profile

  bool asymptotically_flat() const { return !std::isnan(tau); }
  bool compact_perturbation() const { return std::isfinite(flat_beyond); }

  /// Jets of order `order` at x.
  MetricJet jet(const Eigen::VectorXd& x, int order) const;
  /// Jets of the metric composed with arbitrary coordinate jets x(z).
  MetricJet jet_from(const std::vector<Jet>& x) const;
  /// Metric matrix at x (order-0 evaluation).
  Eigen::MatrixXd value(const Eigen::VectorXd& x) const;
};

// --- built-in families -----------------------------------------------------

MetricFamily flat(int n);
/// g = (1 + m / (2 r^{n-2}))^{4/(n-2)} δ, isotropic Schwarzschild slice.
MetricFamily schwarzschild_slice(int n, double m);
/// g = (2a^2 / (a^2 + |x|^2))^2 δ, round sphere of radius a in a stereographic chart.
MetricFamily sphere_stereo(int n, double radius = 1.0);
MetricFamily round_s4_chart();
/// g = δ + ε (1 - |x|^2/R^2)_+^5 P(x), P a fixed non-radial quadratic pattern.
MetricFamily bump(int n, double eps = 0.01, double radius = 3.0);
/// g = e^{2φ} δ on R^2 with φ a compactly supported non-radial bump.
MetricFamily surface_bump(double eps = 0.05, double radius = 3.0);
/// g = e^{2φ} δ on R^2 with φ = c / (1 + |x|^2).
MetricFamily surface_tail(double c = 0.2);
/// g = U^{4/(n-2)} δ with U = 1 + c (1 + |x|^2)^{-1/2}; R > 0 and R ~ r^{-3}.
MetricFamily radial_tail(int n, double c);
/// g = U^{4/(n-2)} δ with U = 1 + c (1 + |x|^2)^{-(n-2)/2}; R > 0 and R ~ r^{-(n+2)}.
MetricFamily bubble(int n, double c);
/// q-power family g = (1 + c/r)^{4/(n-4)} δ, n >= 5.
MetricFamily c_family(int n, double c);
/// -N(r)^2 dt^2 + g on R x chart; coordinates (t, x).
MetricFamily static_spacetime(const MetricFamily& spatial, std::function<Jet(const Jet& r)> lapse,
                              const std::string& name);
MetricFamily schwarzschild_spacetime(double m);
/// g = δ + ε h on |x| < 1, h_ij a random combination of monomials of degree 2..4
/// (coefficients uniform in [-1, 1] divided by the monomial count).
MetricFamily polynomial_perturbation(int n, double eps, std::mt19937_64& rng);
MetricFamily minkowski(int spatial_dim = 3);

/// Conformally flat radial metric w δ with w = u^{4/(n-2)}, u^{4/(n-4)} or e^{2u},
/// u given by a bound profile.  The decay order comes from the profile tree when
/// the asymptotic analysis succeeds, else from a numerical slope fit.
MetricFamily conformally_flat(const RadialProfile& profile, ConformalMode mode, int n, const std::string& name = "",
                              double r_min = 1.0);

/// Decay exponent of the conformal weight; second is true when taken from the tree.
std::pair<double, bool> conformal_decay(const RadialProfile& profile, ConformalMode mode, int n);

// --- Green-function models and blow-ups ----------------------------------

/// ω_{n-1} = |S^{n-1}|.
double sphere_area(int n);
/// γ_n = 1 / (2 (n-2) (n-4) ω_{n-1}), n >= 5.
double green_gamma(int n);

struct GreenModel {
  enum class Kind {
    Paneitz,      // γ_n r^{4-n} + α (+ remainder), n >= 5
    PaneitzLog,   // (κ/16π^2)(log r^{-2} + S0 + a.x + x.b.x), n = 4
    Laplacian,    // r^{2-n} + α (+ remainder), n >= 3
    Constant      // A + remainder (three-dimensional Paneitz model)
  };
  Kind kind = Kind::Paneitz;
  int n = 5;
  double alpha = 0.0;
  double kappa = 0.0;
  double S0 = 0.0;
  Eigen::VectorXd a;
  Eigen::MatrixXd b;
  std::function<Jet(const std::vector<Jet>& x)> remainder;  // optional smooth correction

  Jet evaluate(const std::vector<Jet>& x) const;
  double leading_coefficient() const;
};

GreenModel paneitz_green(int n, double alpha);
GreenModel log_green(double kappa, double S0, const Eigen::VectorXd& a = Eigen::VectorXd::Zero(4),
                     const Eigen::MatrixXd& b = Eigen::MatrixXd::Zero(4, 4));
GreenModel laplacian_green(int n, double alpha);
GreenModel constant_green(int n, double A);

/// Stereographic blow-up of `inner` at its origin with Green function G:
///   n >= 5:  ĝ = G^{4/(n-4)} g in z = γ_n^{2/(n-4)} x/|x|^2,
///   n = 4:   ĝ = e^{2G} g in z = x/|x|^2, rescaled by e^{S0} when κ = 16π^2,
///   Laplacian Green functions: ĝ = G^{4/(n-2)} g in z = x/|x|^2.
/// For n = 4 with κ != 16π^2 the result is not asymptotically flat; its metric
/// grows like ρ^{4(κ/16π^2 - 1)}, recorded as exact["growth_exponent"].
MetricFamily invert_blowup(const MetricFamily& inner, const GreenModel& G);

/// Inversion x = λ z / |z|^2 as jets in z.
std::vector<Jet> inversion(const std::vector<Jet>& z, double lambda);

/// Riemann values R_{ijkl} (n^4) and first derivatives R_{ijkl,a} (n^5) at a point.
struct CurvatureData {
  int n = 0;
  std::vector<double> riem;
  std::vector<double> driem;
  double R(int i, int j, int k, int l) const { return riem[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)]; }
  double dR(int i, int j, int k, int l, int a) const {
    return driem[static_cast<std::size_t>((((i * n + j) * n + k) * n + l) * n + a)];
  }
};

/// g = δ + (1/3) R_{iklj} x^k x^l + (1/6) R_{iklj,a} x^k x^l x^a
///       [+ (2/45) R_{iklc} R_{jabc} x^k x^l x^a x^b when include_quartic].
/// The data must carry the algebraic curvature symmetries, Ric = 0 and a vanishing
/// symmetrised Ricci derivative (checked to 1e-12).
MetricFamily normal_coordinate_family(const CurvatureData& data, bool include_quartic = false);

/// Random admissible data: a Weyl-type tensor and derivatives W' ⊗ v with W' Weyl-type.
CurvatureData random_normal_coordinate_data(int n, std::mt19937_64& rng, double scale = 0.3);
/// Algebraic curvature tensor with zero Ricci contraction.
std::vector<double> random_weyl(int n, std::mt19937_64& rng);

// --- decay audit -----------------------------------------------------------

struct DecayAudit {
  std::vector<double> radii;
  std::vector<double> deviation;  // max_ij |g_ij - δ_ij| over sampled directions
  double slope = 0.0;
  bool compact = false;           // the deviation vanished identically
  bool passed = false;
  std::string note;
};

/// Log-log slope of the metric deviation over r in {10, 20, 40, 80}; passes when
/// within 0.2 of -tau, or when the deviation is identically zero.
DecayAudit audit_decay(const MetricFamily& family, std::vector<double> radii = {10, 20, 40, 80});

// --- registry --------------------------------------------------------------

struct FamilyOptions {
  std::optional<int> n;
  std::optional<double> m, c, alpha, kappa, eps;
};

/// Resolve a family selector such as "flat5", "c5", "bump4", "sphere_stereo".
MetricFamily make_family(const std::string& selector, const FamilyOptions& opts = {});
std::vector<std::string> family_names();
/// Every built-in asymptotically flat family of dimension n used by the checks.
std::vector<MetricFamily> registered_ae_families(int n);

// --- metrics files -----------------------------------------------------------

/// Parse key=value blocks (name, n, mode, profile, params, optional r_min).
std::vector<MetricFamily> parse_metrics_file(const std::string& text);
std::vector<MetricFamily> load_metrics_file(const std::string& path);

}  // namespace plab
