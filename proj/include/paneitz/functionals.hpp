#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "paneitz/integrate.hpp"
#include "paneitz/metrics.hpp"

namespace plab {

/// Decay threshold above which the fourth-order energy is well defined:
/// 0 for n = 3, 4 and n/2 - 2 for n >= 5.
double tau_threshold(int n);

enum class EnergyForm { Surface, ScalarFlux, Volume };
const char* to_string(EnergyForm f);
EnergyForm energy_form_from_string(const std::string& s);

struct Gates {
  double tau = 0.0;
  double tau_n = 0.0;
  bool tau_ok = false;
  bool q_l1_ok = false;
  double q_slope = 0.0;  // log-log slope of max|Q| r^{n-1}; NaN when Q vanishes
  std::string note;
  // Sign conditions sampled at the Q audit points.  They say which positivity
  // statement could apply; positivity of the Yamabe invariant is never checked.
  bool r_positive = false;     // R > 0 at every sample
  bool q_nonnegative = false;  // Q >= 0 at every sample (rounding floor counts as 0)
};

struct EnergyOptions {
  std::vector<double> radii{10, 20, 40, 80};
  int quad_degree = 16;    // sphere rule for fluxes
  int volume_degree = 4;   // sphere rule inside the volume integral
  int radial_nodes = 12;   // Gauss-Legendre nodes per radial segment
  bool use_symmetry = true;  // one-node sphere rule for rotation-invariant families
  bool audit_q = true;
};

/// Energy (or ADM mass) flux series with its extrapolated value and gates.
struct EnergyReport {
  std::string family;
  std::string functional = "energy";
  std::string form;
  FluxSeries series;
  double value = 0.0;
  Gates gates;
  std::map<std::string, double> tolerances;
  std::vector<std::string> notes;
  bool gates_ok() const { return gates.tau_ok && gates.q_l1_ok; }
};

/// Sphere rule for a family: the radial one-node rule when allowed, else the product rule.
SphereRule family_sphere_rule(const MetricFamily& f, int degree, bool use_symmetry);

/// (∂_j ∂_i ∂_i g_aa - ∂_j ∂_u ∂_i g_ui) x^j / |x|.
double energy_surface_integrand(const MetricFamily& f, const Eigen::VectorXd& x);
/// ∂_r R_g at x.
double radial_scalar_derivative(const MetricFamily& f, const Eigen::VectorXd& x);
/// Δ_g R_g √det g at x.
double laplacian_scalar_density(const MetricFamily& f, const Eigen::VectorXd& x);

EnergyReport energy_surface(const MetricFamily& f, const EnergyOptions& opts = {});
EnergyReport energy_scalar_flux(const MetricFamily& f, const EnergyOptions& opts = {});
/// -(∫_{r_min<|x|<r} Δ_g R_g dV_g + ∮_{r_min} g(∇R_g, ν) dA_g) on the ladder, extrapolated.
EnergyReport energy_volume(const MetricFamily& f, const EnergyOptions& opts = {});
EnergyReport energy(const MetricFamily& f, EnergyForm form, const EnergyOptions& opts = {});

/// τ gate and the Q ∈ L^1 audit (slope of max|Q| r^{n-1} must be <= -1.1).
Gates energy_gates(const MetricFamily& f, const std::vector<double>& radii);

/// c(n) ∮ (∂_i g_ji - ∂_j g_ii) ν^j, c(n) = 1 / (2 (n-1) ω_{n-1}).
EnergyReport adm_energy(const MetricFamily& f, const EnergyOptions& opts = {});

/// h(r) = r^{n-2} ∮ R_g dω and the identity ∮ ∂_r R r^{n-1} dω = (r h)' - (n-1) h.
struct HProfile {
  double r = 0.0;
  double h = 0.0;
  double flux = 0.0;      // ∮ ∂_r R r^{n-1} dω
  double rhs = 0.0;       // (r h)' - (n-1) h
  double residual = 0.0;
};
HProfile h_profile(const MetricFamily& f, double r, int quad_degree = 16);

/// κ_g = ∫ Q_g dV_g for n = 4.  Families on a compactified chart (χ = 2) are
/// integrated over the whole chart; AE families out to the ladder, extrapolated.
struct KappaReport {
  double value = 0.0;
  double tail_bound = 0.0;
  FluxSeries series;  // empty for whole-chart integrals
};
KappaReport kappa(const MetricFamily& f, const EnergyOptions& opts = {});

/// Boundary integrand of the four-dimensional Gauss-Bonnet-Chern formula on S_r:
///   B = R H / 2 - Ric(ν,ν) H - h^{cd} R_{cadb} II^{ab} + H^3/3 - H |II|^2 + (2/3) tr II^3,
/// II and H taken with respect to the inner normal.
double gbc_boundary_density(const MetricFamily& f, const Eigen::VectorXd& x);

struct GbcBall {
  double r = 0.0;
  double bulk = 0.0;      // ∫_{|x|<r} (|W|^2 + 16 σ2(S)) dV
  double boundary = 0.0;  // 8 ∮ B dA
  double total = 0.0;     // bulk + boundary, compared with 32π^2 χ(ball) = 32π^2
  double pointwise_q_residual = 0.0;  // max |Q - (-ΔR/6 + 4σ2(S))| at sample points
};
GbcBall gauss_bonnet_chern_ball(const MetricFamily& f, double r, const EnergyOptions& opts = {});
/// 8 ∮_{S_r} B dA only.
double gbc_boundary_term(const MetricFamily& f, double r, int quad_degree = 16);

/// ∫ (|W|^2 + 4Q) dV over the whole chart of a compactified family, and ∫ 16 σ2(S) dV.
struct GbcClosed {
  double weyl_plus_4q = 0.0;
  double sigma2_integral = 0.0;  // ∫ 16 σ2(S)
  double weyl_integral = 0.0;
  double expected = 0.0;         // 32π^2 χ
};
GbcClosed gauss_bonnet_chern_closed(const MetricFamily& f, int radial_nodes = 96);

/// AE limit 32π^2 (χ - 1) = ∫ (|W|^2 + 4Q): defect over the ladder, extrapolated.
struct GbcDefect {
  FluxSeries series;
  double defect = 0.0;
};
GbcDefect gauss_bonnet_chern_defect(const MetricFamily& f, const EnergyOptions& opts = {});

struct GaussBonnet2d {
  double r = 0.0;
  double curvature_integral = 0.0;   // ∫_{|x|<r} K dA
  double geodesic_curvature = 0.0;   // ∮ k_g ds
  double chi_estimate = 0.0;         // (∫K + ∮k_g) / 2π
  double defect = 0.0;               // 2π χ - 2π - ∫K at this radius
  double kg_excess_slope = 0.0;      // slope of |k_g - 1/r| (NaN when it vanishes)
};
GaussBonnet2d gauss_bonnet_2d(const MetricFamily& f, double r, const EnergyOptions& opts = {});

/// ∮_{S_r} [g(∇Δ_g Φ, ν) + c Ric(∇Φ, ν)] dA_g with the g-unit outer normal.
using JetField = std::function<Jet(const std::vector<Jet>& x)>;
double paneitz_boundary_flux(const MetricFamily& f, const JetField& phi, double r, double c,
                             const SphereRule& rule);

// --- radial scalar flattening ------------------------------------------------

/// Solution of L_g u = Δ_g u - c_n R_g u = 0 for g = w(|x|^2) δ with u -> 1.
class ScalarFlattening {
 public:
  struct Sample {
    double r, u, du;
  };
  ScalarFlattening() = default;
  ScalarFlattening(MetricFamily family, double r_start, std::vector<Sample> path, double v_inf);

  double v_inf() const { return v_inf_; }
  /// u, u' at r (re-integrates from the nearest stored sample).
  std::pair<double, double> value(double r) const;
  /// Taylor coefficients of u about r up to `order`.
  std::vector<double> taylor(double r, int order) const;
  /// u(|x|) composed with coordinate jets.
  Jet evaluate(const std::vector<Jet>& x) const;
  /// g̃ = u^{4/(n-2)} g.
  MetricFamily flattened() const;
  const MetricFamily& family() const { return family_; }

  double tail_coefficient = 0.0;  // a in u = 1 + a r^{2-n}
  double tail_residual = 0.0;     // max |u - 1 - a r^{2-n}| on the tail radii
  std::vector<double> tail_radii;
  std::vector<double> audit_radii;
  std::vector<double> audit_scalar;  // R_g̃ at audit points
  double max_abs_scalar = 0.0;
  double min_u = 0.0;

 private:
  MetricFamily family_;
  double r_start_ = 0.0;
  std::vector<Sample> path_;  // unnormalised v; u = v / v_inf
  double v_inf_ = 1.0;
};

struct FlattenOptions {
  double tol = 1e-12;
  std::vector<double> tail_radii{10, 20, 40, 80};
  std::vector<double> audit_radii{0.5, 1, 2, 5, 10, 20};
};

/// Throws DomainError when u <= 0 is met and std::runtime_error when the
/// integration does not converge.
ScalarFlattening scalar_flatten_radial(const MetricFamily& f, const FlattenOptions& opts = {});

/// Coefficients of w, R_g (flat-base Yamabe formula) and c_n w R_g along the
/// ray, as one-variable jets in r.
struct RadialCoefficients {
  Jet w, log_w_prime, scalar;
};
RadialCoefficients radial_coefficients(const MetricFamily& f, double r, int order);

struct RigidityCheck {
  std::vector<double> radii;
  std::vector<double> lhs;       // cumulative volume integral up to each radius (plus the core flux when r_min > 0)
  std::vector<double> energy;    // E_surface flux at each radius
  std::vector<double> boundary;  // boundary flux at each radius (finite-radius identity)
  double lhs_limit = 0.0;
  double rhs_limit = 0.0;        // (n-4)/(4(n-1)) E
  double energy_limit = 0.0;
  double residual = 0.0;         // |lhs - rhs| / max(|rhs|, 1)
  double finite_radius_residual = 0.0;  // max_k |lhs_k - boundary_k| / max(|lhs_k|, 1)
  ScalarFlattening flattening;
};
RigidityCheck rigidity_identity_check(const MetricFamily& f, const std::vector<double>& radii = {100, 200, 400, 800, 1600},
                                      int radial_nodes = 24);

}  // namespace plab
