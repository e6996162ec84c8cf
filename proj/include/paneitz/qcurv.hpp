#pragma once

#include "paneitz/geometry.hpp"

namespace plab {

/// Q-curvature at the base point, computed twice:
///   q_sigma    = -Δσ1 + 4σ2 + ((n-4)/2) σ1^2, with σk the elementary symmetric
///                functions of the Schouten eigenvalues (σ1 = R/(2(n-1))),
///   q_expanded = -ΔR/(2(n-1)) - 2|Ric|^2/(n-2)^2
///                + (n^3 - 4n^2 + 16n - 16) R^2 / (8 (n-1)^2 (n-2)^2).
/// The two are required to agree to 1e-10 (relative to max(1, |Q|)).
struct QCurvature {
  double q = 0.0;
  double q_sigma = 0.0;
  double q_expanded = 0.0;
  double scalar = 0.0;
  double ricci_norm2 = 0.0;
  double laplacian_scalar = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

/// Needs n >= 3 and metric jets of order >= 4.
QCurvature q_curvature(const MetricJet& g);
QCurvature q_curvature(const Connection& c);

/// σ2 of the Schouten tensor at the base point: ((tr S)^2 - |S|^2) / 2.
double sigma2_schouten(const Connection& c, const JetTensor& ricci, const Jet& scalar);

/// P u = Δ^2 u + div((4S - (n-2) σ1 g)(∇u, ·)) + ((n-4)/2) Q u at the base point.
/// u must share the metric's base point and have order >= 4.
double paneitz_apply(const MetricJet& g, const Jet& u);
double paneitz_apply(const Connection& c, const Jet& u, double q);

enum class ConformalMode { Yamabe, QPower, Exponential };

const char* to_string(ConformalMode m);
ConformalMode conformal_mode_from_string(const std::string& s);

/// Conformal weight w with ḡ = w g: u^{4/(n-2)}, u^{4/(n-4)} or e^{2u}.
Jet conformal_weight(ConformalMode mode, int n, const Jet& u);

/// Residual of the Q transformation law for ḡ = w(u) g at the base point.
///   QPower (n != 4):   Q_ḡ = (2/(n-4)) u^{-(n+4)/(n-4)} P_g u
///   Exponential (n=4): Q_ḡ = e^{-4u} (P_g u + Q_g)
///   Yamabe:            R_ḡ = u^{-(n+2)/(n-2)} (R u - (4(n-1)/(n-2)) Δu)
struct TransformCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // |lhs - rhs|
};
TransformCheck q_transform_check(const MetricJet& g, ConformalMode mode, const Jet& u);

/// Paneitz covariance: P_ḡ φ against u^{-(n+4)/(n-4)} P_g(u φ) (QPower) or
/// e^{-4u} P_g φ (Exponential, n = 4).
TransformCheck paneitz_covariance_check(const MetricJet& g, ConformalMode mode, const Jet& u, const Jet& phi);

/// A = β□Ric + (β/2 + 2α)□R g - (2α + β)∇²R - 2β Ric·Riem + 2α R Ric
///     - (α/2) R² g - (β/2)|Ric|² g,  with (Ric·Riem)_ij = Ric^{kl} R_{kijl}
/// and □ the trace of the second covariant derivative.  Order K-4.
JetTensor a_tensor(const Connection& c, double alpha, double beta);
PointTensor a_tensor_value(const MetricJet& g, double alpha, double beta);

/// ∇^i A_ij at the base point (metric order >= 5).  relative_residual divides
/// max_j |div A_j| by max_j sum_{i,k} |g^{ik} ∇_k A_ij|.
struct ADivergence {
  Eigen::VectorXd divergence;
  double relative_residual = 0.0;
  double scale = 0.0;
};
ADivergence a_divergence(const MetricJet& g, double alpha, double beta);

/// ḡ = w g for a jet weight w sharing the metric's base point and order.
MetricJet conformal_metric(const MetricJet& g, const Jet& w);

}  // namespace plab
