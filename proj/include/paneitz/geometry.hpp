#pragma once

#include <vector>

#include <Eigen/Dense>

#include "paneitz/jets.hpp"
#include "paneitz/tensor.hpp"

namespace plab {

/// Metric components g_ij as jets about a common base point.
///
/// `negative` counts negative eigenvalues (0 Riemannian, 1 Lorentzian).
class MetricJet {
 public:
  MetricJet() = default;
  /// Components in row-major n*n order; symmetry and nondegeneracy are checked.
  MetricJet(std::vector<Jet> components, int negative = 0);

  int dim() const { return n_; }
  int order() const { return g_[0].order(); }
  int negative() const { return negative_; }
  const BasePoint& base() const { return g_[0].base(); }
  const Jet& operator()(int i, int j) const { return g_[static_cast<std::size_t>(i * n_ + j)]; }
  const std::vector<Jet>& components() const { return g_; }
  Eigen::MatrixXd value() const;
  JetTensor tensor() const;

 private:
  int n_ = 0;
  int negative_ = 0;
  std::vector<Jet> g_;
};

/// Inverse metric and Christoffel symbols Γ^k_ij, stored flat as (k*n + i)*n + j.
struct Connection {
  int n = 0;
  int order = 0;          // order of the metric jets
  std::vector<Jet> g;     // metric, order K
  std::vector<Jet> ginv;  // inverse metric, order K
  std::vector<Jet> gamma; // order K-1

  const Jet& G(int k, int i, int j) const { return gamma[static_cast<std::size_t>((k * n + i) * n + j)]; }
  const Jet& gi(int i, int j) const { return ginv[static_cast<std::size_t>(i * n + j)]; }
};

/// Inverse of a matrix of jets by the degree recurrence H_a = -G0^{-1} sum_{b != 0} G_b H_{a-b}.
std::vector<Jet> inverse_metric(const MetricJet& g);
Connection connection(const MetricJet& g);

/// Curvature of a metric jet of order K.  Riemann, Ricci, scalar, Schouten and Weyl
/// are jets of order K-2.  Conventions:
///   R^i_{jkl} = d_k Γ^i_{lj} - d_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} - Γ^i_{lm} Γ^m_{kj},
///   Ric_{jl} = R^k_{jkl},  R_{ijkl} = g_{im} R^m_{jkl},
///   S = (Ric - R g / (2(n-1))) / (n-2),  W = Riem - S ∧ g (Kulkarni-Nomizu).
/// Schouten and Weyl are left empty for n = 2.
struct CurvaturePack {
  int dim = 0;
  int order = 0;
  JetTensor inverse_metric;  // Up Up
  JetTensor christoffel;     // Up Down Down
  JetTensor riemann;         // Up Down Down Down
  JetTensor riemann_down;    // all Down
  JetTensor ricci;
  Jet scalar;
  JetTensor schouten;
  JetTensor weyl;
};

CurvaturePack curvature_at(const MetricJet& g);

/// Ricci tensor without forming the full Riemann tensor (order K-2).
JetTensor ricci_tensor(const Connection& c);
Jet scalar_curvature(const Connection& c, const JetTensor& ricci);
/// Full Riemann R^i_{jkl} (order K-2).
JetTensor riemann_tensor(const Connection& c);
JetTensor lower_first(const Connection& c, const JetTensor& riemann_up);
JetTensor schouten_tensor(const Connection& c, const JetTensor& ricci, const Jet& scalar);
/// Kulkarni-Nomizu product (A ∧ B)_{ijkl} = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il.
JetTensor kulkarni_nomizu(const JetTensor& a, const JetTensor& b);

/// Δf = g^{ab} (∇∇f)_{ab}; result has order(f) - 2.
Jet laplace_beltrami(const Jet& f, const Connection& c);
/// (∇∇f)_{ab}; result has order(f) - 2.
JetTensor covariant_hessian(const Jet& f, const Connection& c);
/// ∇T for an all-lower tensor; the derivative slot is appended last.
JetTensor covariant_derivative(const JetTensor& t, const Connection& c);
/// g^{ab} T_{ab} for a rank-2 lower tensor.
Jet metric_trace(const JetTensor& t, const Connection& c);
/// g^{ab} ∇_a V_b.
Jet divergence(const JetTensor& covector, const Connection& c);
/// (div T)_b = g^{ac} ∇_c T_{ab}.
JetTensor divergence_sym2(const JetTensor& t, const Connection& c);
/// Bochner-type tensor Laplacian g^{ab} ∇_a ∇_b T of an all-lower tensor.
JetTensor rough_laplacian(const JetTensor& t, const Connection& c);
/// |T|^2 with all indices raised by g^{-1}, at the base point.
double squared_norm(const JetTensor& t, const Eigen::MatrixXd& ginv);

/// Second fundamental form of the coordinate sphere |x| = r through the base point,
/// taken with respect to the inner unit normal: II(X, Y) = g(∇_X Y, ν_in).
struct SecondFundamentalForm {
  PointTensor II;               // ambient covariant form, tangential
  PointTensor induced;          // h = g - ν ⊗ ν (lower)
  double H = 0.0;               // g^{ij} II_ij
  Eigen::VectorXd normal;       // inner unit normal covector ν_i
  Eigen::VectorXd normal_up;    // ν^i
};

/// The metric must have order >= 1 and its base point must lie on |x| = r.
SecondFundamentalForm second_fundamental_form(double r, const MetricJet& g);

std::vector<Jet> truncate_all(const std::vector<Jet>& v, int order);
inline Jet truncate_to(const Jet& j, int order) { return j.order() == order ? j : j.truncated(order); }

}  // namespace plab
