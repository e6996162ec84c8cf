#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "paneitz/errors.hpp"

namespace plab {

using MultiIndex = std::vector<int>;
using BasePoint = std::shared_ptr<const Eigen::VectorXd>;

inline constexpr int kMaxJetOrder = 6;
inline constexpr int kDefaultJetOrder = 4;

/// Multi-index tables for jets in `dim` variables truncated at total degree `order`.
///
/// Coefficients are stored in graded-lex order: degree 0, then degree 1, ... and
/// within a degree lexicographically descending, so (2,0) precedes (1,1).  The rank
/// of a multi-index does not depend on the truncation order, hence truncation is a
/// prefix copy.  Layouts are built once per (dim, order) and shared.
class JetLayout {
 public:
  static std::shared_ptr<const JetLayout> get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }

  const MultiIndex& index(std::size_t rank) const { return indices_[rank]; }
  std::size_t rank(std::span<const int> alpha) const;
  /// Number of coefficients of total degree < d.
  std::size_t degree_begin(int d) const { return degree_begin_[d]; }

  // Cauchy product: out[c] = sum over t in [prod_begin[c], prod_begin[c+1]) of
  // x[prod_a[t]] * y[prod_b[t]].
  const std::vector<std::uint32_t>& prod_begin() const { return prod_begin_; }
  const std::vector<std::uint16_t>& prod_a() const { return prod_a_; }
  const std::vector<std::uint16_t>& prod_b() const { return prod_b_; }

  // d/dx_i: out[c] = factor * x[src] for the order-1 layout.
  const std::vector<std::uint32_t>& deriv_src(int i) const { return deriv_src_[i]; }
  const std::vector<double>& deriv_factor(int i) const { return deriv_factor_[i]; }

  JetLayout(int dim, int order);

 private:
  std::uint64_t key(std::span<const int> alpha) const;

  int dim_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> degree_begin_;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> sorted_keys_;
  std::vector<std::uint32_t> prod_begin_;
  std::vector<std::uint16_t> prod_a_, prod_b_;
  std::vector<std::vector<std::uint32_t>> deriv_src_;
  std::vector<std::vector<double>> deriv_factor_;
};

using LayoutPtr = std::shared_ptr<const JetLayout>;

BasePoint make_base(const Eigen::VectorXd& point);

/// Truncated multivariate Taylor expansion about a base point.
///
/// coeff(alpha) is d^alpha f / alpha! at the base point.  Binary operations demand
/// identical dimension, order and base point; use truncated() to line orders up.
class Jet {
 public:
  Jet() = default;
  Jet(LayoutPtr layout, BasePoint base, std::vector<double> coeffs);

  static Jet constant(double value, int dim, int order, BasePoint base);
  /// The coordinate function x_i expanded at the base point.
  static Jet variable(int i, int order, BasePoint base);
  /// Constant jet with the same shape as `like`.
  static Jet constant_like(double value, const Jet& like);

  bool valid() const { return layout_ != nullptr; }
  int dim() const { return layout_->dim(); }
  int order() const { return layout_->order(); }
  const LayoutPtr& layout() const { return layout_; }
  const BasePoint& base() const { return base_; }

  double value() const { return c_[0]; }
  double coeff(std::span<const int> alpha) const;
  double coeff(std::initializer_list<int> alpha) const {
    return coeff(std::span<const int>(alpha.begin(), alpha.size()));
  }
  /// d^alpha f at the base point, i.e. coeff(alpha) * alpha!.
  double derivative(std::span<const int> alpha) const;
  double derivative(std::initializer_list<int> alpha) const {
    return derivative(std::span<const int>(alpha.begin(), alpha.size()));
  }
  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }

  Jet truncated(int order) const;
  /// d/dx_i; the result has order one less.
  Jet partial(int i) const;
  /// Gradient at the base point.
  Eigen::VectorXd gradient() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  /// this += s * o, without a temporary.
  Jet& add_scaled(double s, const Jet& o);

 private:
  friend Jet operator*(const Jet& a, const Jet& b);
  friend void check_compatible(const Jet& a, const Jet& b, const char* op);

  LayoutPtr layout_;
  BasePoint base_;
  std::vector<double> c_;
};

void check_compatible(const Jet& a, const Jet& b, const char* op);

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, Jet a);
Jet operator/(const Jet& a, const Jet& b);

/// f(a) = sum_k coeffs[k] (a - a0)^k, where coeffs are the Taylor coefficients of a
/// univariate function at a0 = a.value().  Evaluated by Horner on the nilpotent part.
Jet compose_series(std::span<const double> coeffs, const Jet& a);

Jet exp(const Jet& a);
Jet log(const Jet& a);
/// Real power; non-integer p requires a positive value, negative integer p a nonzero one.
Jet pow(const Jet& a, double p);
Jet inv(const Jet& a);
Jet sqrt(const Jet& a);
/// Exact integer power by repeated multiplication (any sign of the value when k >= 0).
Jet ipow(const Jet& a, int k);

/// Identity jets x_0 .. x_{dim-1} at `point`.
std::vector<Jet> coordinate_jets(const Eigen::VectorXd& point, int order);

/// Univariate restriction t -> f(base + t v), returned as Taylor coefficients in t.
std::vector<double> restrict_to_line(const Jet& f, const Eigen::VectorXd& v);

using PointField = std::function<double(const Eigen::VectorXd&)>;

/// Finite-difference oracle for d^alpha f(x) built from tensor products of central
/// stencils.  step <= 0 selects default_fd_step; accuracy <= 0 selects order 2 for
/// |alpha| <= 2 and order 4 above.
double fd_derivative(const PointField& f, const Eigen::VectorXd& x, std::span<const int> alpha,
                     double step = 0.0, int accuracy = 0);

/// Default oracle step for a derivative of total order m at x.
double default_fd_step(const Eigen::VectorXd& x, int m);

/// Central finite-difference weights for the m-th derivative on the integer offsets
/// -p..p (Fornberg's recursion).
std::vector<double> central_weights(int m, int p);

}  // namespace plab
