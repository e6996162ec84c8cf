#include "paneitz/jets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace plab {

namespace {

void enumerate_degree(int dim, int degree, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
  if (pos == dim - 1) {
    cur[pos] = degree;
    out.push_back(cur);
    return;
  }
  for (int a = degree; a >= 0; --a) {
    cur[pos] = a;
    enumerate_degree(dim, degree - a, cur, pos + 1, out);
  }
}

}  // namespace

JetLayout::JetLayout(int dim, int order) : dim_(dim), order_(order) {
  MultiIndex cur(dim, 0);
  for (int d = 0; d <= order; ++d) {
    degree_begin_.push_back(indices_.size());
    enumerate_degree(dim, d, cur, 0, indices_);
  }
  degree_begin_.push_back(indices_.size());

  sorted_keys_.reserve(indices_.size());
  for (std::size_t r = 0; r < indices_.size(); ++r)
    sorted_keys_.emplace_back(key(indices_[r]), static_cast<std::uint32_t>(r));
  std::sort(sorted_keys_.begin(), sorted_keys_.end());

  // Cauchy product table.  Pairs are collected by looping over the smaller factor.
  const std::size_t n = indices_.size();
  prod_begin_.reserve(n + 1);
  MultiIndex diff(dim);
  for (std::size_t c = 0; c < n; ++c) {
    prod_begin_.push_back(static_cast<std::uint32_t>(prod_a_.size()));
    const MultiIndex& alpha = indices_[c];
    int deg = 0;
    for (int v : alpha) deg += v;
    for (std::size_t a = 0; a < degree_begin_[deg + 1]; ++a) {
      const MultiIndex& beta = indices_[a];
      bool ok = true;
      for (int i = 0; i < dim && ok; ++i) {
        diff[i] = alpha[i] - beta[i];
        ok = diff[i] >= 0;
      }
      if (!ok) continue;
      prod_a_.push_back(static_cast<std::uint16_t>(a));
      prod_b_.push_back(static_cast<std::uint16_t>(rank(diff)));
    }
  }
  prod_begin_.push_back(static_cast<std::uint32_t>(prod_a_.size()));

  if (order > 0) {
    const std::size_t lower = degree_begin_[order];
    deriv_src_.assign(dim, std::vector<std::uint32_t>(lower));
    deriv_factor_.assign(dim, std::vector<double>(lower));
    for (int i = 0; i < dim; ++i) {
      for (std::size_t c = 0; c < lower; ++c) {
        MultiIndex up = indices_[c];
        deriv_factor_[i][c] = up[i] + 1;
        up[i] += 1;
        deriv_src_[i][c] = static_cast<std::uint32_t>(rank(up));
      }
    }
  }
}

std::uint64_t JetLayout::key(std::span<const int> alpha) const {
  std::uint64_t k = 0;
  for (int i = dim_ - 1; i >= 0; --i) k = (k << 3) | static_cast<std::uint64_t>(alpha[i]);
  return k;
}

std::size_t JetLayout::rank(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != dim_)
    throw ShapeError("multi-index has " + std::to_string(alpha.size()) + " entries, jet dimension is " +
                     std::to_string(dim_));
  int deg = 0;
  for (int v : alpha) {
    if (v < 0) throw ShapeError("negative multi-index entry");
    deg += v;
  }
  if (deg > order_)
    throw OrderError("multi-index of degree " + std::to_string(deg) + " exceeds jet order " +
                     std::to_string(order_));
  const std::uint64_t k = key(alpha);
  auto it = std::lower_bound(sorted_keys_.begin(), sorted_keys_.end(), std::make_pair(k, std::uint32_t{0}));
  return it->second;
}

std::shared_ptr<const JetLayout> JetLayout::get(int dim, int order) {
  if (dim < 1 || dim > 8) throw ShapeError("jet dimension must be in [1, 8], got " + std::to_string(dim));
  if (order < 0 || order > kMaxJetOrder)
    throw OrderError("jet order must be in [0, " + std::to_string(kMaxJetOrder) + "], got " +
                     std::to_string(order));
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{dim, order}];
  if (!slot) slot = std::make_shared<const JetLayout>(dim, order);
  return slot;
}

BasePoint make_base(const Eigen::VectorXd& point) { return std::make_shared<const Eigen::VectorXd>(point); }

// ---------------------------------------------------------------------------

Jet::Jet(LayoutPtr layout, BasePoint base, std::vector<double> coeffs)
    : layout_(std::move(layout)), base_(std::move(base)), c_(std::move(coeffs)) {
  if (c_.size() != layout_->size()) throw ShapeError("coefficient count does not match jet layout");
  if (base_ && base_->size() != layout_->dim()) throw ShapeError("base point dimension does not match jet");
}

Jet Jet::constant(double value, int dim, int order, BasePoint base) {
  auto layout = JetLayout::get(dim, order);
  std::vector<double> c(layout->size(), 0.0);
  c[0] = value;
  return Jet(std::move(layout), std::move(base), std::move(c));
}

Jet Jet::variable(int i, int order, BasePoint base) {
  const int dim = static_cast<int>(base->size());
  if (i < 0 || i >= dim) throw ShapeError("variable index out of range");
  Jet j = constant((*base)(i), dim, order, base);
  if (order >= 1) j.c_[1 + i] = 1.0;
  return j;
}

Jet Jet::constant_like(double value, const Jet& like) {
  std::vector<double> c(like.c_.size(), 0.0);
  c[0] = value;
  return Jet(like.layout_, like.base_, std::move(c));
}

double Jet::coeff(std::span<const int> alpha) const { return c_[layout_->rank(alpha)]; }

double Jet::derivative(std::span<const int> alpha) const {
  double f = 1.0;
  for (int a : alpha)
    for (int k = 2; k <= a; ++k) f *= k;
  return coeff(alpha) * f;
}

Jet Jet::truncated(int order) const {
  if (order == this->order()) return *this;
  if (order > this->order())
    throw OrderError("cannot raise jet order from " + std::to_string(this->order()) + " to " +
                     std::to_string(order));
  auto layout = JetLayout::get(dim(), order);
  std::vector<double> c(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(layout->size()));
  return Jet(std::move(layout), base_, std::move(c));
}

Jet Jet::partial(int i) const {
  if (order() == 0) throw OrderError("cannot differentiate a jet of order 0");
  if (i < 0 || i >= dim()) throw ShapeError("partial derivative index out of range");
  auto layout = JetLayout::get(dim(), order() - 1);
  const auto& src = layout_->deriv_src(i);
  const auto& fac = layout_->deriv_factor(i);
  std::vector<double> c(layout->size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = fac[k] * c_[src[k]];
  return Jet(std::move(layout), base_, std::move(c));
}

Eigen::VectorXd Jet::gradient() const {
  if (order() == 0) throw OrderError("gradient needs a jet of order >= 1");
  Eigen::VectorXd g(dim());
  for (int i = 0; i < dim(); ++i) g(i) = c_[1 + i];
  return g;
}

void check_compatible(const Jet& a, const Jet& b, const char* op) {
  if (!a.valid() || !b.valid()) throw ShapeError(std::string(op) + ": uninitialised jet");
  if (a.layout_ != b.layout_) {
    std::ostringstream os;
    os << op << ": jet shapes differ (dim " << a.dim() << " order " << a.order() << " vs dim " << b.dim()
       << " order " << b.order() << ")";
    throw ShapeError(os.str());
  }
  if (a.base_ != b.base_ && a.base_ && b.base_ && *a.base_ != *b.base_)
    throw ShapeError(std::string(op) + ": jets expanded about different base points");
}

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(*this, o, "add");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(*this, o, "sub");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::add_scaled(double s, const Jet& o) {
  check_compatible(*this, o, "add");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += s * o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, Jet a) {
  a *= -1.0;
  return a += s;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b, "mul");
  const JetLayout& L = *a.layout_;
  const auto& begin = L.prod_begin();
  const auto& pa = L.prod_a();
  const auto& pb = L.prod_b();
  const double* x = a.c_.data();
  const double* y = b.c_.data();
  std::vector<double> out(a.c_.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    double s = 0.0;
    for (std::uint32_t t = begin[c]; t < begin[c + 1]; ++t) s += x[pa[t]] * y[pb[t]];
    out[c] = s;
  }
  return Jet(a.layout_, a.base_ ? a.base_ : b.base_, std::move(out));
}

Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }

Jet compose_series(std::span<const double> coeffs, const Jet& a) {
  const int K = a.order();
  Jet h = a;
  h.coeffs()[0] = 0.0;
  auto c = [&](int k) { return k < static_cast<int>(coeffs.size()) ? coeffs[k] : 0.0; };
  Jet r = Jet::constant_like(c(K), a);
  for (int k = K - 1; k >= 0; --k) {
    r = r * h;
    r.coeffs()[0] += c(k);
  }
  return r;
}

Jet exp(const Jet& a) {
  std::vector<double> c(a.order() + 1);
  double e = std::exp(a.value());
  for (int k = 0; k <= a.order(); ++k) {
    c[k] = e;
    e /= (k + 1);
  }
  return compose_series(c, a);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("log of non-positive value " + std::to_string(a0));
  std::vector<double> c(a.order() + 1);
  c[0] = std::log(a0);
  double p = 1.0;
  for (int k = 1; k <= a.order(); ++k) {
    p /= a0;
    c[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
  }
  return compose_series(c, a);
}

Jet ipow(const Jet& a, int k) {
  if (k < 0) return inv(ipow(a, -k));
  Jet r = Jet::constant_like(1.0, a);
  Jet b = a;
  while (k > 0) {
    if (k & 1) r = r * b;
    k >>= 1;
    if (k) b = b * b;
  }
  return r;
}

Jet pow(const Jet& a, double p) {
  const double a0 = a.value();
  const bool integral = p == std::round(p) && std::abs(p) < 64;
  if (integral && p >= 0) return ipow(a, static_cast<int>(p));
  if (integral && a0 == 0.0) throw DomainError("negative power of zero");
  if (!integral && !(a0 > 0.0))
    throw DomainError("non-integer power " + std::to_string(p) + " of non-positive value " + std::to_string(a0));
  std::vector<double> c(a.order() + 1);
  double binom = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    c[k] = binom * std::pow(a0, p - k);
    binom *= (p - k) / (k + 1);
  }
  return compose_series(c, a);
}

Jet inv(const Jet& a) { return pow(a, -1.0); }
Jet sqrt(const Jet& a) { return pow(a, 0.5); }

std::vector<Jet> coordinate_jets(const Eigen::VectorXd& point, int order) {
  BasePoint base = make_base(point);
  std::vector<Jet> x;
  x.reserve(point.size());
  for (int i = 0; i < point.size(); ++i) x.push_back(Jet::variable(i, order, base));
  return x;
}

std::vector<double> restrict_to_line(const Jet& f, const Eigen::VectorXd& v) {
  if (v.size() != f.dim()) throw ShapeError("direction dimension does not match jet");
  std::vector<double> out(f.order() + 1, 0.0);
  const JetLayout& L = *f.layout();
  for (std::size_t r = 0; r < L.size(); ++r) {
    const MultiIndex& a = L.index(r);
    double m = 1.0;
    int deg = 0;
    for (int i = 0; i < f.dim(); ++i) {
      for (int k = 0; k < a[i]; ++k) m *= v(i);
      deg += a[i];
    }
    out[deg] += f.coeffs()[r] * m;
  }
  return out;
}

}  // namespace plab
