#include "paneitz/geometry.hpp"

#include <cmath>
#include <sstream>

namespace plab {

namespace {

std::size_t ix2(int n, int i, int j) { return static_cast<std::size_t>(i * n + j); }
std::size_t ix3(int n, int i, int j, int k) { return static_cast<std::size_t>((i * n + j) * n + k); }
std::size_t ix4(int n, int i, int j, int k, int l) {
  return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
}

}  // namespace

std::vector<Jet> truncate_all(const std::vector<Jet>& v, int order) {
  std::vector<Jet> out;
  out.reserve(v.size());
  for (const Jet& j : v) out.push_back(truncate_to(j, order));
  return out;
}

MetricJet::MetricJet(std::vector<Jet> components, int negative) : negative_(negative), g_(std::move(components)) {
  const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(g_.size()))));
  if (n * n != static_cast<int>(g_.size()) || n == 0) throw ShapeError("metric needs n*n components");
  n_ = n;
  for (const Jet& c : g_) check_compatible(c, g_[0], "metric");
  if (g_[0].dim() != n) throw ShapeError("metric jets must have one variable per coordinate");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto& a = (*this)(i, j).coeffs();
      const auto& b = (*this)(j, i).coeffs();
      for (std::size_t k = 0; k < a.size(); ++k)
        if (std::abs(a[k] - b[k]) > 1e-12 * std::max(1.0, std::abs(a[k])))
          throw ShapeError("metric jet is not symmetric");
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(value());
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  int neg = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(ev(i)) < 1e-13 * scale || !std::isfinite(ev(i))) {
      std::ostringstream os;
      os << "metric is degenerate at base point (eigenvalue " << ev(i) << ")";
      throw DegeneracyError(os.str());
    }
    if (ev(i) < 0) ++neg;
  }
  if (neg != negative_)
    throw DegeneracyError("metric has " + std::to_string(neg) + " negative eigenvalues, expected " +
                          std::to_string(negative_));
}

Eigen::MatrixXd MetricJet::value() const {
  Eigen::MatrixXd M(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) M(i, j) = (*this)(i, j).value();
  return M;
}

JetTensor MetricJet::tensor() const {
  JetTensor t(n_, lower_slots(2), g_[0]);
  t.data() = g_;
  return t;
}

std::vector<Jet> inverse_metric(const MetricJet& g) {
  const int n = g.dim();
  const Jet& proto = g(0, 0);
  const JetLayout& L = *proto.layout();
  const std::size_t S = L.size();
  std::vector<Eigen::MatrixXd> G(S, Eigen::MatrixXd(n, n)), H(S);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& c = g(i, j).coeffs();
      for (std::size_t k = 0; k < S; ++k) G[k](i, j) = c[k];
    }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G[0]);
  if (!lu.isInvertible()) throw DegeneracyError("metric is singular at base point");
  H[0] = lu.inverse();
  const auto& begin = L.prod_begin();
  const auto& pa = L.prod_a();
  const auto& pb = L.prod_b();
  Eigen::MatrixXd acc(n, n);
  for (std::size_t c = 1; c < S; ++c) {
    acc.setZero();
    for (std::uint32_t t = begin[c]; t < begin[c + 1]; ++t)
      if (pa[t] != 0) acc.noalias() += G[pa[t]] * H[pb[t]];
    H[c] = -H[0] * acc;
  }
  std::vector<Jet> out;
  out.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<double> c(S);
      for (std::size_t k = 0; k < S; ++k) c[k] = H[k](i, j);
      out.emplace_back(proto.layout(), proto.base(), std::move(c));
    }
  return out;
}

Connection connection(const MetricJet& g) {
  Connection c;
  c.n = g.dim();
  c.order = g.order();
  c.g = g.components();
  c.ginv = inverse_metric(g);
  const int n = c.n;
  if (c.order == 0) return c;
  const int K1 = c.order - 1;
  std::vector<Jet> dg(static_cast<std::size_t>(n * n * n));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        dg[ix3(n, l, i, j)] = g(i, j).partial(l);
        dg[ix3(n, l, j, i)] = dg[ix3(n, l, i, j)];
      }
  const std::vector<Jet> gi = truncate_all(c.ginv, K1);
  c.gamma.resize(static_cast<std::size_t>(n * n * n));
  std::vector<Jet> first(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        first[l] = dg[ix3(n, i, l, j)];
        first[l] += dg[ix3(n, j, l, i)];
        first[l] -= dg[ix3(n, l, i, j)];
        first[l] *= 0.5;
      }
      for (int k = 0; k < n; ++k) {
        Jet s = gi[ix2(n, k, 0)] * first[0];
        for (int l = 1; l < n; ++l) s += gi[ix2(n, k, l)] * first[l];
        c.gamma[ix3(n, k, j, i)] = s;
        c.gamma[ix3(n, k, i, j)] = std::move(s);
      }
    }
  return c;
}

JetTensor riemann_tensor(const Connection& c) {
  const int n = c.n;
  if (c.order < 2) throw OrderError("curvature needs metric jets of order >= 2");
  const int K2 = c.order - 2;
  const std::vector<Jet> gam = truncate_all(c.gamma, K2);
  // dgam[l][i][j][k] = d_l Γ^i_jk
  std::vector<Jet> dgam(static_cast<std::size_t>(n * n * n * n));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          dgam[ix4(n, l, i, j, k)] = c.G(i, j, k).partial(l);
          dgam[ix4(n, l, i, k, j)] = dgam[ix4(n, l, i, j, k)];
        }
  const Jet zero = Jet::constant_like(0.0, gam[0]);
  JetTensor R(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          Jet s = dgam[ix4(n, k, i, l, j)] - dgam[ix4(n, l, i, k, j)];
          for (int m = 0; m < n; ++m) {
            s += gam[ix3(n, i, k, m)] * gam[ix3(n, m, l, j)];
            s -= gam[ix3(n, i, l, m)] * gam[ix3(n, m, k, j)];
          }
          R[ix4(n, i, j, l, k)] = -s;
          R[ix4(n, i, j, k, l)] = std::move(s);
        }
  return R;
}

JetTensor ricci_tensor(const Connection& c) {
  const int n = c.n;
  if (c.order < 2) throw OrderError("curvature needs metric jets of order >= 2");
  const int K2 = c.order - 2;
  const std::vector<Jet> gam = truncate_all(c.gamma, K2);
  // tr_m = Γ^k_km (order K-1, differentiated once below)
  std::vector<Jet> tr(n);
  for (int m = 0; m < n; ++m) {
    tr[m] = c.G(0, 0, m);
    for (int k = 1; k < n; ++k) tr[m] += c.G(k, k, m);
  }
  std::vector<Jet> tr2 = truncate_all(tr, K2);
  JetTensor Ric(n, lower_slots(2), Jet::constant_like(0.0, gam[0]));
  for (int j = 0; j < n; ++j)
    for (int l = j; l < n; ++l) {
      Jet s = -tr[j].partial(l);
      for (int k = 0; k < n; ++k) s += c.G(k, l, j).partial(k);
      for (int m = 0; m < n; ++m) {
        s += tr2[m] * gam[ix3(n, m, l, j)];
        for (int k = 0; k < n; ++k) s -= gam[ix3(n, k, l, m)] * gam[ix3(n, m, k, j)];
      }
      Ric[ix2(n, l, j)] = s;
      Ric[ix2(n, j, l)] = std::move(s);
    }
  return Ric;
}

Jet metric_trace(const JetTensor& t, const Connection& c) {
  const int n = c.n;
  const int k = t[0].order();
  Jet s = Jet::constant_like(0.0, t[0]);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) s += truncate_to(c.gi(a, b), k) * t[ix2(n, a, b)];
  return s;
}

Jet scalar_curvature(const Connection& c, const JetTensor& ricci) { return metric_trace(ricci, c); }

JetTensor lower_first(const Connection& c, const JetTensor& Rup) {
  const int n = c.n;
  const int k = Rup[0].order();
  const std::vector<Jet> g = truncate_all(c.g, k);
  JetTensor out(n, lower_slots(4), Jet::constant_like(0.0, Rup[0]));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          Jet s = g[ix2(n, i, 0)] * Rup[ix4(n, 0, j, a, b)];
          for (int m = 1; m < n; ++m) s += g[ix2(n, i, m)] * Rup[ix4(n, m, j, a, b)];
          out[ix4(n, i, j, b, a)] = -s;
          out[ix4(n, i, j, a, b)] = std::move(s);
        }
  return out;
}

JetTensor schouten_tensor(const Connection& c, const JetTensor& ricci, const Jet& R) {
  const int n = c.n;
  if (n < 3) throw ShapeError("Schouten tensor needs n >= 3");
  const int k = ricci[0].order();
  JetTensor S(n, lower_slots(2), Jet::constant_like(0.0, ricci[0]));
  const double a = 1.0 / (2.0 * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = ricci[ix2(n, i, j)];
      s -= a * (R * truncate_to(c.g[ix2(n, i, j)], k));
      S[ix2(n, i, j)] = s / (n - 2.0);
    }
  return S;
}

JetTensor kulkarni_nomizu(const JetTensor& A, const JetTensor& B) {
  const int n = A.dim();
  JetTensor out(n, lower_slots(4), Jet::constant_like(0.0, A[0]));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet s = A[ix2(n, i, k)] * B[ix2(n, j, l)];
          s += A[ix2(n, j, l)] * B[ix2(n, i, k)];
          s -= A[ix2(n, i, l)] * B[ix2(n, j, k)];
          s -= A[ix2(n, j, k)] * B[ix2(n, i, l)];
          out[ix4(n, i, j, k, l)] = std::move(s);
        }
  return out;
}

CurvaturePack curvature_at(const MetricJet& g) {
  const Connection c = connection(g);
  const int n = c.n;
  CurvaturePack p;
  p.dim = n;
  p.order = c.order - 2;
  p.inverse_metric = JetTensor(n, {Variance::Up, Variance::Up}, c.ginv[0]);
  p.inverse_metric.data() = c.ginv;
  p.christoffel = JetTensor(n, {Variance::Up, Variance::Down, Variance::Down}, c.gamma[0]);
  p.christoffel.data() = c.gamma;
  p.riemann = riemann_tensor(c);
  p.riemann_down = lower_first(c, p.riemann);
  p.ricci = contract(p.riemann, 0, 2);
  p.scalar = scalar_curvature(c, p.ricci);
  if (n >= 3) {
    p.schouten = schouten_tensor(c, p.ricci, p.scalar);
    JetTensor gk(n, lower_slots(2), p.scalar);
    gk.data() = truncate_all(c.g, p.order);
    const JetTensor kn = kulkarni_nomizu(p.schouten, gk);
    p.weyl = p.riemann_down;
    for (std::size_t f = 0; f < p.weyl.size(); ++f) p.weyl[f] -= kn[f];
  }
  return p;
}

JetTensor covariant_derivative(const JetTensor& t, const Connection& c) {
  const int n = c.n;
  const int r = t.rank();
  for (Variance v : t.slots())
    if (v != Variance::Down) throw ShapeError("covariant_derivative expects an all-lower tensor");
  const int k = t[0].order() - 1;
  if (k < 0) throw OrderError("covariant derivative of an order-0 jet");
  if (k > c.order - 1) throw OrderError("tensor jet order exceeds the connection");
  const std::vector<Jet> gam = truncate_all(c.gamma, k);
  std::vector<Jet> tk = truncate_all(t.data(), k);
  JetTensor out(n, lower_slots(r + 1), tk[0]);
  std::vector<int> idx(r + 1), src(r);
  for (std::size_t f = 0; f < out.size(); ++f) {
    out.unflatten(f, idx);
    const int a = idx[r];
    std::copy(idx.begin(), idx.begin() + r, src.begin());
    Jet s = t[t.flatten(src)].partial(a);
    for (int slot = 0; slot < r; ++slot) {
      const int is = src[slot];
      for (int m = 0; m < n; ++m) {
        src[slot] = m;
        s -= gam[ix3(n, m, a, is)] * tk[t.flatten(src)];
      }
      src[slot] = is;
    }
    out[f] = std::move(s);
  }
  return out;
}

JetTensor covariant_hessian(const Jet& f, const Connection& c) {
  const int n = c.n;
  JetTensor df(n, lower_slots(1), f);
  for (int i = 0; i < n; ++i) df[static_cast<std::size_t>(i)] = f.partial(i);
  return covariant_derivative(df, c);
}

Jet laplace_beltrami(const Jet& f, const Connection& c) { return metric_trace(covariant_hessian(f, c), c); }

Jet divergence(const JetTensor& v, const Connection& c) {
  if (v.rank() != 1) throw ShapeError("divergence expects a covector");
  return metric_trace(covariant_derivative(v, c), c);
}

JetTensor divergence_sym2(const JetTensor& t, const Connection& c) {
  if (t.rank() != 2) throw ShapeError("divergence_sym2 expects a rank-2 tensor");
  const int n = c.n;
  const JetTensor d = covariant_derivative(t, c);  // (a, b, c) with c the derivative
  const int k = d[0].order();
  JetTensor out(n, lower_slots(1), d[0]);
  for (int b = 0; b < n; ++b) {
    Jet s = Jet::constant_like(0.0, d[0]);
    for (int a = 0; a < n; ++a)
      for (int e = 0; e < n; ++e) s += truncate_to(c.gi(a, e), k) * d[ix3(n, a, b, e)];
    out[static_cast<std::size_t>(b)] = std::move(s);
  }
  return out;
}

JetTensor rough_laplacian(const JetTensor& t, const Connection& c) {
  const int n = c.n;
  const JetTensor dd = covariant_derivative(covariant_derivative(t, c), c);
  const int k = dd[0].order();
  JetTensor out(n, t.slots(), dd[0]);
  const std::size_t nn = static_cast<std::size_t>(n * n);
  for (std::size_t f = 0; f < out.size(); ++f) {
    Jet s = Jet::constant_like(0.0, dd[0]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) s += truncate_to(c.gi(a, b), k) * dd[f * nn + ix2(n, a, b)];
    out[f] = std::move(s);
  }
  return out;
}

double squared_norm(const JetTensor& t, const Eigen::MatrixXd& ginv) {
  PointTensor v = values(t);
  const PointTensor gi = from_matrix(ginv, Variance::Up);
  PointTensor up = v;
  for (int s = 0; s < up.rank(); ++s) up = move_index(up, s, gi);
  double acc = 0.0;
  for (std::size_t f = 0; f < v.size(); ++f) acc += v[f] * up[f];
  return acc;
}

SecondFundamentalForm second_fundamental_form(double r, const MetricJet& g) {
  const int n = g.dim();
  if (g.order() < 1) throw OrderError("second fundamental form needs metric jets of order >= 1");
  const Eigen::VectorXd& x = *g.base();
  if (std::abs(x.norm() - r) > 1e-9 * std::max(1.0, r))
    throw ShapeError("base point does not lie on the coordinate sphere of radius r");
  const MetricJet g1(truncate_all(g.components(), 1), g.negative());
  const Connection c = connection(g1);
  const std::vector<Jet> X = coordinate_jets(x, 2);
  Jet rr2 = X[0] * X[0];
  for (int i = 1; i < n; ++i) rr2 += X[i] * X[i];
  // Re-express on the metric's own base pointer so jets combine.
  const Jet rad = Jet(JetLayout::get(n, 2), g.base(), sqrt(rr2).coeffs());
  std::vector<Jet> dr(n);
  for (int i = 0; i < n; ++i) dr[i] = rad.partial(i);
  Jet norm2 = Jet::constant_like(0.0, dr[0]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) norm2 += c.gi(i, j) * dr[i] * dr[j];
  const Jet scale = pow(norm2, -0.5);
  JetTensor N(n, lower_slots(1), dr[0]);
  for (int i = 0; i < n; ++i) N[static_cast<std::size_t>(i)] = -(dr[i] * scale);
  const JetTensor dN = covariant_derivative(N, c);  // (b, a) = ∇_a N_b

  SecondFundamentalForm out;
  out.normal = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) out.normal(i) = N[static_cast<std::size_t>(i)].value();
  const Eigen::MatrixXd G = g.value();
  const Eigen::MatrixXd Gi = G.inverse();
  out.normal_up = Gi * out.normal;
  Eigen::MatrixXd DN(n, n);  // DN(a, b) = ∇_a N_b
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) DN(a, b) = dN[ix2(n, b, a)].value();
  // P(a, i) = δ^a_i - N^a N_i projects onto the tangent space.
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - out.normal_up * out.normal.transpose();
  Eigen::MatrixXd II = -(P.transpose() * DN * P);
  II = (0.5 * (II + II.transpose())).eval();
  out.II = from_matrix(II, Variance::Down);
  out.induced = from_matrix(G - out.normal * out.normal.transpose(), Variance::Down);
  out.H = (Gi * II).trace();
  return out;
}

}  // namespace plab
