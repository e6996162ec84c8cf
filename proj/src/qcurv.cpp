#include "paneitz/qcurv.hpp"

#include <cmath>

namespace plab {

namespace {

std::size_t ix2(int n, int i, int j) { return static_cast<std::size_t>(i * n + j); }

void require_q_inputs(const Connection& c) {
  if (c.n < 3) throw ShapeError("Q-curvature needs n >= 3");
  if (c.order < 4) throw OrderError("Q-curvature needs metric jets of order >= 4");
}

Eigen::MatrixXd value_matrix(const std::vector<Jet>& m, int n) {
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = m[ix2(n, i, j)].value();
  return M;
}

}  // namespace

double sigma2_schouten(const Connection& c, const JetTensor& ricci, const Jet& scalar) {
  const int n = c.n;
  const Eigen::MatrixXd G = value_matrix(c.g, n);
  const Eigen::MatrixXd Gi = value_matrix(c.ginv, n);
  Eigen::MatrixXd S(n, n);
  const double R = scalar.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) = (ricci[ix2(n, i, j)].value() - R * G(i, j) / (2.0 * (n - 1))) / (n - 2.0);
  const Eigen::MatrixXd A = Gi * S;  // S^i_j
  const double tr = A.trace();
  return 0.5 * (tr * tr - (A * A).trace());
}

QCurvature q_curvature(const Connection& c) {
  require_q_inputs(c);
  const int n = c.n;
  const JetTensor ric = ricci_tensor(c);
  const Jet R = scalar_curvature(c, ric);
  const Jet lapR = laplace_beltrami(R, c);
  const Eigen::MatrixXd Gi = value_matrix(c.ginv, n);

  QCurvature q;
  q.scalar = R.value();
  q.laplacian_scalar = lapR.value();
  q.ricci_norm2 = squared_norm(ric, Gi);
  q.sigma1 = q.scalar / (2.0 * (n - 1));
  q.sigma2 = sigma2_schouten(c, ric, R);
  const double nm1 = n - 1.0, nm2 = n - 2.0;
  q.q_sigma = -q.laplacian_scalar / (2.0 * nm1) + 4.0 * q.sigma2 + 0.5 * (n - 4.0) * q.sigma1 * q.sigma1;
  q.q_expanded = -q.laplacian_scalar / (2.0 * nm1) - 2.0 * q.ricci_norm2 / (nm2 * nm2) +
                 (n * n * n - 4.0 * n * n + 16.0 * n - 16.0) * q.scalar * q.scalar / (8.0 * nm1 * nm1 * nm2 * nm2);
  q.q = q.q_sigma;
  const double scale = std::max({1.0, std::abs(q.q), q.ricci_norm2, q.scalar * q.scalar});
  if (!(std::abs(q.q_sigma - q.q_expanded) <= 1e-10 * scale))
    throw std::logic_error("Q-curvature forms disagree: " + std::to_string(q.q_sigma) + " vs " +
                           std::to_string(q.q_expanded));
  return q;
}

QCurvature q_curvature(const MetricJet& g) {
  if (g.order() < 4) throw OrderError("Q-curvature needs metric jets of order >= 4");
  return q_curvature(connection(g));
}

double paneitz_apply(const Connection& c, const Jet& u, double q) {
  require_q_inputs(c);
  if (u.order() < 4) throw OrderError("Paneitz operator needs a function jet of order >= 4");
  check_compatible(u.truncated(c.order < u.order() ? c.order : u.order()),
                   truncate_to(c.g[0], std::min(c.order, u.order())), "paneitz");
  const int n = c.n;
  const Jet lap = laplace_beltrami(u, c);
  const double bilap = laplace_beltrami(lap, c).value();

  // T = 4S - (n-2) σ1 g = (4/(n-2)) Ric - (4/(2(n-1)(n-2)) + (n-2)/(2(n-1))) R g, to order 1.
  const JetTensor ric = ricci_tensor(c);
  const Jet R = scalar_curvature(c, ric);
  const double cr = 4.0 / (2.0 * (n - 1) * (n - 2)) + (n - 2.0) / (2.0 * (n - 1));
  std::vector<Jet> T(static_cast<std::size_t>(n * n));
  const Jet R1 = truncate_to(R, 1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      T[ix2(n, a, b)] = (4.0 / (n - 2.0)) * truncate_to(ric[ix2(n, a, b)], 1) -
                        cr * (R1 * truncate_to(c.g[ix2(n, a, b)], 1));
  std::vector<Jet> du(n);
  for (int i = 0; i < n; ++i) du[i] = truncate_to(u.partial(i), 1);
  std::vector<Jet> grad(n);  // ∇^a u
  for (int a = 0; a < n; ++a) {
    grad[a] = truncate_to(c.gi(a, 0), 1) * du[0];
    for (int k = 1; k < n; ++k) grad[a] += truncate_to(c.gi(a, k), 1) * du[k];
  }
  JetTensor V(n, lower_slots(1), du[0]);
  for (int b = 0; b < n; ++b) {
    Jet s = T[ix2(n, 0, b)] * grad[0];
    for (int a = 1; a < n; ++a) s += T[ix2(n, a, b)] * grad[a];
    V[static_cast<std::size_t>(b)] = std::move(s);
  }
  const double divV = divergence(V, c).value();
  return bilap + divV + 0.5 * (n - 4.0) * q * u.value();
}

double paneitz_apply(const MetricJet& g, const Jet& u) {
  const Connection c = connection(g);
  return paneitz_apply(c, u, q_curvature(c).q);
}

const char* to_string(ConformalMode m) {
  switch (m) {
    case ConformalMode::Yamabe: return "yamabe";
    case ConformalMode::QPower: return "q-power";
    case ConformalMode::Exponential: return "exponential";
  }
  return "?";
}

ConformalMode conformal_mode_from_string(const std::string& s) {
  if (s == "yamabe") return ConformalMode::Yamabe;
  if (s == "q-power") return ConformalMode::QPower;
  if (s == "exponential") return ConformalMode::Exponential;
  throw ConfigError("unknown conformal mode '" + s + "' (expected yamabe, q-power or exponential)");
}

Jet conformal_weight(ConformalMode mode, int n, const Jet& u) {
  switch (mode) {
    case ConformalMode::Yamabe:
      if (n == 2) throw ConfigError("yamabe mode needs n != 2");
      return pow(u, 4.0 / (n - 2.0));
    case ConformalMode::QPower:
      if (n == 4) throw ConfigError("q-power mode is undefined for n = 4; use exponential");
      return pow(u, 4.0 / (n - 4.0));
    case ConformalMode::Exponential: return exp(2.0 * u);
  }
  throw ConfigError("bad conformal mode");
}

MetricJet conformal_metric(const MetricJet& g, const Jet& w) {
  std::vector<Jet> out;
  out.reserve(g.components().size());
  for (const Jet& gij : g.components()) out.push_back(w * gij);
  return MetricJet(std::move(out), g.negative());
}

namespace {

// Bring metric and factor to a common order and base-point pointer.
std::pair<MetricJet, Jet> align(const MetricJet& g, const Jet& u) {
  const int K = std::min(g.order(), u.order());
  std::vector<Jet> comps = truncate_all(g.components(), K);
  Jet uu(JetLayout::get(u.dim(), K), comps[0].base(), truncate_to(u, K).coeffs());
  check_compatible(uu, comps[0], "conformal factor");
  return {MetricJet(std::move(comps), g.negative()), std::move(uu)};
}

}  // namespace

TransformCheck q_transform_check(const MetricJet& g_in, ConformalMode mode, const Jet& u_in) {
  auto [g, u] = align(g_in, u_in);
  const int n = g.dim();
  if (mode == ConformalMode::QPower && n == 4)
    throw ConfigError("q-power transformation law needs n != 4; use exponential mode");
  if (mode == ConformalMode::Exponential && n != 4)
    throw ConfigError("exponential transformation law holds only for n = 4");
  const MetricJet gbar = conformal_metric(g, conformal_weight(mode, n, u));
  const Connection c = connection(g);
  TransformCheck t;
  const double u0 = u.value();
  if (mode == ConformalMode::Yamabe) {
    if (g.order() < 2) throw OrderError("scalar curvature law needs order >= 2");
    const Connection cb = connection(gbar);
    t.lhs = scalar_curvature(cb, ricci_tensor(cb)).value();
    const double R = scalar_curvature(c, ricci_tensor(c)).value();
    const double lap = laplace_beltrami(u, c).value();
    t.rhs = std::pow(u0, -(n + 2.0) / (n - 2.0)) * (R * u0 - 4.0 * (n - 1.0) / (n - 2.0) * lap);
  } else {
    t.lhs = q_curvature(gbar).q;
    const double q = q_curvature(c).q;
    const double Pu = paneitz_apply(c, u, q);
    if (mode == ConformalMode::QPower)
      t.rhs = 2.0 / (n - 4.0) * std::pow(u0, -(n + 4.0) / (n - 4.0)) * Pu;
    else
      t.rhs = std::exp(-4.0 * u0) * (Pu + q);
  }
  t.residual = std::abs(t.lhs - t.rhs);
  return t;
}

TransformCheck paneitz_covariance_check(const MetricJet& g_in, ConformalMode mode, const Jet& u_in,
                                        const Jet& phi_in) {
  auto [g, u] = align(g_in, u_in);
  const Jet phi(u.layout(), u.base(), truncate_to(phi_in, u.order()).coeffs());
  const int n = g.dim();
  if (mode == ConformalMode::Yamabe) throw ConfigError("Paneitz covariance needs q-power or exponential mode");
  if (mode == ConformalMode::QPower && n == 4) throw ConfigError("q-power mode needs n != 4");
  if (mode == ConformalMode::Exponential && n != 4) throw ConfigError("exponential mode needs n = 4");
  const MetricJet gbar = conformal_metric(g, conformal_weight(mode, n, u));
  TransformCheck t;
  t.lhs = paneitz_apply(gbar, phi);
  if (mode == ConformalMode::QPower)
    t.rhs = std::pow(u.value(), -(n + 4.0) / (n - 4.0)) * paneitz_apply(g, u * phi);
  else
    t.rhs = std::exp(-4.0 * u.value()) * paneitz_apply(g, phi);
  t.residual = std::abs(t.lhs - t.rhs);
  return t;
}

JetTensor a_tensor(const Connection& c, double alpha, double beta) {
  const int n = c.n;
  if (c.order < 4) throw OrderError("A-tensor needs metric jets of order >= 4");
  const int k = c.order - 4;
  const JetTensor ric = ricci_tensor(c);
  const Jet R = scalar_curvature(c, ric);
  const JetTensor boxRic = rough_laplacian(ric, c);
  const Jet boxR = laplace_beltrami(R, c);
  const JetTensor hessR = covariant_hessian(R, c);
  const JetTensor riem = lower_first(c, riemann_tensor(c));

  const std::vector<Jet> gk = truncate_all(c.g, k);
  const std::vector<Jet> gik = truncate_all(c.ginv, k);
  std::vector<Jet> ricd = truncate_all(ric.data(), k);
  std::vector<Jet> ricu(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet s = Jet::constant_like(0.0, gk[0]);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) s += gik[ix2(n, a, p)] * gik[ix2(n, b, q)] * ricd[ix2(n, p, q)];
      ricu[ix2(n, a, b)] = std::move(s);
    }
  Jet ric2 = Jet::constant_like(0.0, gk[0]);
  for (std::size_t f = 0; f < ricd.size(); ++f) ric2 += ricu[f] * ricd[f];
  const Jet Rk = truncate_to(R, k);

  JetTensor A(n, lower_slots(2), gk[0]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet ricriem = Jet::constant_like(0.0, gk[0]);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          ricriem += ricu[ix2(n, p, q)] * truncate_to(riem[static_cast<std::size_t>(((p * n + i) * n + j) * n + q)], k);
      const Jet& g = gk[ix2(n, i, j)];
      Jet a = beta * boxRic[ix2(n, i, j)];
      a += (0.5 * beta + 2.0 * alpha) * (boxR * g);
      a.add_scaled(-(2.0 * alpha + beta), hessR[ix2(n, i, j)]);
      a.add_scaled(-2.0 * beta, ricriem);
      a.add_scaled(2.0 * alpha, Rk * ricd[ix2(n, i, j)]);
      a.add_scaled(-0.5 * alpha, Rk * Rk * g);
      a.add_scaled(-0.5 * beta, ric2 * g);
      A[ix2(n, i, j)] = std::move(a);
    }
  return A;
}

PointTensor a_tensor_value(const MetricJet& g, double alpha, double beta) {
  return values(a_tensor(connection(g), alpha, beta));
}

ADivergence a_divergence(const MetricJet& g, double alpha, double beta) {
  if (g.order() < 5) throw OrderError("A-tensor divergence needs metric jets of order >= 5");
  const Connection c = connection(g);
  const int n = c.n;
  const JetTensor A = a_tensor(c, alpha, beta);
  const JetTensor dA = covariant_derivative(A, c);  // (i, j, k) = ∇_k A_ij
  ADivergence out;
  out.divergence = Eigen::VectorXd::Zero(n);
  double scale = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0, mag = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double term = c.gi(i, k).value() * dA[static_cast<std::size_t>((i * n + j) * n + k)].value();
        s += term;
        mag += std::abs(term);
      }
    out.divergence(j) = s;
    scale = std::max(scale, mag);
  }
  out.scale = scale;
  out.relative_residual = scale > 0.0 ? out.divergence.cwiseAbs().maxCoeff() / scale : 0.0;
  return out;
}

}  // namespace plab
