#include <cmath>
#include <vector>

#include "paneitz/jets.hpp"

namespace plab {

std::vector<double> central_weights(int m, int p) {
  const int N = 2 * p + 1;
  if (m < 0 || m >= N) throw ShapeError("stencil too narrow for derivative order");
  std::vector<double> x(N);
  for (int i = 0; i < N; ++i) x[i] = i - p;
  // c[i][k]: weight of node i for the k-th derivative.
  std::vector<std::vector<double>> c(N, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < N; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(N);
  for (int i = 0; i < N; ++i) w[i] = c[i][m];
  return w;
}

double default_fd_step(const Eigen::VectorXd& x, int m) {
  const double scale = std::max(1.0, x.norm());
  return 1e-3 * scale * std::max(1, m);
}

double fd_derivative(const PointField& f, const Eigen::VectorXd& x, std::span<const int> alpha, double step,
                     int accuracy) {
  if (static_cast<int>(alpha.size()) != x.size()) throw ShapeError("multi-index does not match point dimension");
  int total = 0;
  for (int a : alpha) {
    if (a < 0) throw ShapeError("negative multi-index entry");
    total += a;
  }
  if (total == 0) return f(x);
  if (step <= 0.0) step = default_fd_step(x, total);
  if (accuracy <= 0) accuracy = total >= 3 ? 4 : 2;
  const int extra = accuracy / 2 - 1;

  struct Axis {
    int dim;
    int half;
    std::vector<double> w;
  };
  std::vector<Axis> axes;
  for (int i = 0; i < x.size(); ++i) {
    if (alpha[i] == 0) continue;
    const int half = (alpha[i] + 1) / 2 + extra;
    axes.push_back({i, half, central_weights(alpha[i], half)});
  }

  // Walk the tensor-product stencil with an odometer over the active axes.
  std::vector<int> pos(axes.size(), 0);
  double sum = 0.0;
  Eigen::VectorXd y = x;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const int off = pos[k] - axes[k].half;
      w *= axes[k].w[pos[k]];
      y(axes[k].dim) = x(axes[k].dim) + off * step;
    }
    if (w != 0.0) sum += w * f(y);
    std::size_t k = 0;
    for (; k < axes.size(); ++k) {
      if (++pos[k] < 2 * axes[k].half + 1) break;
      pos[k] = 0;
    }
    if (k == axes.size()) break;
  }
  return sum / std::pow(step, total);
}

}  // namespace plab
