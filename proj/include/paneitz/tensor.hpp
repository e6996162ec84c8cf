#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "paneitz/errors.hpp"
#include "paneitz/jets.hpp"

namespace plab {

enum class Variance { Up, Down };

inline double zero_like(double) { return 0.0; }
inline Jet zero_like(const Jet& j) { return Jet::constant_like(0.0, j); }

/// Dense tensor with per-slot variance, stored row-major in the slot order.
///
/// Scalar is double for point values and Jet for fields known to some order.
template <class Scalar>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, std::vector<Variance> slots, const Scalar& fill)
      : dim_(dim), slots_(std::move(slots)), data_(ipow_size(dim, slots_.size()), fill) {}

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  const std::vector<Variance>& slots() const { return slots_; }
  std::size_t size() const { return data_.size(); }

  std::size_t flat(std::initializer_list<int> idx) const {
    if (static_cast<int>(idx.size()) != rank()) throw ShapeError("index count does not match tensor rank");
    std::size_t f = 0;
    for (int i : idx) {
      if (i < 0 || i >= dim_) throw ShapeError("tensor index out of range");
      f = f * dim_ + static_cast<std::size_t>(i);
    }
    return f;
  }
  Scalar& operator()(std::initializer_list<int> idx) { return data_[flat(idx)]; }
  const Scalar& operator()(std::initializer_list<int> idx) const { return data_[flat(idx)]; }
  Scalar& operator[](std::size_t f) { return data_[f]; }
  const Scalar& operator[](std::size_t f) const { return data_[f]; }
  std::vector<Scalar>& data() { return data_; }
  const std::vector<Scalar>& data() const { return data_; }

  /// Declare slots s1, s2 (anti)symmetric; point tensors are checked to 1e-12.
  void declare_symmetry(int s1, int s2, bool anti = false) {
    if (s1 < 0 || s2 < 0 || s1 >= rank() || s2 >= rank() || s1 == s2) throw ShapeError("bad symmetry slots");
    if (slots_[s1] != slots_[s2]) throw ShapeError("symmetry between slots of different variance");
    symmetries_.push_back({s1, s2, anti});
    check_symmetries(1e-12);
  }
  void check_symmetries(double tol) const {
    if constexpr (std::is_same_v<Scalar, double>) {
      std::vector<int> idx(rank());
      for (const auto& s : symmetries_) {
        for (std::size_t f = 0; f < data_.size(); ++f) {
          unflatten(f, idx);
          std::swap(idx[s.a], idx[s.b]);
          const double other = data_[flatten(idx)];
          const double expect = s.anti ? -other : other;
          const double scale = std::max(1.0, std::abs(data_[f]));
          if (std::abs(data_[f] - expect) > tol * scale)
            throw ShapeError("declared symmetry between slots " + std::to_string(s.a) + " and " +
                             std::to_string(s.b) + " does not hold");
        }
      }
    }
  }

  void unflatten(std::size_t f, std::vector<int>& idx) const {
    for (int k = rank() - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(f % dim_);
      f /= dim_;
    }
  }
  std::size_t flatten(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * dim_ + static_cast<std::size_t>(i);
    return f;
  }

 private:
  struct Symmetry {
    int a, b;
    bool anti;
  };
  static std::size_t ipow_size(int d, std::size_t r) {
    std::size_t s = 1;
    for (std::size_t k = 0; k < r; ++k) s *= static_cast<std::size_t>(d);
    return s;
  }

  int dim_ = 0;
  std::vector<Variance> slots_;
  std::vector<Scalar> data_;
  std::vector<Symmetry> symmetries_;
};

using PointTensor = Tensor<double>;
using JetTensor = Tensor<Jet>;

inline std::vector<Variance> lower_slots(int rank) { return std::vector<Variance>(rank, Variance::Down); }

/// Trace over slots s1 < s2, which must have opposite variance.
template <class Scalar>
Tensor<Scalar> contract(const Tensor<Scalar>& t, int s1, int s2) {
  if (s1 == s2 || s1 < 0 || s2 < 0 || s1 >= t.rank() || s2 >= t.rank())
    throw ShapeError("contract: bad slots");
  if (s1 > s2) std::swap(s1, s2);
  if (t.slots()[s1] == t.slots()[s2]) throw ShapeError("contract: slots have equal variance");
  std::vector<Variance> out_slots;
  for (int k = 0; k < t.rank(); ++k)
    if (k != s1 && k != s2) out_slots.push_back(t.slots()[k]);
  Tensor<Scalar> out(t.dim(), out_slots, zero_like(t[0]));
  std::vector<int> oi(out.rank()), ti(t.rank());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out.unflatten(f, oi);
    for (int k = 0, j = 0; k < t.rank(); ++k)
      if (k != s1 && k != s2) ti[k] = oi[j++];
    for (int m = 0; m < t.dim(); ++m) {
      ti[s1] = ti[s2] = m;
      out[f] += t[t.flatten(ti)];
    }
  }
  return out;
}

/// Move the index at `slot` with a rank-2 metric (lowering) or inverse metric (raising).
template <class Scalar>
Tensor<Scalar> move_index(const Tensor<Scalar>& t, int slot, const Tensor<Scalar>& m) {
  if (m.rank() != 2 || m.dim() != t.dim()) throw ShapeError("move_index: metric shape mismatch");
  if (slot < 0 || slot >= t.rank()) throw ShapeError("move_index: bad slot");
  const Variance target = t.slots()[slot] == Variance::Up ? Variance::Down : Variance::Up;
  if (m.slots()[0] != target || m.slots()[1] != target)
    throw ShapeError("move_index: metric variance does not match requested move");
  auto slots = t.slots();
  slots[slot] = target;
  Tensor<Scalar> out(t.dim(), slots, zero_like(t[0]));
  std::vector<int> idx(t.rank());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out.unflatten(f, idx);
    const int a = idx[slot];
    for (int b = 0; b < t.dim(); ++b) {
      idx[slot] = b;
      out[f] += m({a, b}) * t[t.flatten(idx)];
    }
  }
  return out;
}

inline void check_nondegenerate(const PointTensor& g) {
  Eigen::MatrixXd M(g.dim(), g.dim());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) M(i, j) = g({i, j});
  const double det = M.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-13 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw DegeneracyError("metric is degenerate (det = " + std::to_string(det) + ")");
}

/// Raise or lower the index at `slot` of a point tensor; the metric is checked first.
inline PointTensor raise_lower(const PointTensor& t, int slot, const PointTensor& metric,
                               const PointTensor& inverse_metric) {
  check_nondegenerate(metric);
  return move_index(t, slot, t.slots().at(slot) == Variance::Up ? metric : inverse_metric);
}

/// Full contraction <a, b> using the metric on every slot.
template <class Scalar>
Scalar inner_product(const Tensor<Scalar>& a, const Tensor<Scalar>& b, const Tensor<Scalar>& metric,
                     const Tensor<Scalar>& inverse_metric) {
  if (a.slots() != b.slots() || a.dim() != b.dim()) throw ShapeError("inner_product: index layouts differ");
  Tensor<Scalar> c = b;
  for (int s = 0; s < c.rank(); ++s) c = move_index(c, s, c.slots()[s] == Variance::Up ? metric : inverse_metric);
  Scalar acc = zero_like(a[0]);
  for (std::size_t f = 0; f < a.size(); ++f) acc += a[f] * c[f];
  return acc;
}

/// Point values of a jet tensor.
inline PointTensor values(const JetTensor& t) {
  PointTensor out(t.dim(), t.slots(), 0.0);
  for (std::size_t f = 0; f < t.size(); ++f) out[f] = t[f].value();
  return out;
}

inline Eigen::MatrixXd as_matrix(const PointTensor& t) {
  if (t.rank() != 2) throw ShapeError("as_matrix needs a rank-2 tensor");
  Eigen::MatrixXd M(t.dim(), t.dim());
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) M(i, j) = t[static_cast<std::size_t>(i * t.dim() + j)];
  return M;
}

inline PointTensor from_matrix(const Eigen::MatrixXd& M, Variance v) {
  PointTensor t(static_cast<int>(M.rows()), {v, v}, 0.0);
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) t({i, j}) = M(i, j);
  return t;
}

}  // namespace plab
