#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "lcsgeo/linalg.hpp"

namespace lcsgeo {

enum class Variance { Up, Low };
enum class Basis { Coordinate, Frame };

/// Dense multi-index numeric tensor at a point. One Variance per slot;
/// storage is row-major over the slots in declaration order.
class TensorValue {
public:
  TensorValue() = default;
  TensorValue(int n, std::vector<Variance> var, Basis basis = Basis::Coordinate)
      : n_(n), var_(std::move(var)), basis_(basis) {
    std::size_t sz = 1;
    for (std::size_t s = 0; s < var_.size(); ++s) sz *= static_cast<std::size_t>(n_);
    data_.assign(sz, 0.0);
  }

  int dim() const { return n_; }
  int order() const { return static_cast<int>(var_.size()); }
  const std::vector<Variance>& variance() const { return var_; }
  Basis basis() const { return basis_; }
  void set_basis(Basis b) { basis_ = b; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  template <typename... Ix>
  double& operator()(Ix... idx) {
    return data_[flat(idx...)];
  }
  template <typename... Ix>
  double operator()(Ix... idx) const {
    return data_[flat(idx...)];
  }

  double max_abs() const {
    double worst = 0.0;
    for (double v : data_) worst = std::max(worst, std::fabs(v));
    return worst;
  }

  bool same_shape(const TensorValue& o) const {
    return n_ == o.n_ && var_ == o.var_;
  }

private:
  template <typename... Ix>
  std::size_t flat(Ix... idx) const {
    static_assert(sizeof...(Ix) > 0);
    if (sizeof...(Ix) != var_.size())
      throw std::logic_error("tensor index arity mismatch");
    std::size_t f = 0;
    for (int i : {static_cast<int>(idx)...}) f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
    return f;
  }

  int n_ = 0;
  std::vector<Variance> var_;
  std::vector<double> data_;
  Basis basis_ = Basis::Coordinate;
};

inline TensorValue operator+(const TensorValue& a, const TensorValue& b) {
  if (!a.same_shape(b)) throw std::logic_error("tensor shape mismatch");
  TensorValue r = a;
  for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] += b.data()[i];
  return r;
}

inline TensorValue operator-(const TensorValue& a, const TensorValue& b) {
  if (!a.same_shape(b)) throw std::logic_error("tensor shape mismatch");
  TensorValue r = a;
  for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] -= b.data()[i];
  return r;
}

inline TensorValue operator*(double s, const TensorValue& a) {
  TensorValue r = a;
  for (double& v : r.data()) v *= s;
  return r;
}

/// Contract slot `slot` with matrix M: out[..a..] = sum_b M(a,b) in[..b..].
inline TensorValue contract_slot(const TensorValue& t, int slot, const Matrix& m) {
  TensorValue out(t.dim(), t.variance(), t.basis());
  int n = t.dim();
  int order = t.order();
  std::size_t total = t.data().size();
  // stride of the chosen slot
  std::size_t stride = 1;
  for (int s = order - 1; s > slot; --s) stride *= static_cast<std::size_t>(n);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t slot_ix = (f / stride) % static_cast<std::size_t>(n);
    std::size_t base = f - slot_ix * stride;
    double acc = 0.0;
    for (int b = 0; b < n; ++b)
      acc += m.at(static_cast<int>(slot_ix), b) *
             t.data()[base + static_cast<std::size_t>(b) * stride];
    out.data()[f] = acc;
  }
  return out;
}

/// Raise a covariant slot with g_inv (or lower a contravariant slot with g).
inline TensorValue flip_slot(const TensorValue& t, int slot, const Matrix& metric_or_inv) {
  TensorValue out = contract_slot(t, slot, metric_or_inv);
  std::vector<Variance> var = t.variance();
  var[slot] = var[slot] == Variance::Up ? Variance::Low : Variance::Up;
  TensorValue shaped(t.dim(), var, t.basis());
  shaped.data() = out.data();
  return shaped;
}

} // namespace lcsgeo
