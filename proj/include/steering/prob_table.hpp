#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "steering/errors.hpp"

namespace steering {

// Small dense table of nonnegative reals indexed by a tuple. One axis can be
// declared as the outcome axis, in which case the table must sum to one along
// it for every setting of the remaining indices (within 1e-12).
class ProbTable {
 public:
  ProbTable() = default;
  explicit ProbTable(std::vector<std::size_t> dims)
      : dims_(std::move(dims)), v_(count(dims_), 0.0) {}
  ProbTable(std::vector<std::size_t> dims, std::vector<double> values)
      : dims_(std::move(dims)), v_(std::move(values)) {
    if (v_.size() != count(dims_))
      throw DimensionError("probability table data does not match shape");
  }

  static ProbTable validated(std::vector<std::size_t> dims,
                             std::vector<double> values, std::size_t axis,
                             double tol = 1e-12) {
    ProbTable t(std::move(dims), std::move(values));
    t.check_normalized(axis, tol);
    return t;
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  template <class... Ix>
  double& operator()(Ix... ix) {
    return v_[flat({static_cast<std::size_t>(ix)...})];
  }
  template <class... Ix>
  double operator()(Ix... ix) const {
    return v_[flat({static_cast<std::size_t>(ix)...})];
  }

  void check_normalized(std::size_t axis, double tol = 1e-12) const {
    if (axis >= dims_.size()) throw DimensionError("axis out of range");
    for (double p : v_)
      if (p < -tol) throw ValidationError("probability table has negative entry");
    const std::size_t stride = stride_of(axis);
    const std::size_t extent = dims_[axis];
    const std::size_t groups = v_.size() / extent;
    for (std::size_t g = 0; g < groups; ++g) {
      // decompose g into the indices of the remaining axes
      std::size_t base = 0, rem = g;
      for (std::size_t ax = dims_.size(); ax-- > 0;) {
        if (ax == axis) continue;
        base += (rem % dims_[ax]) * stride_of(ax);
        rem /= dims_[ax];
      }
      double s = 0.0;
      for (std::size_t k = 0; k < extent; ++k) s += v_[base + k * stride];
      if (std::abs(s - 1.0) > tol)
        throw ValidationError("probability table axis is not normalized");
    }
  }

 private:
  static std::size_t count(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
  }

  std::size_t stride_of(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t ax = dims_.size() - 1; ax > axis; --ax) s *= dims_[ax];
    return s;
  }

  std::size_t flat(std::initializer_list<std::size_t> ix) const {
    if (ix.size() != dims_.size())
      throw DimensionError("probability table index rank mismatch");
    std::size_t f = 0, ax = 0;
    for (std::size_t i : ix) {
      if (i >= dims_[ax]) throw DimensionError("probability table index range");
      f = f * dims_[ax] + i;
      ++ax;
    }
    return f;
  }

  std::vector<std::size_t> dims_;
  std::vector<double> v_;
};

}  // namespace steering
