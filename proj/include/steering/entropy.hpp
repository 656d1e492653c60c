#pragma once

#include <cmath>
#include <vector>

#include "steering/matrix.hpp"

namespace steering {

// Extended real used by the entropy routines: either a finite double or a
// distinguished +infinity. Kept out of ordinary arithmetic on purpose; callers
// must branch on `finite` before using `value`.
struct ExtendedReal {
  double value = 0.0;
  bool finite = true;

  static ExtendedReal infinity() { return {0.0, false}; }
  static ExtendedReal of(double v) { return {v, true}; }

  ExtendedReal& operator+=(const ExtendedReal& o) {
    finite = finite && o.finite;
    value = finite ? value + o.value : 0.0;
    return *this;
  }
  ExtendedReal& operator+=(double v) {
    if (finite) value += v;
    return *this;
  }
  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) {
    return a += b;
  }
  friend ExtendedReal operator*(double c, ExtendedReal a) {
    if (a.finite) a.value *= c;
    return a;
  }
};

namespace detail {

// Eigenvalues of state-like operators: within [-1e-10, 1e-12] they are
// treated as exact zeros; below -1e-10 the operator is rejected.
inline std::vector<double> state_eigenvalues(const HermitianMatrix& h,
                                             const char* what) {
  Spectrum s = eig_hermitian(h);
  for (double& v : s.values) {
    if (v < -1e-10) throw ValidationError(std::string(what) + " is not PSD");
    if (v < 1e-12) v = 0.0;
  }
  return s.values;
}

}  // namespace detail

// Tr[rho (log rho - log sigma)] with natural logarithms, evaluated on the
// supports. Returns +infinity when rho has more than 1e-9 of weight in the
// null space of sigma. Both operators may be subnormalized (trace <= 1).
inline ExtendedReal quantum_relative_entropy(const HermitianMatrix& rho,
                                             const HermitianMatrix& sigma) {
  if (rho.dim() != sigma.dim())
    throw DimensionError("relative entropy needs equal dimensions");
  if (rho.trace() > 1.0 + 1e-9 || sigma.trace() > 1.0 + 1e-9)
    throw ValidationError("relative entropy arguments must have trace <= 1");

  Spectrum sr = eig_hermitian(rho);
  Spectrum ss = eig_hermitian(sigma);
  const std::size_t n = rho.dim();
  for (double v : sr.values)
    if (v < -1e-10) throw ValidationError("first argument is not PSD");
  for (double v : ss.values)
    if (v < -1e-10) throw ValidationError("second argument is not PSD");

  // weight of rho in each eigendirection of sigma
  std::vector<double> overlap(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += rho(i, j) * ss.vectors(j, k);
      acc += std::conj(ss.vectors(i, k)) * row;
    }
    overlap[k] = acc.real();
  }

  double null_weight = 0.0;
  double cross = 0.0;  // Tr[rho log sigma] over the support of sigma
  for (std::size_t k = 0; k < n; ++k) {
    const double mu = ss.values[k] < 1e-12 ? 0.0 : ss.values[k];
    if (mu == 0.0)
      null_weight += std::max(0.0, overlap[k]);
    else
      cross += overlap[k] * std::log(mu);
  }
  if (null_weight > 1e-9) return ExtendedReal::infinity();

  double self = 0.0;  // Tr[rho log rho]
  for (double v : sr.values) {
    const double lam = v < 1e-12 ? 0.0 : v;
    if (lam > 0.0) self += lam * std::log(lam);
  }
  return ExtendedReal::of(self - cross);
}

// Kullback-Leibler divergence with the 0 log 0 = 0 convention. +infinity as
// soon as p puts weight (> 1e-12) where q has essentially none (< 1e-15).
inline ExtendedReal classical_relative_entropy(const std::vector<double>& p,
                                               const std::vector<double>& q) {
  if (p.size() != q.size())
    throw DimensionError("distributions must have equal length");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 1e-12) continue;
    if (q[i] < 1e-15) return ExtendedReal::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return ExtendedReal::of(s);
}

}  // namespace steering
