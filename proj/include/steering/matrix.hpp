#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "steering/errors.hpp"

namespace steering {

using cplx = std::complex<double>;

// Dense complex matrix, row major. Small dimensions only (<= 32 or so);
// everything in this library is tiny and dense, so no blocking, no BLAS.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), a_(std::move(data)) {
    if (a_.size() != rows_ * cols_)
      throw DimensionError("matrix data size does not match shape");
  }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  const std::vector<cplx>& data() const { return a_; }

  CMatrix dagger() const {
    CMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  cplx trace() const {
    if (rows_ != cols_) throw DimensionError("trace of non-square matrix");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& z : a_) m = std::max(m, std::abs(z));
    return m;
  }

  CMatrix& operator+=(const CMatrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  CMatrix& operator*=(cplx z) {
    for (cplx& v : a_) v *= z;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, cplx z) { return a *= z; }
  friend CMatrix operator*(cplx z, CMatrix a) { return a *= z; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
    CMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  // A (x) B
  friend CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix c(a.rows_ * b.rows_, a.cols_ * b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j)
        for (std::size_t k = 0; k < b.rows_; ++k)
          for (std::size_t l = 0; l < b.cols_; ++l)
            c(i * b.rows_ + k, j * b.cols_ + l) = a(i, j) * b(k, l);
    return c;
  }

  double hermiticity_defect() const {
    if (rows_ != cols_) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

 private:
  void check_same_shape(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw DimensionError("matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;
};

inline cplx inner(const CMatrix& a, const CMatrix& b) {  // <A, B> = Tr[A^+ B]
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("inner product shape mismatch");
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    s += std::conj(a.data()[k]) * b.data()[k];
  return s;
}

// Square matrix that is Hermitian by construction. Raw data is accepted only
// when it is Hermitian within `kTol`; it is then symmetrized exactly so that
// downstream algebra never sees an asymmetry above roundoff.
class HermitianMatrix {
 public:
  static constexpr double kTol = 1e-12;

  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t dim) : m_(dim, dim) {}

  explicit HermitianMatrix(const CMatrix& raw, double tol = kTol) {
    if (raw.rows() != raw.cols())
      throw DimensionError("hermitian matrix must be square");
    if (raw.hermiticity_defect() > tol)
      throw ValidationError("matrix is not Hermitian within tolerance");
    m_ = symmetrize(raw);
  }

  // For matrices Hermitian by algebra (K p K^+, sums of such, ...) where the
  // defect is pure roundoff and a tolerance check would be noise.
  static HermitianMatrix symmetrized(const CMatrix& raw) {
    if (raw.rows() != raw.cols())
      throw DimensionError("hermitian matrix must be square");
    HermitianMatrix h;
    h.m_ = symmetrize(raw);
    return h;
  }

  static HermitianMatrix identity(std::size_t n) {
    return symmetrized(CMatrix::identity(n));
  }
  static HermitianMatrix zero(std::size_t n) {
    HermitianMatrix h;
    h.m_ = CMatrix(n, n);
    return h;
  }

  std::size_t dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  double frobenius() const { return m_.frobenius(); }

  void set(std::size_t i, std::size_t j, cplx v) {  // keeps the mirror entry
    m_(i, j) = v;
    m_(j, i) = std::conj(v);
    if (i == j) m_(i, i) = cplx(v.real(), 0.0);
  }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double c) {
    m_ *= cplx(c, 0.0);
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) {
    return a += b;
  }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) {
    return a -= b;
  }
  friend HermitianMatrix operator*(double c, HermitianMatrix a) { return a *= c; }
  friend HermitianMatrix operator*(HermitianMatrix a, double c) { return a *= c; }

 private:
  static CMatrix symmetrize(const CMatrix& raw) {
    CMatrix s(raw.rows(), raw.cols());
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      s(i, i) = cplx(raw(i, i).real(), 0.0);
      for (std::size_t j = i + 1; j < raw.cols(); ++j) {
        const cplx v = 0.5 * (raw(i, j) + std::conj(raw(j, i)));
        s(i, j) = v;
        s(j, i) = std::conj(v);
      }
    }
    return s;
  }

  CMatrix m_;
};

// X A X^+ squeezed through as a Hermitian result.
inline HermitianMatrix congruence(const CMatrix& x, const HermitianMatrix& a) {
  return HermitianMatrix::symmetrized(x * a.matrix() * x.dagger());
}

struct Spectrum {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // unitary, column k belongs to values[k]

  HermitianMatrix reconstruct() const {
    const std::size_t n = values.size();
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          s += values[k] * vectors(i, k) * std::conj(vectors(j, k));
        m(i, j) = s;
      }
    return HermitianMatrix::symmetrized(m);
  }

  // f applied to the eigenvalues, sandwiched back: V f(D) V^+.
  template <class F>
  HermitianMatrix apply(F&& f) const {
    Spectrum s{values, vectors};
    for (double& v : s.values) v = f(v);
    return s.reconstruct();
  }
};

// Cyclic-by-row complex Jacobi diagonalization. Each rotation zeroes one
// off-diagonal pair via a phased plane rotation; quadratic convergence makes
// a handful of sweeps enough at the dimensions used here (<= 16). Throws
// SolverFailure if the off-diagonal mass has not collapsed after `max_sweeps`.
inline Spectrum eig_hermitian(const HermitianMatrix& h, int max_sweeps = 60) {
  const std::size_t n = h.dim();
  CMatrix a = h.matrix();
  CMatrix v = CMatrix::identity(n);
  if (n == 0) return {{}, v};
  if (n == 1) return {{a(0, 0).real()}, v};

  const double scale = a.frobenius() + 1e-300;
  const double stop = 1e-15 * scale;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * std::norm(a(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off_norm() > stop; ++sweep) {
    for (std::size_t p = 0; p < n - 1; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double b = std::abs(a(p, q));
        if (b <= 1e-18 * scale) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const cplx u = a(p, q) / b;  // phase of the pivot
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * b);
        const double t = (theta >= 0.0)
                             ? -1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (-theta + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx ubar = std::conj(u);

        // column rotation: (kp, kq) <- (c kp + s u* kq, -s kp + c u* kq)
        for (std::size_t k = 0; k < n; ++k) {
          const cplx kp = a(k, p), kq = a(k, q);
          a(k, p) = c * kp + s * ubar * kq;
          a(k, q) = -s * kp + c * ubar * kq;
        }
        // matching row rotation with the conjugate phase
        for (std::size_t k = 0; k < n; ++k) {
          const cplx pk = a(p, k), qk = a(q, k);
          a(p, k) = c * pk + s * u * qk;
          a(q, k) = -s * pk + c * u * qk;
        }
        a(p, p) = app + t * b;
        a(q, q) = aqq - t * b;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const cplx kp = v(k, p), kq = v(k, q);
          v(k, p) = c * kp + s * ubar * kq;
          v(k, q) = -s * kp + c * ubar * kq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_norm() > stop)
    throw SolverFailure("jacobi eigensolver did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });
  Spectrum out;
  out.values.resize(n);
  out.vectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline double min_eigenvalue(const HermitianMatrix& h) {
  if (h.dim() == 0) return 0.0;
  return eig_hermitian(h).values.front();
}

// Clamp tiny negative eigenvalues (>= -1e-10) to zero; larger negative parts
// are a genuine input error for state-like operators, so leave them to the
// caller's validation. Eigenvalues below 1e-12 count as exact zeros.
inline HermitianMatrix psd_clamp(const Spectrum& s) {
  return s.apply([](double v) { return v < 1e-12 ? 0.0 : v; });
}

inline HermitianMatrix psd_project(const HermitianMatrix& h) {
  return eig_hermitian(h).apply([](double v) { return v < 0.0 ? 0.0 : v; });
}

}  // namespace steering
