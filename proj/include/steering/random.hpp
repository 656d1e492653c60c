#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "steering/matrix.hpp"
#include "steering/prob_table.hpp"

namespace steering {

// Deterministic random source. mt19937_64 output and the derivations below
// are fully specified, so a seed reproduces the same stream on any platform
// (the std <random> distributions are not portable, hence the hand-rolled
// uniform/normal transforms).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}

  std::uint64_t bits() { return g_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(g_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t integer(std::size_t n) {  // [0, n), unbiased
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
      v = g_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

  double normal() {
    // Box-Muller; u strictly positive so the log is finite
    const double u = (static_cast<double>(g_() >> 11) + 1.0) * 0x1.0p-53;
    const double t = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * t);
  }

  cplx cnormal() { return {normal(), normal()}; }

  // flat Dirichlet via normalized exponentials
  std::vector<double> dirichlet(std::size_t n) {
    std::vector<double> p(n);
    double s = 0.0;
    for (double& v : p) {
      v = -std::log(1.0 - uniform());
      s += v;
    }
    for (double& v : p) v /= s;
    return p;
  }

  // independent child stream; splitmix finalizer decorrelates nearby keys
  Rng fork(std::uint64_t key) {
    std::uint64_t z = g_() + key * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 g_;
};

// Stateless per-trial stream: suites derive one Rng per (seed, suite, trial)
// so results do not depend on scheduling or trial count.
inline Rng trial_rng(std::uint64_t seed, std::uint64_t suite_tag,
                     std::uint64_t trial) {
  std::uint64_t z = seed ^ (suite_tag * 0x9e3779b97f4a7c15ull) ^
                    (trial + 0x632be59bd9b4e019ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return Rng(z ^ (z >> 31));
}

inline CMatrix ginibre(Rng& rng, std::size_t rows, std::size_t cols) {
  CMatrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) g(i, j) = rng.cnormal();
  return g;
}

// Haar isometry: QR of a Ginibre block with the R diagonal phased positive.
// cols == rows gives a Haar unitary.
inline CMatrix haar_isometry(Rng& rng, std::size_t rows, std::size_t cols) {
  if (cols > rows) throw DimensionError("isometry needs rows >= cols");
  CMatrix g = ginibre(rng, rows, cols);
  // modified Gram-Schmidt, twice for orthogonality at working precision
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t k = 0; k < j; ++k) {
        cplx d = 0.0;
        for (std::size_t i = 0; i < rows; ++i)
          d += std::conj(g(i, k)) * g(i, j);
        for (std::size_t i = 0; i < rows; ++i) g(i, j) -= d * g(i, k);
      }
      double nrm = 0.0;
      for (std::size_t i = 0; i < rows; ++i) nrm += std::norm(g(i, j));
      nrm = std::sqrt(nrm);
      for (std::size_t i = 0; i < rows; ++i) g(i, j) *= 1.0 / nrm;
    }
  }
  return g;
}

inline CMatrix haar_unitary(Rng& rng, std::size_t d) {
  return haar_isometry(rng, d, d);
}

inline std::vector<cplx> haar_pure(Rng& rng, std::size_t d) {
  std::vector<cplx> v(d);
  double nrm = 0.0;
  for (cplx& z : v) {
    z = rng.cnormal();
    nrm += std::norm(z);
  }
  nrm = std::sqrt(nrm);
  for (cplx& z : v) z *= 1.0 / nrm;
  return v;
}

inline HermitianMatrix projector(const std::vector<cplx>& v) {
  CMatrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return HermitianMatrix::symmetrized(m);
}

inline HermitianMatrix random_density(Rng& rng, std::size_t d) {
  CMatrix g = ginibre(rng, d, d);
  HermitianMatrix rho = HermitianMatrix::symmetrized(g * g.dagger());
  return rho *= 1.0 / rho.trace();
}

// POVM with n outcomes: Ginibre squares renormalized through S^{-1/2}.
inline std::vector<HermitianMatrix> random_povm(Rng& rng, std::size_t d,
                                                std::size_t n) {
  std::vector<HermitianMatrix> e;
  HermitianMatrix s = HermitianMatrix::zero(d);
  for (std::size_t k = 0; k < n; ++k) {
    CMatrix g = ginibre(rng, d, d);
    e.push_back(HermitianMatrix::symmetrized(g * g.dagger()));
    s += e.back();
  }
  const HermitianMatrix isq =
      eig_hermitian(s).apply([](double v) { return 1.0 / std::sqrt(v); });
  for (HermitianMatrix& m : e) m = congruence(isq.matrix(), m);
  return e;
}

// projective qubit-style measurement from a Haar basis
inline std::vector<HermitianMatrix> random_projective(Rng& rng, std::size_t d) {
  CMatrix u = haar_unitary(rng, d);
  std::vector<HermitianMatrix> e;
  for (std::size_t a = 0; a < d; ++a) {
    std::vector<cplx> col(d);
    for (std::size_t i = 0; i < d; ++i) col[i] = u(i, a);
    e.push_back(projector(col));
  }
  return e;
}

}  // namespace steering
