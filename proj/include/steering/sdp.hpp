#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "steering/matrix.hpp"

namespace steering {

// Conic programs over a tuple of Hermitian PSD variable blocks w_l:
//
//   optimize   sum_l <C_l, w_l>
//   subject to sum_l coeff_l w_l  {<=, >=, ==}  B   (matrix constraints)
//              sum_l <G_l, w_l>   {<=, >=, ==}  g   (scalar constraints)
//              w_l >= 0
//
// Solved by Douglas-Rachford splitting on the homogeneous self-dual
// embedding: each iteration solves a fixed linear system (factored once) and
// projects onto the cones, with over-relaxation. Small and dense on purpose;
// the programs in this library have a few dozen real unknowns.

enum class Relation { le, ge, eq };

struct MatrixConstraint {
  std::vector<double> coeff;  // one real coefficient per block
  Relation rel = Relation::le;
  HermitianMatrix rhs;
};

struct ScalarConstraint {
  std::vector<HermitianMatrix> coeff;  // <coeff_l, w_l> summed over blocks
  Relation rel = Relation::eq;
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<std::size_t> block_dims;
  std::vector<HermitianMatrix> objective;  // empty means feasibility (0)
  bool maximize = false;
  std::vector<MatrixConstraint> matrix_constraints;
  std::vector<ScalarConstraint> scalar_constraints;
};

struct SdpOptions {
  double eps = 1e-8;          // residual and gap target
  int max_iter = 50000;
  double infeas_tol = 1e-6;   // certificate quality needed to report infeasible
  double alpha = 1.6;         // over-relaxation
  int check_every = 25;
  std::string trace_csv;      // per-check iteration log when non-empty
};

enum class SdpStatus { optimal, infeasible, solver_failure };

struct SdpSolution {
  SdpStatus status = SdpStatus::solver_failure;
  std::vector<HermitianMatrix> blocks;  // PSD; meaningful when optimal
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;
};

namespace detail {

// Isometry between Hermitian matrices with the Frobenius inner product and
// R^(d^2): diagonal entries, then sqrt(2)-scaled real/imag off-diagonals.
inline std::size_t svec_dim(std::size_t d) { return d * d; }

inline void svec(const HermitianMatrix& h, double* out) {
  const std::size_t d = h.dim();
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) out[k++] = h(i, i).real();
  const double rt2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      out[k++] = rt2 * h(i, j).real();
      out[k++] = rt2 * h(i, j).imag();
    }
}

inline HermitianMatrix unsvec(const double* in, std::size_t d) {
  HermitianMatrix h(d);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) h.set(i, i, in[k++]);
  const double irt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double re = in[k++] * irt2;
      const double im = in[k++] * irt2;
      h.set(i, j, cplx(re, im));
    }
  return h;
}

// PLU factorization with partial pivoting for the (I + Q) solve.
class LuSolver {
 public:
  explicit LuSolver(std::vector<double> a, std::size_t n)
      : n_(n), a_(std::move(a)), piv_(n) {
    for (std::size_t i = 0; i < n_; ++i) piv_[i] = i;
    for (std::size_t col = 0; col < n_; ++col) {
      std::size_t pivot = col;
      double best = std::abs(at(col, col));
      for (std::size_t row = col + 1; row < n_; ++row)
        if (std::abs(at(row, col)) > best) {
          best = std::abs(at(row, col));
          pivot = row;
        }
      if (best == 0.0) throw SolverFailure("singular linear system");
      if (pivot != col) {
        std::swap(piv_[pivot], piv_[col]);
        for (std::size_t j = 0; j < n_; ++j)
          std::swap(at(pivot, j), at(col, j));
      }
      const double inv = 1.0 / at(col, col);
      for (std::size_t row = col + 1; row < n_; ++row) {
        const double f = at(row, col) * inv;
        at(row, col) = f;
        if (f == 0.0) continue;
        for (std::size_t j = col + 1; j < n_; ++j) at(row, j) -= f * at(col, j);
      }
    }
  }

  void solve(const double* rhs, double* out) const {
    for (std::size_t i = 0; i < n_; ++i) out[i] = rhs[piv_[i]];
    for (std::size_t i = 1; i < n_; ++i) {
      double s = out[i];
      for (std::size_t j = 0; j < i; ++j) s -= at(i, j) * out[j];
      out[i] = s;
    }
    for (std::size_t i = n_; i-- > 0;) {
      double s = out[i];
      for (std::size_t j = i + 1; j < n_; ++j) s -= at(i, j) * out[j];
      out[i] = s / at(i, i);
    }
  }

 private:
  double& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  std::size_t n_;
  std::vector<double> a_;
  std::vector<std::size_t> piv_;
};

struct ConeLayout {
  std::size_t zero = 0;                 // leading equality rows
  std::size_t nonneg = 0;               // then nonnegative rows
  std::vector<std::size_t> psd_dims;    // then svec'd PSD blocks
  std::size_t total() const {
    std::size_t m = zero + nonneg;
    for (std::size_t d : psd_dims) m += svec_dim(d);
    return m;
  }
};

// project s onto K = {0}^zero x R+^nonneg x PSD x ... (dual = true projects
// onto K*, whose zero-cone part is free)
inline void project_cone(const ConeLayout& k, std::vector<double>& s,
                         bool dual) {
  std::size_t off = 0;
  if (!dual)
    for (; off < k.zero; ++off) s[off] = 0.0;
  else
    off = k.zero;
  for (std::size_t i = 0; i < k.nonneg; ++i, ++off)
    if (s[off] < 0.0) s[off] = 0.0;
  for (std::size_t d : k.psd_dims) {
    HermitianMatrix h = unsvec(&s[off], d);
    svec(psd_project(h), &s[off]);
    off += svec_dim(d);
  }
}

inline double dist_to_cone(const ConeLayout& k, std::vector<double> s) {
  std::vector<double> p = s;
  project_cone(k, p, false);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dlt = p[i] - s[i];
    acc += dlt * dlt;
  }
  return std::sqrt(acc);
}

}  // namespace detail

inline SdpSolution solve(const SdpProblem& prob, const SdpOptions& opt = {}) {
  using namespace detail;

  const std::size_t nblocks = prob.block_dims.size();
  if (nblocks == 0) throw DimensionError("problem has no variable blocks");

  std::vector<std::size_t> offset(nblocks + 1, 0);
  for (std::size_t l = 0; l < nblocks; ++l)
    offset[l + 1] = offset[l] + svec_dim(prob.block_dims[l]);
  const std::size_t n = offset[nblocks];

  // objective, negated internally so we always minimize
  std::vector<double> c(n, 0.0);
  if (!prob.objective.empty()) {
    if (prob.objective.size() != nblocks)
      throw DimensionError("objective needs one matrix per block");
    for (std::size_t l = 0; l < nblocks; ++l) {
      if (prob.objective[l].dim() != prob.block_dims[l])
        throw DimensionError("objective block dimension mismatch");
      svec(prob.objective[l], &c[offset[l]]);
    }
    if (prob.maximize)
      for (double& v : c) v = -v;
  }

  ConeLayout cone;
  for (const ScalarConstraint& sc : prob.scalar_constraints)
    if (sc.rel == Relation::eq) ++cone.zero;
  for (const MatrixConstraint& mc : prob.matrix_constraints)
    if (mc.rel == Relation::eq) cone.zero += svec_dim(mc.rhs.dim());
  for (const ScalarConstraint& sc : prob.scalar_constraints)
    if (sc.rel != Relation::eq) ++cone.nonneg;
  for (const MatrixConstraint& mc : prob.matrix_constraints)
    if (mc.rel != Relation::eq) cone.psd_dims.push_back(mc.rhs.dim());
  for (std::size_t l = 0; l < nblocks; ++l)
    cone.psd_dims.push_back(prob.block_dims[l]);  // w_l itself PSD
  const std::size_t m = cone.total();

  // A x + s = b rows, laid out in cone order
  std::vector<double> A(m * n, 0.0), b(m, 0.0);
  std::size_t row = 0;
  auto add_scalar = [&](const ScalarConstraint& sc, double sign) {
    if (sc.coeff.size() != nblocks)
      throw DimensionError("scalar constraint needs one matrix per block");
    std::vector<double> g;
    for (std::size_t l = 0; l < nblocks; ++l) {
      if (sc.coeff[l].dim() != prob.block_dims[l])
        throw DimensionError("scalar constraint block dimension mismatch");
      g.resize(svec_dim(prob.block_dims[l]));
      svec(sc.coeff[l], g.data());
      for (std::size_t k = 0; k < g.size(); ++k)
        A[row * n + offset[l] + k] = sign * g[k];
    }
    b[row] = sign * sc.rhs;
    ++row;
  };
  auto add_matrix = [&](const MatrixConstraint& mc, double sign) {
    if (mc.coeff.size() != nblocks)
      throw DimensionError("matrix constraint needs one coefficient per block");
    const std::size_t d = mc.rhs.dim();
    const std::size_t kdim = svec_dim(d);
    for (std::size_t l = 0; l < nblocks; ++l) {
      if (mc.coeff[l] == 0.0) continue;
      if (prob.block_dims[l] != d)
        throw DimensionError("matrix constraint dimension mismatch");
      for (std::size_t k = 0; k < kdim; ++k)
        A[(row + k) * n + offset[l] + k] = sign * mc.coeff[l];
    }
    std::vector<double> rb(kdim);
    svec(mc.rhs, rb.data());
    for (std::size_t k = 0; k < kdim; ++k) b[row + k] = sign * rb[k];
    row += kdim;
  };

  for (const ScalarConstraint& sc : prob.scalar_constraints)
    if (sc.rel == Relation::eq) add_scalar(sc, 1.0);
  for (const MatrixConstraint& mc : prob.matrix_constraints)
    if (mc.rel == Relation::eq) add_matrix(mc, 1.0);
  for (const ScalarConstraint& sc : prob.scalar_constraints)
    if (sc.rel != Relation::eq) add_scalar(sc, sc.rel == Relation::le ? 1.0 : -1.0);
  for (const MatrixConstraint& mc : prob.matrix_constraints)
    if (mc.rel != Relation::eq) add_matrix(mc, mc.rel == Relation::le ? 1.0 : -1.0);
  for (std::size_t l = 0; l < nblocks; ++l) {  // -w_l + s = 0, s PSD
    for (std::size_t k = 0; k < svec_dim(prob.block_dims[l]); ++k)
      A[(row + k) * n + offset[l] + k] = -1.0;
    row += svec_dim(prob.block_dims[l]);
  }

  // homogeneous embedding operator I + Q, factored once
  const std::size_t N = n + m + 1;
  std::vector<double> iq(N * N, 0.0);
  for (std::size_t i = 0; i < N; ++i) iq[i * N + i] = 1.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      iq[(n + i) * N + j] -= A[i * n + j];      // -A
      iq[j * N + (n + i)] += A[i * n + j];      // A^T
    }
  for (std::size_t j = 0; j < n; ++j) {
    iq[j * N + (n + m)] += c[j];
    iq[(n + m) * N + j] -= c[j];
  }
  for (std::size_t i = 0; i < m; ++i) {
    iq[(n + i) * N + (n + m)] += b[i];
    iq[(n + m) * N + (n + i)] -= b[i];
  }
  LuSolver lu(std::move(iq), N);

  const double bnorm = [&] {
    double sq = 0.0;
    for (double v : b) sq += v * v;
    return std::sqrt(sq);
  }();
  const double cnorm = [&] {
    double sq = 0.0;
    for (double v : c) sq += v * v;
    return std::sqrt(sq);
  }();

  auto matvec_A = [&](const std::vector<double>& x, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      const double* arow = &A[i * n];
      for (std::size_t j = 0; j < n; ++j) s += arow[j] * x[j];
      out[i] = s;
    }
  };
  auto matvec_At = [&](const std::vector<double>& y, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double yi = y[i];
      if (yi == 0.0) continue;
      const double* arow = &A[i * n];
      for (std::size_t j = 0; j < n; ++j) out[j] += arow[j] * yi;
    }
  };

  std::vector<double> u(N, 0.0), v(N, 0.0), w(N), ut(N);
  u[N - 1] = 1.0;
  v[N - 1] = 1.0;

  std::ofstream trace;
  if (!opt.trace_csv.empty()) {
    trace.open(opt.trace_csv);
    trace << "iter,objective,primal_residual,dual_residual,gap\n";
  }

  SdpSolution best;
  double best_score = std::numeric_limits<double>::infinity();
  const double user_sign = prob.maximize ? -1.0 : 1.0;
  // the trace objective column reports the incumbent (best value seen so
  // far), so it improves monotonically; residuals stay per-check raw values
  double incumbent = prob.maximize ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity();

  std::vector<double> xhat(n), yhat(m), shat(m), ax(m), aty(n);

  auto extract_blocks = [&](const std::vector<double>& xs) {
    std::vector<HermitianMatrix> blocks;
    for (std::size_t l = 0; l < nblocks; ++l)
      blocks.push_back(
          psd_project(unsvec(&xs[offset[l]], prob.block_dims[l])));
    return blocks;
  };

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    for (std::size_t i = 0; i < N; ++i) w[i] = u[i] + v[i];
    lu.solve(w.data(), ut.data());
    // over-relaxed reflection, then cone projection of u
    for (std::size_t i = 0; i < N; ++i)
      w[i] = opt.alpha * ut[i] + (1.0 - opt.alpha) * u[i];
    for (std::size_t i = 0; i < N; ++i) u[i] = w[i] - v[i];
    {  // u = (x free, y in K*, tau >= 0)
      std::vector<double> ypart(u.begin() + n, u.begin() + n + m);
      project_cone(cone, ypart, true);
      std::copy(ypart.begin(), ypart.end(), u.begin() + n);
      if (u[N - 1] < 0.0) u[N - 1] = 0.0;
    }
    for (std::size_t i = 0; i < N; ++i) v[i] += u[i] - w[i];

    if ((iter + 1) % opt.check_every != 0) continue;

    const double tau = u[N - 1];
    const double kappa = v[N - 1];

    if (tau > 1e-14) {
      const double inv_tau = 1.0 / tau;
      for (std::size_t j = 0; j < n; ++j) xhat[j] = u[j] * inv_tau;
      for (std::size_t i = 0; i < m; ++i) yhat[i] = u[n + i] * inv_tau;

      // polish: snap variable blocks to the PSD cone, then measure the
      // residuals of the polished point (what the caller will receive)
      std::vector<HermitianMatrix> blocks = extract_blocks(xhat);
      std::vector<double> xpol(n);
      for (std::size_t l = 0; l < nblocks; ++l)
        svec(blocks[l], &xpol[offset[l]]);

      matvec_A(xpol, ax);
      for (std::size_t i = 0; i < m; ++i) shat[i] = b[i] - ax[i];
      const double pres =
          dist_to_cone(cone, shat) / (1.0 + bnorm);

      matvec_At(yhat, aty);
      double dres_sq = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double rj = aty[j] + c[j];
        dres_sq += rj * rj;
      }
      // the variable-PSD rows make A^T y + c = 0 exact only modulo the dual
      // slack living on those rows; they are part of y, so no extra term
      const double dres = std::sqrt(dres_sq) / (1.0 + cnorm);

      double cx = 0.0, by = 0.0;
      for (std::size_t j = 0; j < n; ++j) cx += c[j] * xpol[j];
      for (std::size_t i = 0; i < m; ++i) by += b[i] * yhat[i];
      const double gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));

      if (trace.is_open()) {
        incumbent = prob.maximize ? std::max(incumbent, user_sign * cx)
                                  : std::min(incumbent, user_sign * cx);
        trace << (iter + 1) << ',' << incumbent << ',' << pres << ','
              << dres << ',' << gap << '\n';
      }

      const double score = std::max({pres, dres, gap});
      if (score < best_score) {
        best_score = score;
        best.blocks = std::move(blocks);
        best.objective = user_sign * cx;
        best.primal_residual = pres;
        best.dual_residual = dres;
        best.gap = gap;
        best.iterations = iter + 1;
      }

      if (pres <= opt.eps && dres <= opt.eps && gap <= opt.eps) {
        best.status = SdpStatus::optimal;
        best.message = "converged";
        return best;
      }
    }

    // certificates: tau collapsing while kappa stays positive
    if (kappa > 1e-12 || tau <= 1e-14) {
      double by = 0.0;
      for (std::size_t i = 0; i < m; ++i) by += b[i] * u[n + i];
      if (by < -1e-14) {
        std::vector<double> yc(m);
        for (std::size_t i = 0; i < m; ++i) yc[i] = u[n + i] / (-by);
        matvec_At(yc, aty);
        double nrm = 0.0;
        for (std::size_t j = 0; j < n; ++j) nrm += aty[j] * aty[j];
        if (std::sqrt(nrm) <= opt.infeas_tol) {
          best.status = SdpStatus::infeasible;
          best.message = "primal infeasibility certificate";
          best.iterations = iter + 1;
          return best;
        }
      }
      double cx = 0.0;
      for (std::size_t j = 0; j < n; ++j) cx += c[j] * u[j];
      if (cx < -1e-14) {
        std::vector<double> xc(n);
        for (std::size_t j = 0; j < n; ++j) xc[j] = u[j] / (-cx);
        matvec_A(xc, ax);
        for (std::size_t i = 0; i < m; ++i) ax[i] = -ax[i];
        if (dist_to_cone(cone, ax) <= opt.infeas_tol) {
          best.status = SdpStatus::solver_failure;
          best.message = "objective unbounded (dual infeasibility certificate)";
          best.iterations = iter + 1;
          return best;
        }
      }
    }
  }

  best.status = SdpStatus::solver_failure;
  best.iterations = iter;
  {
    std::ostringstream msg;
    msg << "iteration limit: residuals " << best.primal_residual << "/"
        << best.dual_residual << "/" << best.gap << " above eps " << opt.eps;
    best.message = msg.str();
  }
  return best;
}

}  // namespace steering
