#pragma once

#include <vector>

#include "steering/assemblage.hpp"
#include "steering/prob_table.hpp"
#include "steering/random.hpp"

namespace steering {

// Bob-side Kraus branches K_w with sum K^+ K <= 1 (equality: deterministic,
// every branch kept; strict inequality: stochastic, some weight discarded).
struct KrausSet {
  std::vector<CMatrix> ops;

  std::size_t branches() const { return ops.size(); }
  std::size_t dim_in() const { return ops.empty() ? 0 : ops.front().cols(); }
  std::size_t dim_out() const { return ops.empty() ? 0 : ops.front().rows(); }

  HermitianMatrix completeness() const {
    HermitianMatrix s = HermitianMatrix::zero(dim_in());
    for (const CMatrix& k : ops)
      s += HermitianMatrix::symmetrized(k.dagger() * k);
    return s;
  }
};

// Alice-side classical pre/post processing attached to the branch record:
// the actual input x is drawn from P(x | x_f, w) and the reported outcome
// from P(a_f | a, x, w, x_f).
struct Wiring {
  std::size_t r = 0, s = 0;    // source outcome/input counts
  std::size_t rf = 0, sf = 0;  // processed outcome/input counts
  ProbTable p_x;               // dims {branches, sf, s}, normalized over axis 2
  ProbTable p_af;              // dims {branches, sf, s, r, rf}, axis 4

  std::size_t branches() const { return p_x.dims().empty() ? 0 : p_x.dims()[0]; }
};

struct SnioMap {
  KrausSet kraus;
  Wiring wiring;
};

struct SnioDiagnostics {
  // how far above one the Kraus sum reaches (> 1e-9 is invalid)
  double completeness_excess = 0.0;
  // distance of the Kraus sum from the identity (<= 1e-9: deterministic)
  double determinism_defect = 0.0;
  bool deterministic = false;
  double wiring_normalization_residual = 0.0;
  bool ok = false;
};

inline SnioDiagnostics validate(const SnioMap& snio) {
  SnioDiagnostics d;
  if (snio.kraus.ops.empty()) throw DimensionError("empty Kraus set");
  for (const CMatrix& k : snio.kraus.ops)
    if (k.rows() != snio.kraus.dim_out() || k.cols() != snio.kraus.dim_in())
      throw DimensionError("ragged Kraus operator shapes");
  if (snio.wiring.branches() != snio.kraus.branches())
    throw DimensionError("wiring and Kraus set disagree on branch count");
  const Wiring& w = snio.wiring;
  if (w.p_x.dims() != std::vector<std::size_t>{w.branches(), w.sf, w.s} ||
      w.p_af.dims() !=
          std::vector<std::size_t>{w.branches(), w.sf, w.s, w.r, w.rf})
    throw DimensionError("wiring table shapes are inconsistent");

  const HermitianMatrix sum = snio.kraus.completeness();
  Spectrum spec = eig_hermitian(sum);
  d.completeness_excess = std::max(0.0, spec.values.back() - 1.0);
  d.determinism_defect =
      (sum - HermitianMatrix::identity(sum.dim())).frobenius();
  d.deterministic = d.determinism_defect <= 1e-9;

  double residual = 0.0;
  auto track = [&](const ProbTable& t, std::size_t axis) {
    try {
      t.check_normalized(axis, 1e-9);
    } catch (const ValidationError&) {
      residual = 1.0;  // keep the diagnostic simple: normalized or not
    }
  };
  track(w.p_x, 2);
  track(w.p_af, 4);
  d.wiring_normalization_residual = residual;

  d.ok = d.completeness_excess <= 1e-9 && residual == 0.0;
  return d;
}

inline void require_valid(const SnioMap& snio, const Assemblage& ass) {
  const SnioDiagnostics d = validate(snio);
  if (!d.ok) throw ValidationError("operation fails validation");
  if (snio.wiring.r != ass.outputs() || snio.wiring.s != ass.inputs() ||
      snio.kraus.dim_in() != ass.dim())
    throw DimensionError("operation does not match the assemblage shape");
}

inline double branch_probability(const SnioMap& snio, std::size_t omega,
                                 const Assemblage& ass) {
  require_valid(snio, ass);
  if (omega >= snio.kraus.branches())
    throw DimensionError("branch index out of range");
  return congruence(snio.kraus.ops[omega], ass.bob_marginal()).trace();
}

// One branch of the operation, unnormalized:
//   sigma_f(a_f, x_f) =
//     sum_{a,x} P(x|x_f,w) P(a_f|a,x,w,x_f) K_w sigma(a,x) K_w^+
inline Assemblage apply_branch(const SnioMap& snio, std::size_t omega,
                               const Assemblage& ass) {
  require_valid(snio, ass);
  if (omega >= snio.kraus.branches())
    throw DimensionError("branch index out of range");
  const Wiring& w = snio.wiring;
  const CMatrix& k = snio.kraus.ops[omega];
  const std::size_t df = snio.kraus.dim_out();

  // conjugate each source member once
  std::vector<HermitianMatrix> pushed;
  pushed.reserve(w.s * w.r);
  for (std::size_t x = 0; x < w.s; ++x)
    for (std::size_t a = 0; a < w.r; ++a)
      pushed.push_back(congruence(k, ass.member(a, x)));

  std::vector<HermitianMatrix> members;
  for (std::size_t xf = 0; xf < w.sf; ++xf)
    for (std::size_t af = 0; af < w.rf; ++af) {
      HermitianMatrix m = HermitianMatrix::zero(df);
      for (std::size_t x = 0; x < w.s; ++x) {
        const double px = w.p_x(omega, xf, x);
        if (px == 0.0) continue;
        for (std::size_t a = 0; a < w.r; ++a) {
          const double pw = px * w.p_af(omega, xf, x, a, af);
          if (pw > 0.0) m += pw * pushed[x * w.r + a];
        }
      }
      members.push_back(m);
    }
  return Assemblage::build(w.rf, w.sf, df, std::move(members));
}

// Full map: sum over branches. The output trace is the kept probability
// sum_w P(w) and reaches one exactly for deterministic operations.
inline Assemblage apply(const SnioMap& snio, const Assemblage& ass) {
  require_valid(snio, ass);
  const Wiring& w = snio.wiring;
  std::vector<HermitianMatrix> members(
      w.rf * w.sf, HermitianMatrix::zero(snio.kraus.dim_out()));
  for (std::size_t omega = 0; omega < snio.kraus.branches(); ++omega) {
    const Assemblage part = apply_branch(snio, omega, ass);
    for (std::size_t xf = 0; xf < w.sf; ++xf)
      for (std::size_t af = 0; af < w.rf; ++af)
        members[xf * w.rf + af] += part.member(af, xf);
  }
  return Assemblage::build(w.rf, w.sf, snio.kraus.dim_out(),
                           std::move(members));
}

// pass-through map: one identity Kraus branch, wiring forwards x and a
inline SnioMap identity_snio(std::size_t r, std::size_t s, std::size_t d) {
  SnioMap m;
  m.kraus.ops.push_back(CMatrix::identity(d));
  m.wiring.r = r;
  m.wiring.s = s;
  m.wiring.rf = r;
  m.wiring.sf = s;
  m.wiring.p_x = ProbTable({1, s, s});
  for (std::size_t x = 0; x < s; ++x) m.wiring.p_x(0, x, x) = 1.0;
  m.wiring.p_af = ProbTable({1, s, s, r, r});
  for (std::size_t xf = 0; xf < s; ++xf)
    for (std::size_t x = 0; x < s; ++x)
      for (std::size_t a = 0; a < r; ++a) m.wiring.p_af(0, xf, x, a, a) = 1.0;
  return m;
}

// Sequential composition, flattened to a single map over joint branches
// (w1, w2). The chained input distribution marginalizes the intermediate
// input; outcome tables condition on it consistently.
inline SnioMap compose(const SnioMap& second, const SnioMap& first) {
  if (second.kraus.dim_in() != first.kraus.dim_out() ||
      second.wiring.s != first.wiring.sf || second.wiring.r != first.wiring.rf)
    throw DimensionError("composition shapes do not chain");
  const std::size_t n1 = first.kraus.branches();
  const std::size_t n2 = second.kraus.branches();
  const Wiring& w1 = first.wiring;
  const Wiring& w2 = second.wiring;

  SnioMap out;
  out.wiring.r = w1.r;
  out.wiring.s = w1.s;
  out.wiring.rf = w2.rf;
  out.wiring.sf = w2.sf;
  out.wiring.p_x = ProbTable({n1 * n2, w2.sf, w1.s});
  out.wiring.p_af = ProbTable({n1 * n2, w2.sf, w1.s, w1.r, w2.rf});

  for (std::size_t o1 = 0; o1 < n1; ++o1)
    for (std::size_t o2 = 0; o2 < n2; ++o2) {
      const std::size_t o = o1 * n2 + o2;
      out.kraus.ops.push_back(second.kraus.ops[o2] * first.kraus.ops[o1]);
      for (std::size_t xff = 0; xff < w2.sf; ++xff) {
        for (std::size_t x = 0; x < w1.s; ++x) {
          double px = 0.0;
          for (std::size_t xf = 0; xf < w1.sf; ++xf)
            px += w2.p_x(o2, xff, xf) * w1.p_x(o1, xf, x);
          out.wiring.p_x(o, xff, x) = px;

          for (std::size_t a = 0; a < w1.r; ++a)
            for (std::size_t aff = 0; aff < w2.rf; ++aff) {
              double paf = 0.0;
              if (px > 0.0) {
                for (std::size_t xf = 0; xf < w1.sf; ++xf) {
                  const double pxf =
                      w2.p_x(o2, xff, xf) * w1.p_x(o1, xf, x) / px;
                  if (pxf == 0.0) continue;
                  double inner = 0.0;
                  for (std::size_t af = 0; af < w1.rf; ++af)
                    inner += w1.p_af(o1, xf, x, a, af) *
                             w2.p_af(o2, xff, xf, af, aff);
                  paf += pxf * inner;
                }
              } else {
                // unreachable conditional; any normalized choice works
                paf = 1.0 / static_cast<double>(w2.rf);
              }
              out.wiring.p_af(o, xff, x, a, aff) = paf;
            }
        }
      }
    }
  return out;
}

struct RandomSnioSpec {
  std::size_t r = 2, s = 2;    // must match the assemblages it will act on
  std::size_t rf = 2, sf = 2;
  std::size_t dim_in = 2, dim_out = 2;
  std::size_t branches = 2;
  bool deterministic = true;
};

// Kraus blocks carved from a Haar isometry (deterministic case keeps the
// exact resolution of identity; stochastic case shrinks each block).
inline SnioMap random_snio(Rng& rng, const RandomSnioSpec& spec) {
  if (spec.branches < 1 || spec.branches > 16)
    throw ValidationError("branch count must lie in [1, 16]");
  if (spec.dim_in > 8 || spec.dim_out > 8)
    throw ValidationError("dimensions above 8 are not supported here");
  if (spec.branches * spec.dim_out < spec.dim_in)
    throw DimensionError("no isometry fits these dimensions");

  SnioMap m;
  const CMatrix t =
      haar_isometry(rng, spec.branches * spec.dim_out, spec.dim_in);
  for (std::size_t w = 0; w < spec.branches; ++w) {
    CMatrix k(spec.dim_out, spec.dim_in);
    for (std::size_t i = 0; i < spec.dim_out; ++i)
      for (std::size_t j = 0; j < spec.dim_in; ++j)
        k(i, j) = t(w * spec.dim_out + i, j);
    if (!spec.deterministic) k *= cplx(rng.uniform(0.3, 0.95), 0.0);
    m.kraus.ops.push_back(std::move(k));
  }

  Wiring& w = m.wiring;
  w.r = spec.r;
  w.s = spec.s;
  w.rf = spec.rf;
  w.sf = spec.sf;
  w.p_x = ProbTable({spec.branches, spec.sf, spec.s});
  w.p_af = ProbTable({spec.branches, spec.sf, spec.s, spec.r, spec.rf});
  for (std::size_t o = 0; o < spec.branches; ++o)
    for (std::size_t xf = 0; xf < spec.sf; ++xf) {
      std::vector<double> px = rng.dirichlet(spec.s);
      for (std::size_t x = 0; x < spec.s; ++x) {
        w.p_x(o, xf, x) = px[x];
        for (std::size_t a = 0; a < spec.r; ++a) {
          std::vector<double> paf = rng.dirichlet(spec.rf);
          for (std::size_t af = 0; af < spec.rf; ++af)
            w.p_af(o, xf, x, a, af) = paf[af];
        }
      }
    }
  return m;
}

}  // namespace steering
