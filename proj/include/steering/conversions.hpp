#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "steering/assemblage.hpp"
#include "steering/lhs.hpp"
#include "steering/random.hpp"
#include "steering/snio.hpp"

namespace steering {

// moduli |<psi(a,0)|psi(a,1)>|, one entry per outcome
struct OverlapProfile {
  std::vector<double> values;
};

inline cplx state_inner(const std::vector<cplx>& u, const std::vector<cplx>& v) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * v[i];
  return acc;
}

inline OverlapProfile overlap_profile(const PureAssemblage& psi) {
  if (psi.s != 2)
    throw DimensionError("overlap profiles are defined for two inputs");
  OverlapProfile p;
  for (std::size_t a = 0; a < psi.r; ++a)
    p.values.push_back(std::abs(state_inner(psi.state(a, 0), psi.state(a, 1))));
  return p;
}

// Two-input qubit family with orthonormal members per input: the x=0 basis is
// computational, the x=1 basis is rotated by theta in the real plane. Steers
// for every theta strictly inside (0, pi/2); the endpoints collapse both
// inputs onto one basis.
inline PureAssemblage pure_orthogonal_from_angles(double theta) {
  if (!(theta > 0.0 && theta < 1.5707963267948966))
    throw ValidationError("angle must lie strictly inside (0, pi/2)");
  PureAssemblage p;
  p.r = p.s = p.d = 2;
  p.weights.assign(4, 0.5);
  const double c = std::cos(theta), s = std::sin(theta);
  p.states = {{1.0, 0.0}, {0.0, 1.0}, {c, s}, {-s, c}};
  return p;
}

namespace detail {

inline void require_pure_orthogonal_pair(const PureAssemblage& psi,
                                         const char* which) {
  if (psi.r != 2 || psi.s != 2 || psi.d != 2)
    throw DimensionError(std::string(which) +
                         ": conversion rules cover r = s = d = 2 only");
  for (std::size_t x = 0; x < 2; ++x) {
    if (std::abs(state_inner(psi.state(0, x), psi.state(1, x))) > 1e-9)
      throw ValidationError(std::string(which) +
                            ": members of one input are not orthogonal");
    const double px = psi.weight(0, x) + psi.weight(1, x);
    if (std::abs(px - 1.0) > 1e-9)
      throw ValidationError(std::string(which) + ": weights are subnormalized");
  }
}

}  // namespace detail

// Single-unitary map sending every member of psi onto the matching member of
// psi_prime. Exists exactly when the outcome weights and the overlap profiles
// agree; the two relative phases are fixed by expanding the x=1 states in the
// x=0 basis.
inline SnioMap construct_unitary_snio(const PureAssemblage& psi,
                                      const PureAssemblage& psi_prime) {
  detail::require_pure_orthogonal_pair(psi, "source");
  detail::require_pure_orthogonal_pair(psi_prime, "target");

  const cplx alpha = state_inner(psi.state(0, 0), psi.state(0, 1));
  const cplx beta = state_inner(psi.state(1, 0), psi.state(0, 1));
  const cplx alpha_p = state_inner(psi_prime.state(0, 0), psi_prime.state(0, 1));
  const cplx beta_p = state_inner(psi_prime.state(1, 0), psi_prime.state(0, 1));
  if (std::abs(std::abs(alpha) - std::abs(alpha_p)) > 1e-9)
    throw ValidationError("overlap profiles differ; no unitary can work");

  auto phase = [](cplx target, cplx source) {
    if (std::abs(source) < 1e-9 || std::abs(target) < 1e-9) return cplx(1.0);
    return (target / std::abs(target)) * std::conj(source / std::abs(source));
  };
  const cplx e0 = phase(alpha_p, alpha);
  const cplx e1 = phase(beta_p, beta);

  CMatrix u(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      u(i, j) = e0 * psi_prime.state(0, 0)[i] * std::conj(psi.state(0, 0)[j]) +
                e1 * psi_prime.state(1, 0)[i] * std::conj(psi.state(1, 0)[j]);

  // gauge: first nonzero entry of the first column made real positive
  for (std::size_t i = 0; i < 2; ++i) {
    if (std::abs(u(i, 0)) > 1e-9) {
      u *= std::conj(u(i, 0)) / std::abs(u(i, 0));
      break;
    }
  }

  SnioMap m = identity_snio(2, 2, 2);
  m.kraus.ops[0] = u;

  const Assemblage mapped = apply(m, psi.to_assemblage());
  const Assemblage want = psi_prime.to_assemblage();
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a)
      if ((mapped.member(a, x) - want.member(a, x)).frobenius() > 1e-8)
        throw Error("internal: unitary construction failed its residual check");
  return m;
}

// Deterministic measure-and-prepare map that discards the input and emits the
// model's assemblage: Bob measures a fixed basis and prepares eigenvector
// pieces of the model states; the wiring pins x = 0 and answers from the
// model's response tables.
inline SnioMap preparation_snio(const LhsModel& model, std::size_t src_r,
                                std::size_t src_s, std::size_t src_d) {
  model.validate();
  SnioMap m;
  std::vector<std::size_t> branch_lambda;
  for (std::size_t l = 0; l < model.prior.size(); ++l) {
    Spectrum spec = eig_hermitian(model.states[l]);
    double qsum = 0.0;
    for (double& q : spec.values) {
      q = std::max(q, 0.0);
      qsum += q;
    }
    if (qsum <= 0.0 || model.prior[l] <= 0.0) continue;
    for (std::size_t j = 0; j < model.d; ++j) {
      const double q = spec.values[j] / qsum;
      if (q < 1e-14) continue;
      for (std::size_t i = 0; i < src_d; ++i) {
        CMatrix k(model.d, src_d);
        const double amp = std::sqrt(model.prior[l] * q);
        for (std::size_t row = 0; row < model.d; ++row)
          k(row, i) = amp * spec.vectors(row, j);
        m.kraus.ops.push_back(std::move(k));
        branch_lambda.push_back(l);
      }
    }
  }
  if (m.kraus.ops.empty())
    throw ValidationError("model carries no weight to prepare");

  const std::size_t n = m.kraus.ops.size();
  Wiring& w = m.wiring;
  w.r = src_r;
  w.s = src_s;
  w.rf = model.r;
  w.sf = model.s;
  w.p_x = ProbTable({n, w.sf, w.s});
  w.p_af = ProbTable({n, w.sf, w.s, w.r, w.rf});
  for (std::size_t om = 0; om < n; ++om) {
    const ProbTable& resp = model.response[branch_lambda[om]];
    for (std::size_t xf = 0; xf < w.sf; ++xf) {
      w.p_x(om, xf, 0) = 1.0;
      for (std::size_t x = 0; x < w.s; ++x)
        for (std::size_t a = 0; a < w.r; ++a)
          for (std::size_t af = 0; af < w.rf; ++af)
            w.p_af(om, xf, x, a, af) = resp(xf, af);
    }
  }
  return m;
}

struct ConversionResult {
  bool convertible = false;
  std::string reason;
  std::optional<SnioMap> witness;
};

// Decision procedure for minimal pure orthogonal assemblages: the target is
// reachable iff it is unsteerable (prepare it from scratch) or it shares the
// outcome weights and overlap profile with the source (rotate onto it).
// Positive verdicts carry a verified witness map.
inline ConversionResult can_convert(const PureAssemblage& psi,
                                    const PureAssemblage& psi_prime) {
  detail::require_pure_orthogonal_pair(psi, "source");
  detail::require_pure_orthogonal_pair(psi_prime, "target");

  const Assemblage source = psi.to_assemblage();
  const Assemblage target = psi_prime.to_assemblage();

  const LhsMembership membership = is_lhs(target);
  if (membership.is_member) {
    const LhsModel model = model_from_witness(target, membership.witness);
    SnioMap witness = preparation_snio(model, 2, 2, 2);
    const Assemblage mapped = apply(witness, source);
    double resid = 0.0;
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t a = 0; a < 2; ++a)
        resid = std::max(
            resid, (mapped.member(a, x) - target.member(a, x)).frobenius());
    if (resid > 1e-8)
      throw Error("internal: preparation witness missed the target");
    return {true, "target is unsteerable and can be prepared outright",
            std::move(witness)};
  }

  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a)
      if (std::abs(psi.weight(a, x) - psi_prime.weight(a, x)) > 1e-9)
        return {false, "outcome weights differ and the target steers",
                std::nullopt};
  const OverlapProfile p1 = overlap_profile(psi);
  const OverlapProfile p2 = overlap_profile(psi_prime);
  for (std::size_t a = 0; a < 2; ++a)
    if (std::abs(p1.values[a] - p2.values[a]) > 1e-9)
      return {false, "overlap profiles differ and the target steers",
              std::nullopt};

  return {true, "weights and overlaps match; a unitary rotation works",
          construct_unitary_snio(psi, psi_prime)};
}

// ---------------------------------------------------------------------------
// Exploratory search for a universal source assemblage
// ---------------------------------------------------------------------------

struct BitSearchOptions {
  std::size_t restarts = 64;
  std::size_t iters = 300;
  std::uint64_t seed = 11;
};

namespace detail {

// pack/unpack a single-branch map for local search: 8 reals for the Kraus
// operator, 2 rows for the input table, 8 rows for the outcome table
struct BitSearchPoint {
  CMatrix k{2, 2};
  double px[2][2];        // [xf][x]
  double paf[2][2][2][2]; // [xf][x][a][af]

  SnioMap to_map() const {
    SnioMap m;
    CMatrix op = k;
    // shrink into the contraction ball so the branch stays physical
    const double top = eig_hermitian(
                           HermitianMatrix::symmetrized(op.dagger() * op))
                           .values.back();
    if (top > 1.0) op *= cplx(1.0 / std::sqrt(top), 0.0);
    m.kraus.ops.push_back(std::move(op));
    Wiring& w = m.wiring;
    w.r = w.s = w.rf = w.sf = 2;
    w.p_x = ProbTable({1, 2, 2});
    w.p_af = ProbTable({1, 2, 2, 2, 2});
    for (std::size_t xf = 0; xf < 2; ++xf)
      for (std::size_t x = 0; x < 2; ++x) {
        w.p_x(0, xf, x) = px[xf][x];
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t af = 0; af < 2; ++af)
            w.p_af(0, xf, x, a, af) = paf[xf][x][a][af];
      }
    return m;
  }

  void project_rows() {
    auto fix2 = [](double* row) {
      row[0] = std::max(row[0], 0.0);
      row[1] = std::max(row[1], 0.0);
      const double s = row[0] + row[1];
      if (s < 1e-12) {
        row[0] = row[1] = 0.5;
      } else {
        row[0] /= s;
        row[1] /= s;
      }
    };
    for (auto& row : px) fix2(row);
    for (auto& l1 : paf)
      for (auto& l2 : l1)
        for (auto& row : l2) fix2(row);
  }
};

inline double bit_search_residual(const BitSearchPoint& pt,
                                  const Assemblage& candidate,
                                  const Assemblage& target) {
  const SnioMap m = pt.to_map();
  const double p = branch_probability(m, 0, candidate);
  if (p < 1e-9) return 10.0;
  const Assemblage mapped = apply_branch(m, 0, candidate);
  double resid = 0.0;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a)
      resid = std::max(resid, (mapped.member(a, x) * (1.0 / p) -
                               target.member(a, x))
                                  .frobenius());
  return resid;
}

}  // namespace detail

// Best-effort search for a single stochastic branch mapping the candidate
// onto each listed target angle. Small residuals certify convertibility of
// that instance; large residuals are only evidence, not proof, of
// impossibility.
inline std::vector<double> steering_bit_search(const PureAssemblage& candidate,
                                               const std::vector<double>& thetas,
                                               const BitSearchOptions& opts = {}) {
  if (candidate.r != 2 || candidate.s != 2 || candidate.d != 2)
    throw DimensionError("search space covers r = s = d = 2 only");
  const Assemblage cand = candidate.to_assemblage();
  std::vector<double> out;

  for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
    const Assemblage target =
        pure_orthogonal_from_angles(thetas[ti]).to_assemblage();
    double best = std::numeric_limits<double>::infinity();

    for (std::size_t k = 0; k < opts.restarts; ++k) {
      Rng rng = trial_rng(opts.seed + ti, 0x4249545345415243ull, k);
      detail::BitSearchPoint pt;
      if (k == 0) {
        // pass-through seed: identity operator, aligned wiring
        pt.k = CMatrix::identity(2);
        for (std::size_t xf = 0; xf < 2; ++xf)
          for (std::size_t x = 0; x < 2; ++x) {
            pt.px[xf][x] = xf == x ? 1.0 : 0.0;
            for (std::size_t a = 0; a < 2; ++a)
              for (std::size_t af = 0; af < 2; ++af)
                pt.paf[xf][x][a][af] = a == af ? 1.0 : 0.0;
          }
      } else {
        pt.k = ginibre(rng, 2, 2);
        pt.k *= cplx(0.7, 0.0);
        for (auto& row : pt.px) {
          const auto v = rng.dirichlet(2);
          row[0] = v[0];
          row[1] = v[1];
        }
        for (auto& l1 : pt.paf)
          for (auto& l2 : l1)
            for (auto& row : l2) {
              const auto v = rng.dirichlet(2);
              row[0] = v[0];
              row[1] = v[1];
            }
        pt.project_rows();
      }

      double cur = detail::bit_search_residual(pt, cand, target);
      double sigma = 0.25;
      for (std::size_t it = 0; it < opts.iters && cur > 1e-9; ++it) {
        detail::BitSearchPoint trial = pt;
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t j = 0; j < 2; ++j)
            trial.k(i, j) += sigma * rng.cnormal();
        for (auto& row : trial.px)
          for (double& v : row) v += 0.5 * sigma * rng.normal();
        for (auto& l1 : trial.paf)
          for (auto& l2 : l1)
            for (auto& row : l2)
              for (double& v : row) v += 0.5 * sigma * rng.normal();
        trial.project_rows();
        const double tv = detail::bit_search_residual(trial, cand, target);
        if (tv < cur) {
          pt = trial;
          cur = tv;
          sigma = std::min(sigma * 1.15, 0.5);
        } else {
          sigma *= 0.96;
          if (sigma < 1e-6) break;
        }
      }
      best = std::min(best, cur);
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace steering
