#pragma once

#include <optional>
#include <vector>

#include "steering/assemblage.hpp"
#include "steering/prob_table.hpp"
#include "steering/random.hpp"
#include "steering/sdp.hpp"

namespace steering {

// Deterministic classical strategy: a fixed outcome for every input.
struct DeterministicStrategy {
  std::vector<std::size_t> response;  // response[x] < r

  double d(std::size_t a, std::size_t x) const {
    return response[x] == a ? 1.0 : 0.0;
  }
};

// All r^s response tuples in lexicographic order (x = 0 most significant).
// Capped to keep the downstream programs small.
inline std::vector<DeterministicStrategy> enumerate_deterministic_strategies(
    std::size_t r, std::size_t s) {
  double total = 1.0;
  for (std::size_t x = 0; x < s; ++x) total *= static_cast<double>(r);
  if (total > 1e6)
    throw ValidationError("deterministic strategy count exceeds 10^6");
  const std::size_t count = static_cast<std::size_t>(total);

  std::vector<DeterministicStrategy> out;
  out.reserve(count);
  std::vector<std::size_t> resp(s, 0);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({resp});
    for (std::size_t x = s; x-- > 0;) {
      if (++resp[x] < r) break;
      resp[x] = 0;
    }
  }
  return out;
}

// Local model: hidden variable lambda with prior p, a response table
// P(a|x,lambda) and a hidden state xi(lambda) for Bob.
struct LhsModel {
  std::size_t r = 0, s = 0, d = 0;
  std::vector<double> prior;               // P(lambda)
  std::vector<ProbTable> response;         // per lambda, dims {s, r}, axis 1
  std::vector<HermitianMatrix> states;     // xi(lambda), unit trace

  void validate() const {
    if (prior.size() != response.size() || prior.size() != states.size())
      throw DimensionError("model components disagree on lambda count");
    double total = 0.0;
    for (double p : prior) {
      if (p < -1e-12) throw ValidationError("negative prior weight");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ValidationError("prior is not normalized");
    for (const ProbTable& t : response) {
      if (t.dims() != std::vector<std::size_t>{s, r})
        throw DimensionError("response table has wrong shape");
      t.check_normalized(1);
    }
    for (const HermitianMatrix& xi : states) {
      if (xi.dim() != d) throw DimensionError("hidden state dimension");
      if (min_eigenvalue(xi) < Assemblage::kPsdFloor)
        throw ValidationError("hidden state is not PSD");
      if (std::abs(xi.trace() - 1.0) > 1e-9)
        throw ValidationError("hidden state is not normalized");
    }
  }
};

// sigma(a,x) = sum_lambda P(lambda) P(a|x,lambda) xi(lambda)
inline Assemblage assemble_from_model(const LhsModel& model) {
  model.validate();
  std::vector<HermitianMatrix> members;
  for (std::size_t x = 0; x < model.s; ++x)
    for (std::size_t a = 0; a < model.r; ++a) {
      HermitianMatrix m = HermitianMatrix::zero(model.d);
      for (std::size_t l = 0; l < model.prior.size(); ++l) {
        const double w = model.prior[l] * model.response[l](x, a);
        if (w > 0.0) m += w * model.states[l];
      }
      members.push_back(m);
    }
  return Assemblage::build(model.r, model.s, model.d, std::move(members));
}

inline LhsModel random_lhs_model(Rng& rng, std::size_t r, std::size_t s,
                                 std::size_t d) {
  LhsModel m;
  m.r = r;
  m.s = s;
  m.d = d;
  const std::size_t n = 1 + rng.integer(8);
  m.prior = rng.dirichlet(n);
  for (std::size_t l = 0; l < n; ++l) {
    ProbTable t({s, r});
    for (std::size_t x = 0; x < s; ++x) {
      std::vector<double> row = rng.dirichlet(r);
      for (std::size_t a = 0; a < r; ++a) t(x, a) = row[a];
    }
    m.response.push_back(std::move(t));
    const double noise = rng.uniform(0.0, 1.0);
    HermitianMatrix xi = projector(haar_pure(rng, d));
    xi *= (1.0 - noise);
    xi += HermitianMatrix::identity(d) * (noise / static_cast<double>(d));
    m.states.push_back(xi);
  }
  return m;
}

struct LhsMembership {
  bool is_member = false;
  double margin = 0.0;  // steerable-weight value of the (sub)normalized input
  // coefficients omega_lambda of the best dominated local part; when
  // is_member they reassemble the input members
  std::vector<HermitianMatrix> witness;
};

// Membership program: the trace the local part fails to cover,
//   margin = Tr(ass) - max { sum Tr w_l : w_l >= 0,
//                            sum_l D_l(a|x) w_l <= sigma(a,x) }.
// Subnormalized assemblages (branch images) are accepted; their local models
// must only reach the assemblage trace.
inline LhsMembership is_lhs(const Assemblage& ass, double tol = 1e-6,
                            const SdpOptions& opt = {}) {
  const auto strategies =
      enumerate_deterministic_strategies(ass.outputs(), ass.inputs());
  const std::size_t L = strategies.size();
  const std::size_t d = ass.dim();

  SdpProblem prob;
  prob.block_dims.assign(L, d);
  prob.maximize = true;
  prob.objective.assign(L, HermitianMatrix::identity(d));
  for (std::size_t x = 0; x < ass.inputs(); ++x)
    for (std::size_t a = 0; a < ass.outputs(); ++a) {
      MatrixConstraint mc;
      mc.rel = Relation::le;
      mc.rhs = ass.member(a, x);
      for (std::size_t l = 0; l < L; ++l)
        mc.coeff.push_back(strategies[l].d(a, x));
      prob.matrix_constraints.push_back(std::move(mc));
    }

  SdpSolution sol = solve(prob, opt);
  if (sol.status != SdpStatus::optimal)
    throw SolverFailure("membership program failed: " + sol.message);

  LhsMembership out;
  out.margin = ass.trace() - sol.objective;
  out.is_member = out.margin <= tol;
  out.witness = std::move(sol.blocks);
  return out;
}

// Local model recovered from membership coefficients: each strategy with
// nonvanishing weight becomes one lambda with its deterministic responses.
inline LhsModel model_from_witness(const Assemblage& ass,
                                   const std::vector<HermitianMatrix>& witness) {
  const auto strategies =
      enumerate_deterministic_strategies(ass.outputs(), ass.inputs());
  LhsModel m;
  m.r = ass.outputs();
  m.s = ass.inputs();
  m.d = ass.dim();
  double total = 0.0;
  for (const HermitianMatrix& w : witness) total += w.trace();
  if (total <= 0.0) throw ValidationError("witness carries no weight");
  for (std::size_t l = 0; l < witness.size(); ++l) {
    const double p = witness[l].trace();
    if (p < 1e-14) continue;
    m.prior.push_back(p / total);
    ProbTable t({m.s, m.r});
    for (std::size_t x = 0; x < m.s; ++x)
      t(x, strategies[l].response[x]) = 1.0;
    m.response.push_back(std::move(t));
    m.states.push_back(witness[l] * (1.0 / p));
  }
  // renormalize the prior exactly
  double s = 0.0;
  for (double p : m.prior) s += p;
  for (double& p : m.prior) p /= s;
  return m;
}

}  // namespace steering
