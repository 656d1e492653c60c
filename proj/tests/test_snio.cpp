#include <catch2/catch_amalgamated.hpp>

#include <steering/lhs.hpp>
#include <steering/snio.hpp>

#include <cmath>

using namespace steering;

namespace {

double member_distance(const Assemblage& a, const Assemblage& b) {
  REQUIRE(a.same_shape(b));
  double worst = 0.0;
  for (std::size_t x = 0; x < a.inputs(); ++x)
    for (std::size_t o = 0; o < a.outputs(); ++o)
      worst = std::max(worst, (a.member(o, x) - b.member(o, x)).frobenius());
  return worst;
}

// keeps x and a, applies the given Kraus branches
SnioMap with_identity_wiring(std::vector<CMatrix> ops, std::size_t r,
                             std::size_t s) {
  SnioMap m = identity_snio(r, s, ops.front().cols());
  const std::size_t n = ops.size();
  m.kraus.ops = std::move(ops);
  m.wiring.p_x = ProbTable({n, s, s});
  m.wiring.p_af = ProbTable({n, s, s, r, r});
  for (std::size_t o = 0; o < n; ++o) {
    for (std::size_t x = 0; x < s; ++x) m.wiring.p_x(o, x, x) = 1.0;
    for (std::size_t xf = 0; xf < s; ++xf)
      for (std::size_t x = 0; x < s; ++x)
        for (std::size_t a = 0; a < r; ++a) m.wiring.p_af(o, xf, x, a, a) = 1.0;
  }
  return m;
}

}  // namespace

TEST_CASE("the pass-through operation leaves assemblages unchanged") {
  const Assemblage ass = Assemblage::singlet_xz();
  const SnioMap id = identity_snio(2, 2, 2);
  const SnioDiagnostics d = validate(id);
  REQUIRE(d.ok);
  REQUIRE(d.deterministic);
  REQUIRE(member_distance(apply(id, ass), ass) < 1e-12);
}

TEST_CASE("a projective branch post-selects the matching components") {
  const Assemblage ass = Assemblage::singlet_xz();
  CMatrix p0(2, 2);
  p0(0, 0) = 1.0;
  CMatrix p1(2, 2);
  p1(1, 1) = 1.0;
  const SnioMap snio = with_identity_wiring({p0, p1}, 2, 2);
  REQUIRE(validate(snio).deterministic);

  REQUIRE(branch_probability(snio, 0, ass) == Catch::Approx(0.5).margin(1e-12));

  const Assemblage branch = apply_branch(snio, 0, ass);
  // members become sigma(a,x)_{00} |0><0|
  const double want[2][2] = {{0.5, 0.0}, {0.25, 0.25}};
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a) {
      const HermitianMatrix& m = branch.member(a, x);
      REQUIRE(m(0, 0).real() == Catch::Approx(want[x][a]).margin(1e-12));
      REQUIRE(std::abs(m(0, 1)) < 1e-12);
      REQUIRE(std::abs(m(1, 1)) < 1e-12);
    }
  REQUIRE(branch.no_signaling_residual() < 1e-9);
  REQUIRE(branch.trace() == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("branches sum to the full map") {
  Rng rng(17);
  const HermitianMatrix rho = random_density(rng, 4);
  const Assemblage ass = Assemblage::from_state_and_measurements(
      rho, {random_projective(rng, 2), random_projective(rng, 2)}, 2);
  RandomSnioSpec spec;
  spec.branches = 3;
  spec.dim_out = 3;
  const SnioMap snio = random_snio(rng, spec);
  REQUIRE(validate(snio).ok);

  const Assemblage full = apply(snio, ass);
  std::vector<HermitianMatrix> acc(full.outputs() * full.inputs(),
                                   HermitianMatrix::zero(full.dim()));
  double prob_total = 0.0;
  for (std::size_t o = 0; o < 3; ++o) {
    const Assemblage part = apply_branch(snio, o, ass);
    REQUIRE(part.no_signaling_residual() < 1e-9);
    prob_total += branch_probability(snio, o, ass);
    for (std::size_t xf = 0; xf < part.inputs(); ++xf)
      for (std::size_t af = 0; af < part.outputs(); ++af)
        acc[xf * part.outputs() + af] += part.member(af, xf);
  }
  double worst = 0.0;
  for (std::size_t xf = 0; xf < full.inputs(); ++xf)
    for (std::size_t af = 0; af < full.outputs(); ++af)
      worst = std::max(worst, (acc[xf * full.outputs() + af] -
                               full.member(af, xf))
                                  .frobenius());
  REQUIRE(worst < 1e-12);
  REQUIRE(prob_total == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(full.trace() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("two equal-split identity branches reconstruct the input") {
  const Assemblage ass = Assemblage::singlet_xz();
  const double irt2 = 1.0 / std::sqrt(2.0);
  const CMatrix half = CMatrix::identity(2) * cplx(irt2, 0.0);
  const SnioMap snio = with_identity_wiring({half, half}, 2, 2);
  const SnioDiagnostics d = validate(snio);
  REQUIRE(d.deterministic);
  REQUIRE(member_distance(apply(snio, ass), ass) < 1e-12);
  REQUIRE(branch_probability(snio, 0, ass) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("flattened composition matches sequential application") {
  Rng rng(23);
  const HermitianMatrix rho = random_density(rng, 4);
  const Assemblage ass = Assemblage::from_state_and_measurements(
      rho, {random_projective(rng, 2), random_projective(rng, 2)}, 2);

  RandomSnioSpec s1;
  s1.rf = 3;
  s1.dim_out = 3;
  s1.branches = 2;
  const SnioMap first = random_snio(rng, s1);

  RandomSnioSpec s2;
  s2.r = 3;  // chains onto first's rf
  s2.dim_in = 3;
  s2.dim_out = 2;
  s2.branches = 2;
  s2.deterministic = false;
  const SnioMap second = random_snio(rng, s2);

  const SnioMap chained = compose(second, first);
  REQUIRE(chained.kraus.branches() == 4);

  const Assemblage a_seq = apply(second, apply(first, ass));
  const Assemblage a_flat = apply(chained, ass);
  REQUIRE(member_distance(a_seq, a_flat) < 1e-10);

  // joint branch (o1, o2) = (1, 0) sits at index o1 * n2 + o2
  const Assemblage b_seq =
      apply_branch(second, 0, apply_branch(first, 1, ass));
  const Assemblage b_flat = apply_branch(chained, 2, ass);
  REQUIRE(member_distance(b_seq, b_flat) < 1e-10);

  REQUIRE_THROWS_AS(compose(first, first), DimensionError);
}

TEST_CASE("diagnostics distinguish stochastic and invalid operations") {
  Rng rng(41);
  RandomSnioSpec spec;
  spec.deterministic = false;
  const SnioMap lossy = random_snio(rng, spec);
  const SnioDiagnostics d = validate(lossy);
  REQUIRE(d.ok);
  REQUIRE_FALSE(d.deterministic);
  REQUIRE(d.determinism_defect > 1e-3);

  SnioMap inflated = lossy;
  for (CMatrix& k : inflated.kraus.ops) k *= cplx(4.0, 0.0);
  REQUIRE_FALSE(validate(inflated).ok);
  REQUIRE(validate(inflated).completeness_excess > 1e-9);

  SnioMap ragged = lossy;
  ragged.kraus.ops.push_back(CMatrix(3, 3));
  REQUIRE_THROWS_AS(validate(ragged), DimensionError);
}

TEST_CASE("shape mismatches between operation and assemblage are rejected") {
  const Assemblage ass = Assemblage::singlet_xz();
  const SnioMap wrong_r = identity_snio(3, 2, 2);
  REQUIRE_THROWS_AS(apply(wrong_r, ass), DimensionError);
  const SnioMap wrong_d = identity_snio(2, 2, 3);
  REQUIRE_THROWS_AS(apply(wrong_d, ass), DimensionError);
  const SnioMap ok = identity_snio(2, 2, 2);
  REQUIRE_THROWS_AS(apply_branch(ok, 1, ass), DimensionError);
}

TEST_CASE("random operations are reproducible from the seed") {
  RandomSnioSpec spec;
  spec.branches = 3;
  Rng r1(321), r2(321);
  const SnioMap a = random_snio(r1, spec);
  const SnioMap b = random_snio(r2, spec);
  for (std::size_t o = 0; o < 3; ++o)
    REQUIRE((a.kraus.ops[o] - b.kraus.ops[o]).frobenius() == 0.0);
  REQUIRE(validate(a).ok);
}
