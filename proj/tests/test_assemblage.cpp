#include <catch2/catch_amalgamated.hpp>

#include <steering/assemblage.hpp>
#include <steering/random.hpp>

#include <cmath>

using namespace steering;

namespace {

HermitianMatrix bell_phi_plus() {
  // (|00> + |11>)/sqrt(2) as a density matrix on C^2 (x) C^2
  CMatrix m(4, 4);
  for (std::size_t i : {0u, 3u})
    for (std::size_t j : {0u, 3u}) m(i, j) = 0.5;
  return HermitianMatrix::symmetrized(m);
}

std::vector<HermitianMatrix> basis_projectors(const std::vector<cplx>& v0,
                                              const std::vector<cplx>& v1) {
  return {projector(v0), projector(v1)};
}

}  // namespace

TEST_CASE("singlet fixture equals the measured maximally entangled pair") {
  const std::vector<cplx> z0{1.0, 0.0}, z1{0.0, 1.0};
  const double irt2 = 1.0 / std::sqrt(2.0);
  const std::vector<cplx> xp{irt2, irt2}, xm{irt2, -irt2};
  const Assemblage measured = Assemblage::from_state_and_measurements(
      bell_phi_plus(), {basis_projectors(z0, z1), basis_projectors(xp, xm)},
      2);
  const Assemblage fixture = Assemblage::singlet_xz();
  REQUIRE(measured.same_shape(fixture));
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a)
      REQUIRE((measured.member(a, x) - fixture.member(a, x)).frobenius() <
              1e-12);
}

TEST_CASE("build rejects malformed member sets") {
  HermitianMatrix half = HermitianMatrix::identity(2) * 0.25;

  SECTION("signaling members") {
    HermitianMatrix skew(2);
    skew.set(0, 0, 0.6);
    skew.set(1, 1, 0.4);
    skew *= 0.5;
    REQUIRE_THROWS_AS(
        Assemblage::build(2, 2, 2, {half, half, skew, skew}), ValidationError);
  }

  SECTION("negative member") {
    HermitianMatrix neg(2);
    neg.set(0, 0, -0.1);
    neg.set(1, 1, 0.6);
    REQUIRE_THROWS_AS(Assemblage::build(2, 1, 2, {neg, half}),
                      ValidationError);
  }

  SECTION("trace above one") {
    HermitianMatrix big = HermitianMatrix::identity(2) * 0.6;
    REQUIRE_THROWS_AS(Assemblage::build(2, 1, 2, {big, big}),
                      ValidationError);
  }

  SECTION("member count mismatch") {
    REQUIRE_THROWS_AS(Assemblage::build(2, 2, 2, {half, half}),
                      DimensionError);
  }
}

TEST_CASE("accessors expose probabilities and marginals") {
  const Assemblage a = Assemblage::singlet_xz();
  REQUIRE(a.outputs() == 2);
  REQUIRE(a.inputs() == 2);
  REQUIRE(a.dim() == 2);
  REQUIRE(a.trace() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(a.no_signaling_residual() < 1e-12);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t o = 0; o < 2; ++o)
      REQUIRE(a.prob(o, x) == Catch::Approx(0.5).margin(1e-12));
  const HermitianMatrix marg = a.bob_marginal();
  REQUIRE((marg - HermitianMatrix::identity(2) * 0.5).frobenius() < 1e-12);
}

TEST_CASE("mixing interpolates member-wise") {
  const Assemblage a = Assemblage::singlet_xz();
  const Assemblage b = Assemblage::white_noise(2, 2, 2);
  const Assemblage m = Assemblage::mix(a, b, 0.25);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t o = 0; o < 2; ++o) {
      const HermitianMatrix want =
          0.25 * a.member(o, x) + 0.75 * b.member(o, x);
      REQUIRE((m.member(o, x) - want).frobenius() < 1e-14);
    }
  REQUIRE_THROWS_AS(Assemblage::mix(a, b, 1.5), ValidationError);
  REQUIRE_THROWS_AS(Assemblage::mix(a, Assemblage::white_noise(2, 3, 2), 0.5),
                    DimensionError);
}

TEST_CASE("white noise is the uniform unsteerable reference") {
  const Assemblage w = Assemblage::white_noise(3, 2, 2);
  REQUIRE(w.trace() == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t o = 0; o < 3; ++o)
      REQUIRE(w.prob(o, x) == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("pure assemblage round-trips through projectors") {
  Rng rng(5);
  PureAssemblage p;
  p.r = 2;
  p.s = 2;
  p.d = 3;
  // two orthonormal bases of the same plane: equal-weight mixtures agree,
  // so the assemblage is no-signaling
  const CMatrix u = haar_unitary(rng, 3);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t a = 0; a < 2; ++a) {
      std::vector<cplx> v(3);
      for (std::size_t i = 0; i < 3; ++i) {
        if (x == 0)
          v[i] = u(i, a);
        else
          v[i] = inv_sqrt2 * (u(i, 0) + (a == 0 ? 1.0 : -1.0) * u(i, 1));
      }
      p.states.push_back(v);
      p.weights.push_back(0.5);
    }
  }
  const Assemblage ass = p.to_assemblage();
  const PureAssemblage back = PureAssemblage::from(ass);
  for (std::size_t k = 0; k < 4; ++k) {
    REQUIRE(back.weights[k] == Catch::Approx(0.5).margin(1e-10));
    // states can differ by a phase; compare projectors
    REQUIRE((projector(back.states[k]) - projector(p.states[k])).frobenius() <
            1e-8);
  }

  const Assemblage noisy =
      Assemblage::mix(Assemblage::singlet_xz(), Assemblage::white_noise(2, 2, 2), 0.5);
  REQUIRE_THROWS_AS(PureAssemblage::from(noisy), ValidationError);
}

TEST_CASE("quantum representation stacks flag-register blocks") {
  const Assemblage a = Assemblage::singlet_xz();
  const QuantumRepresentation q = QuantumRepresentation::from(a);
  REQUIRE(q.per_input.size() == 2);
  for (std::size_t x = 0; x < 2; ++x) {
    const HermitianMatrix& block = q.per_input[x];
    REQUIRE(block.dim() == 4);
    REQUIRE(block.trace() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(min_eigenvalue(block) >= -1e-12);
    for (std::size_t a_i = 0; a_i < 2; ++a_i)
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
          REQUIRE(block(a_i * 2 + i, a_i * 2 + j) ==
                  a.member(a_i, x)(i, j));
    // off-diagonal flag blocks vanish
    REQUIRE(block(0, 2) == cplx(0.0, 0.0));
    REQUIRE(block(1, 3) == cplx(0.0, 0.0));
  }
}

TEST_CASE("measured assemblages from random states are valid") {
  Rng rng(11);
  for (int k = 0; k < 5; ++k) {
    const HermitianMatrix rho = random_density(rng, 4);
    const std::vector<std::vector<HermitianMatrix>> povms{
        random_povm(rng, 2, 3), random_povm(rng, 2, 3)};
    const Assemblage a =
        Assemblage::from_state_and_measurements(rho, povms, 2);
    REQUIRE(a.outputs() == 3);
    REQUIRE(a.inputs() == 2);
    REQUIRE(a.no_signaling_residual() < 1e-9);
    REQUIRE(a.trace() == Catch::Approx(1.0).margin(1e-9));
  }
}
