#include <catch2/catch_amalgamated.hpp>

#include <steering/conversions.hpp>

#include <cmath>

using namespace steering;

namespace {

double member_distance(const Assemblage& a, const Assemblage& b) {
  double worst = 0.0;
  for (std::size_t x = 0; x < a.inputs(); ++x)
    for (std::size_t o = 0; o < a.outputs(); ++o)
      worst = std::max(worst, (a.member(o, x) - b.member(o, x)).frobenius());
  return worst;
}

PureAssemblage rotated(const PureAssemblage& psi, const CMatrix& u) {
  PureAssemblage out = psi;
  for (auto& v : out.states) {
    std::vector<cplx> w(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) w[i] += u(i, j) * v[j];
    v = std::move(w);
  }
  return out;
}

PureAssemblage fixed_basis_pair() {
  PureAssemblage p;
  p.r = p.s = p.d = 2;
  p.weights.assign(4, 0.5);
  p.states = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
  return p;
}

}  // namespace

TEST_CASE("overlap profiles capture the cross-input geometry") {
  const PureAssemblage singlet =
      PureAssemblage::from(Assemblage::singlet_xz());
  const OverlapProfile p = overlap_profile(singlet);
  const double irt2 = 1.0 / std::sqrt(2.0);
  REQUIRE(p.values.size() == 2);
  REQUIRE(p.values[0] == Catch::Approx(irt2).margin(1e-12));
  REQUIRE(p.values[1] == Catch::Approx(irt2).margin(1e-12));

  for (double theta : {0.3, 0.8, 1.2}) {
    const OverlapProfile q =
        overlap_profile(pure_orthogonal_from_angles(theta));
    REQUIRE(q.values[0] == Catch::Approx(std::cos(theta)).margin(1e-12));
    REQUIRE(q.values[1] == Catch::Approx(std::cos(theta)).margin(1e-12));
  }
}

TEST_CASE("the angle family rejects endpoint parameters") {
  REQUIRE_THROWS_AS(pure_orthogonal_from_angles(0.0), ValidationError);
  REQUIRE_THROWS_AS(pure_orthogonal_from_angles(1.5707963267948966),
                    ValidationError);
  REQUIRE_THROWS_AS(pure_orthogonal_from_angles(-0.1), ValidationError);
}

TEST_CASE("interior angles always steer") {
  for (double theta : {0.2, 0.6, 1.0, 1.4}) {
    const Assemblage ass = pure_orthogonal_from_angles(theta).to_assemblage();
    REQUIRE_FALSE(is_lhs(ass).is_member);
  }
}

TEST_CASE("self-conversion produces the identity rotation") {
  const PureAssemblage psi = pure_orthogonal_from_angles(0.7);
  const SnioMap m = construct_unitary_snio(psi, psi);
  REQUIRE((m.kraus.ops[0] - CMatrix::identity(2)).frobenius() < 1e-9);
}

TEST_CASE("a Pauli-conjugated target is reached by the constructed unitary") {
  const PureAssemblage psi = pure_orthogonal_from_angles(0.9);
  CMatrix pauli_x(2, 2);
  pauli_x(0, 1) = 1.0;
  pauli_x(1, 0) = 1.0;
  const PureAssemblage flipped = rotated(psi, pauli_x);
  const SnioMap m = construct_unitary_snio(psi, flipped);
  REQUIRE(member_distance(apply(m, psi.to_assemblage()),
                          flipped.to_assemblage()) < 1e-8);
}

TEST_CASE("a random rotation of the source is recovered") {
  Rng rng(13);
  for (int k = 0; k < 4; ++k) {
    const PureAssemblage psi = pure_orthogonal_from_angles(0.5 + 0.2 * k);
    const PureAssemblage target = rotated(psi, haar_unitary(rng, 2));
    const ConversionResult res = can_convert(psi, target);
    REQUIRE(res.convertible);
    REQUIRE(res.witness.has_value());
    REQUIRE(member_distance(apply(*res.witness, psi.to_assemblage()),
                            target.to_assemblage()) < 1e-8);
  }
}

TEST_CASE("mismatched overlap profiles block conversion between steerers") {
  const PureAssemblage a = pure_orthogonal_from_angles(M_PI / 8);
  const PureAssemblage b = pure_orthogonal_from_angles(M_PI / 3);
  const ConversionResult res = can_convert(a, b);
  REQUIRE_FALSE(res.convertible);
  REQUIRE(res.reason.find("overlap profiles differ") != std::string::npos);
  REQUIRE_FALSE(res.witness.has_value());
}

TEST_CASE("unsteerable targets are prepared regardless of the source") {
  const PureAssemblage source = pure_orthogonal_from_angles(1.1);
  const PureAssemblage target = fixed_basis_pair();
  REQUIRE(is_lhs(target.to_assemblage()).is_member);

  const ConversionResult res = can_convert(source, target);
  REQUIRE(res.convertible);
  REQUIRE(res.reason.find("unsteerable") != std::string::npos);
  REQUIRE(res.witness.has_value());
  REQUIRE(member_distance(apply(*res.witness, source.to_assemblage()),
                          target.to_assemblage()) < 1e-8);
}

TEST_CASE("preparation maps emit the model assemblage from any input") {
  Rng rng(55);
  const LhsModel model = random_lhs_model(rng, 2, 2, 2);
  const Assemblage want = assemble_from_model(model);
  const SnioMap prep = preparation_snio(model, 2, 2, 2);
  REQUIRE(validate(prep).deterministic);

  const Assemblage from_singlet = apply(prep, Assemblage::singlet_xz());
  REQUIRE(member_distance(from_singlet, want) < 1e-8);
  const Assemblage from_noise = apply(prep, Assemblage::white_noise(2, 2, 2));
  REQUIRE(member_distance(from_noise, want) < 1e-8);
}

TEST_CASE("the exploratory search finds exact self-maps") {
  const double theta = M_PI / 4;
  BitSearchOptions opts;
  opts.restarts = 2;
  opts.iters = 20;
  const std::vector<double> res = steering_bit_search(
      pure_orthogonal_from_angles(theta), {theta}, opts);
  REQUIRE(res.size() == 1);
  REQUIRE(res[0] < 1e-6);
}

TEST_CASE("the exploratory search is deterministic given its seed") {
  BitSearchOptions opts;
  opts.restarts = 3;
  opts.iters = 15;
  const PureAssemblage cand = pure_orthogonal_from_angles(0.6);
  const std::vector<double> a = steering_bit_search(cand, {0.9, 1.2}, opts);
  const std::vector<double> b = steering_bit_search(cand, {0.9, 1.2}, opts);
  REQUIRE(a.size() == 2);
  REQUIRE(a[0] == b[0]);
  REQUIRE(a[1] == b[1]);
}

TEST_CASE("conversion guards reject non-minimal shapes") {
  PureAssemblage bad = fixed_basis_pair();
  bad.states[1] = {1.0, 0.0};  // breaks orthogonality within input 0
  REQUIRE_THROWS_AS(can_convert(bad, fixed_basis_pair()), ValidationError);

  PureAssemblage sub = fixed_basis_pair();
  sub.weights[0] = 0.25;  // weights no longer sum to one for input 0
  REQUIRE_THROWS_AS(can_convert(fixed_basis_pair(), sub), ValidationError);
}
