#include <catch2/catch_amalgamated.hpp>

#include <steering/lhs.hpp>

using namespace steering;

TEST_CASE("deterministic strategies enumerate every response tuple") {
  const auto strategies = enumerate_deterministic_strategies(2, 2);
  REQUIRE(strategies.size() == 4);
  // lexicographic, x = 0 most significant
  REQUIRE(strategies[0].response == std::vector<std::size_t>{0, 0});
  REQUIRE(strategies[1].response == std::vector<std::size_t>{0, 1});
  REQUIRE(strategies[2].response == std::vector<std::size_t>{1, 0});
  REQUIRE(strategies[3].response == std::vector<std::size_t>{1, 1});
  REQUIRE(strategies[2].d(1, 0) == 1.0);
  REQUIRE(strategies[2].d(0, 1) == 1.0);
  REQUIRE(strategies[2].d(1, 1) == 0.0);

  REQUIRE(enumerate_deterministic_strategies(3, 4).size() == 81);
  REQUIRE_THROWS_AS(enumerate_deterministic_strategies(10, 7),
                    ValidationError);
}

TEST_CASE("model assemblages are recognized as members") {
  Rng rng(2024);
  for (int k = 0; k < 8; ++k) {
    LhsModel model = random_lhs_model(rng, 2, 2, 2);
    const Assemblage ass = assemble_from_model(model);
    const LhsMembership mem = is_lhs(ass);
    INFO("margin " << mem.margin);
    REQUIRE(mem.is_member);
    REQUIRE(mem.margin <= 1e-6);
  }
}

TEST_CASE("the singlet fixture is far from the local set") {
  const LhsMembership mem = is_lhs(Assemblage::singlet_xz());
  REQUIRE_FALSE(mem.is_member);
  REQUIRE(mem.margin > 0.1);
}

TEST_CASE("witness coefficients reassemble member assemblages") {
  Rng rng(99);
  LhsModel model = random_lhs_model(rng, 2, 2, 2);
  const Assemblage ass = assemble_from_model(model);
  SdpOptions opt;
  opt.eps = 1e-10;
  opt.max_iter = 400000;
  const LhsMembership mem = is_lhs(ass, 1e-6, opt);
  REQUIRE(mem.is_member);

  const LhsModel back = model_from_witness(ass, mem.witness);
  back.validate();
  const Assemblage rebuilt = assemble_from_model(back);
  double worst = 0.0;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a)
      worst = std::max(
          worst, (rebuilt.member(a, x) - ass.member(a, x)).frobenius());
  REQUIRE(worst < 1e-5);
}

TEST_CASE("model validation rejects malformed components") {
  Rng rng(7);
  LhsModel model = random_lhs_model(rng, 2, 2, 2);

  SECTION("unnormalized prior") {
    model.prior[0] += 0.1;
    REQUIRE_THROWS_AS(model.validate(), ValidationError);
  }
  SECTION("lambda count mismatch") {
    model.prior.push_back(0.0);
    REQUIRE_THROWS_AS(model.validate(), DimensionError);
  }
  SECTION("hidden state unnormalized") {
    model.states[0] *= 2.0;
    REQUIRE_THROWS_AS(model.validate(), ValidationError);
  }
  SECTION("response table shape") {
    model.response[0] = ProbTable({2, 3});
    REQUIRE_THROWS_AS(model.validate(), DimensionError);
  }
}

TEST_CASE("subnormalized assemblages are accepted by the membership test") {
  Rng rng(15);
  LhsModel model = random_lhs_model(rng, 2, 2, 2);
  Assemblage full = assemble_from_model(model);
  std::vector<HermitianMatrix> scaled;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a)
      scaled.push_back(full.member(a, x) * 0.35);
  const Assemblage sub = Assemblage::build(2, 2, 2, std::move(scaled));
  const LhsMembership mem = is_lhs(sub);
  REQUIRE(mem.is_member);
  REQUIRE(mem.margin <= 1e-6);
}
