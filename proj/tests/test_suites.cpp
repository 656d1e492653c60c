#include <catch2/catch_amalgamated.hpp>

#include <steering/suite.hpp>

#include <cstdio>

using namespace steering;

namespace {

SuiteConfig small_config() {
  SuiteConfig cfg;
  cfg.trials = 2;
  cfg.dump_failures = false;
  return cfg;
}

}  // namespace

TEST_CASE("every registered suite passes a short run") {
  SuiteConfig cfg = small_config();
  const SuiteReport report = run_suites(cfg);
  REQUIRE(report.suites.size() == suite_registry().size());
  for (const SuiteOutcome& s : report.suites) {
    INFO(s.name << ": " << (s.failures.empty()
                                ? std::string("ok")
                                : s.failures.front().detail));
    REQUIRE(s.trials == 2);
    REQUIRE(s.passed == s.trials);
  }
  REQUIRE(report.all_passed);
}

TEST_CASE("suite selection and trial override") {
  SuiteConfig cfg = small_config();
  cfg.trials = 3;
  cfg.suites = {"lhs-zero", "sdp-selftest"};
  const SuiteReport report = run_suites(cfg);
  REQUIRE(report.suites.size() == 2);
  REQUIRE(report.suites[0].name == "lhs-zero");
  REQUIRE(report.suites[1].name == "sdp-selftest");
  REQUIRE(report.suites[0].trials == 3);

  cfg.suites = {"no-such-suite"};
  REQUIRE_THROWS_AS(run_suites(cfg), ValidationError);
}

TEST_CASE("zero trials produce an empty passing report") {
  SuiteConfig cfg = small_config();
  cfg.trials = 0;
  cfg.suites = {"entropy-identity"};
  const SuiteReport report = run_suites(cfg);
  REQUIRE(report.all_passed);
  REQUIRE(report.suites[0].trials == 0);
  REQUIRE(report.suites[0].passed == 0);
}

TEST_CASE("reports are deterministic for a fixed configuration") {
  SuiteConfig cfg = small_config();
  cfg.suites = {"lhs-zero", "weight-robustness-convex"};
  const std::string a = canonical_dump(run_suites(cfg).to_json());
  const std::string b = canonical_dump(run_suites(cfg).to_json());
  REQUIRE(a == b);
}

TEST_CASE("different seeds draw different instances") {
  SuiteConfig a = small_config();
  SuiteConfig b = small_config();
  b.seed = 43;
  a.suites = b.suites = {"lhs-zero"};
  // worst residuals are seed-dependent with overwhelming probability
  const double ra = run_suites(a).suites[0].worst_residual;
  const double rb = run_suites(b).suites[0].worst_residual;
  REQUIRE(ra != rb);
}

TEST_CASE("the trial cap on the fixed conversion grid holds") {
  SuiteConfig cfg = small_config();
  cfg.trials = 500;
  cfg.suites = {"conversion-matrix"};
  const SuiteReport report = run_suites(cfg);
  REQUIRE(report.suites[0].trials == 20);
  REQUIRE(report.suites[0].passed == 20);
}

TEST_CASE("single trials can be replayed from a record file") {
  const std::string path = "replay_record_test.json";
  save_json(path, replay_record("lhs-zero", 1, 42));

  SuiteConfig cfg = small_config();
  const TrialResult direct = run_trial("lhs-zero", 1, cfg);
  const TrialResult replayed = replay_trial(path, cfg);
  REQUIRE(direct.pass == replayed.pass);
  REQUIRE(direct.residual == replayed.residual);
  std::remove(path.c_str());
}

TEST_CASE("replay records validate their fields") {
  const std::string path = "replay_record_bad_test.json";
  json j;
  j["format"] = kFormatVersion;
  j["suite"] = "lhs-zero";
  save_json(path, j);
  REQUIRE_THROWS_AS(replay_trial(path, SuiteConfig{}), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("unknown suites and exceptions are reported, not crashed") {
  REQUIRE_THROWS_AS(run_trial("bogus", 0, SuiteConfig{}), ValidationError);
}

TEST_CASE("failure dumps write replay and artifact files") {
  // a config with an impossible tolerance forces failures deterministically
  SuiteConfig cfg;
  cfg.trials = 1;
  cfg.suites = {"lhs-zero"};
  cfg.dump_dir = "suite-dump-test";
  cfg.dump_failures = true;
  cfg.tol.measure = -1.0;  // weight of an LHS instance can never be negative
  const SuiteReport report = run_suites(cfg);
  REQUIRE_FALSE(report.all_passed);
  REQUIRE(report.suites[0].failures.size() == 1);
  const TrialFailure& fail = report.suites[0].failures[0];
  REQUIRE(!fail.files.empty());

  // the dumped record replays to the same failure
  const TrialResult replayed = replay_trial(fail.files[0], cfg);
  REQUIRE_FALSE(replayed.pass);

  for (const std::string& f : fail.files) std::remove(f.c_str());
  std::filesystem::remove_all("suite-dump-test");
}
