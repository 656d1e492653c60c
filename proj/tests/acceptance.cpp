// Acceptance gate: one line per criterion, nonzero exit when any fail.
// Criteria 1-5 and 7-9 run the property suites at their full default sizes;
// criterion 6 compares the split measures against frozen reference values.

#include <steering/steering.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

using namespace steering;

namespace {

struct Criterion {
  int id;
  std::string label;
  bool pass = false;
  double seconds = 0.0;
  std::string note;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

Criterion run_suite_criterion(int id, const std::string& label,
                              const std::vector<std::string>& suites,
                              std::uint64_t seed, std::size_t trials) {
  Criterion c{id, label};
  const double t0 = now_seconds();
  SuiteConfig cfg;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.suites = suites;
  cfg.dump_dir = "acceptance-failures";
  try {
    const SuiteReport report = run_suites(cfg);
    c.pass = report.all_passed;
    std::size_t total = 0, passed = 0;
    double worst = 0.0;
    for (const SuiteOutcome& s : report.suites) {
      total += s.trials;
      passed += s.passed;
      worst = std::max(worst, s.worst_residual);
      if (!s.failures.empty() && c.note.empty())
        c.note = s.name + " t" + std::to_string(s.failures.front().trial) +
                 ": " + s.failures.front().detail;
    }
    if (c.note.empty()) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%zu/%zu trials, worst residual %.2e",
                    passed, total, worst);
      c.note = buf;
    }
  } catch (const std::exception& e) {
    c.pass = false;
    c.note = std::string("exception: ") + e.what();
  }
  c.seconds = now_seconds() - t0;
  return c;
}

Criterion run_golden_criterion(int id, const std::string& label,
                               const std::string& golden_dir) {
  Criterion c{id, label};
  const double t0 = now_seconds();
  c.pass = true;
  double worst = 0.0;
  std::size_t checked = 0;
  try {
    std::vector<std::string> names{"singlet_xz"};
    for (int k = 1; k <= 20; ++k) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "steerable_%02d", k);
      names.push_back(buf);
    }
    for (const std::string& name : names) {
      const json g = load_json(golden_dir + "/" + name + ".json");
      const Assemblage ass = assemblage_from_json(g.at("fixture"));
      const double want_w =
          g.at("golden").at("steerable_weight").get<double>();
      const double want_r = g.at("golden").at("robustness").get<double>();
      const double got_w = steerable_weight(ass).first;
      const double got_r = robustness(ass).first;
      worst = std::max({worst, std::abs(got_w - want_w),
                        std::abs(got_r - want_r)});
      checked += 2;
      if (std::abs(got_w - want_w) > 1e-6 ||
          std::abs(got_r - want_r) > 1e-6) {
        c.pass = false;
        if (c.note.empty())
          c.note = name + ": weight/robustness off by " +
                   std::to_string(std::max(std::abs(got_w - want_w),
                                           std::abs(got_r - want_r)));
      }
    }
    if (c.note.empty()) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%zu values, worst deviation %.2e",
                    checked, worst);
      c.note = buf;
    }
  } catch (const std::exception& e) {
    c.pass = false;
    c.note = std::string("exception: ") + e.what();
  }
  c.seconds = now_seconds() - t0;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::string golden_dir = "tests/golden";
  std::uint64_t seed = 42;
  std::size_t trials = std::numeric_limits<std::size_t>::max();
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--golden" && i + 1 < argc) {
      golden_dir = argv[++i];
    } else if (arg == "--seed" && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else if (arg == "--trials" && i + 1 < argc) {
      trials = std::stoul(argv[++i]);
    } else {
      std::fprintf(stderr,
                   "usage: acceptance [--golden dir] [--seed n] [--trials n]\n");
      return 2;
    }
  }

  std::vector<Criterion> results;
  results.push_back(run_suite_criterion(
      1, "unsteerable instances score zero on all three measures",
      {"lhs-zero"}, seed, trials));
  results.push_back(run_suite_criterion(
      2, "operation images of unsteerable instances stay unsteerable",
      {"snio-preserves-lhs"}, seed, trials));
  results.push_back(run_suite_criterion(
      3, "weight and robustness never grow under deterministic operations",
      {"weight-robustness-monotone"}, seed, trials));
  results.push_back(run_suite_criterion(
      4, "weight and robustness are convex under mixing",
      {"weight-robustness-convex"}, seed, trials));
  results.push_back(run_suite_criterion(
      5, "entropy measure: monotone, jointly convex, certified bounds",
      {"rel-entropy-monotone", "rel-entropy-convex"}, seed, trials));
  results.push_back(run_golden_criterion(
      6, "weight and robustness match the frozen reference values",
      golden_dir));
  results.push_back(run_suite_criterion(
      7, "conversion grid decided exactly, witnesses verified",
      {"conversion-matrix"}, seed, trials));
  results.push_back(run_suite_criterion(
      8, "entropy decomposition identity and edge cases",
      {"entropy-identity"}, seed, trials));
  results.push_back(run_suite_criterion(
      9, "solver self-tests and brute-force agreement", {"sdp-selftest"},
      seed, trials));

  bool all = true;
  for (const Criterion& c : results) {
    all = all && c.pass;
    std::printf("criterion %d: %-62s %s  (%.1fs; %s)\n", c.id,
                c.label.c_str(), c.pass ? "pass" : "FAIL", c.seconds,
                c.note.c_str());
    std::fflush(stdout);
  }
  std::printf("%s\n", all ? "all criteria passed" : "ACCEPTANCE FAILED");
  return all ? 0 : 1;
}
