// Command-line front door for the steering toolkit. Every command is a pure
// function of its arguments, input files, and seed; exit codes are 0 (pass),
// 1 (property failure), 2 (usage error), 3 (solver failure).

#include <CLI11.hpp>

#include <steering/steering.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace steering;

json witness_to_json(const DecompositionWitness& wit) {
  json j;
  j["format"] = kFormatVersion;
  j["nu"] = wit.nu;
  j["steerable_part"] = to_json(wit.steerable_part);
  j["lhs_part"] = to_json(wit.lhs_part);
  return j;
}

int cmd_inspect(const std::string& path) {
  const json j = load_json(path);
  json out;
  out["format"] = kFormatVersion;
  if (j.contains("members")) {
    const Assemblage ass = assemblage_from_json(j);
    out["kind"] = "assemblage";
    out["outputs"] = ass.outputs();
    out["inputs"] = ass.inputs();
    out["dim"] = ass.dim();
    out["trace"] = ass.trace();
    out["no_signaling_residual"] = ass.no_signaling_residual();
  } else if (j.contains("kraus")) {
    const SnioMap snio = snio_from_json(j);
    const SnioDiagnostics diag = validate(snio);
    out["kind"] = "snio";
    out["branches"] = snio.kraus.branches();
    out["dim_in"] = snio.kraus.dim_in();
    out["dim_out"] = snio.kraus.dim_out();
    out["outputs"] = snio.wiring.rf;
    out["inputs"] = snio.wiring.sf;
    out["deterministic"] = diag.deterministic;
    out["completeness_excess"] = diag.completeness_excess;
  } else if (j.contains("lambdas")) {
    const LhsModel model = lhs_model_from_json(j);
    out["kind"] = "lhs-model";
    out["outputs"] = model.r;
    out["inputs"] = model.s;
    out["dim"] = model.d;
    out["hidden_states"] = model.prior.size();
  } else {
    throw ValidationError("unrecognized file: " + path);
  }
  std::cout << canonical_dump(out);
  return 0;
}

int cmd_is_lhs(const std::string& path, double tol) {
  const Assemblage ass = read_assemblage(path);
  const LhsMembership mem = is_lhs(ass, tol);
  json out;
  out["format"] = kFormatVersion;
  out["is_member"] = mem.is_member;
  out["margin"] = mem.margin;
  std::cout << canonical_dump(out);
  return mem.is_member ? 0 : 1;
}

struct MeasureArgs {
  std::string path;
  bool weight = false;
  bool robustness = false;
  bool rel_entropy = false;
  std::size_t restarts = 8;
  std::size_t rounds = 2;
  std::string weight_witness;
  std::string robustness_witness;
  std::string closest_lhs;
};

int cmd_measure(const MeasureArgs& args) {
  const Assemblage ass = read_assemblage(args.path);
  const bool all = !args.weight && !args.robustness && !args.rel_entropy;
  json out;
  out["format"] = kFormatVersion;
  if (args.weight || all) {
    const auto [value, wit] = steerable_weight(ass);
    json m;
    m["value"] = value;
    if (!args.weight_witness.empty()) {
      save_json(args.weight_witness, witness_to_json(wit));
      m["witness_file"] = args.weight_witness;
    }
    out["weight"] = std::move(m);
  }
  if (args.robustness || all) {
    const auto [value, wit] = robustness(ass);
    json m;
    m["value"] = value;
    if (!args.robustness_witness.empty()) {
      save_json(args.robustness_witness, witness_to_json(wit));
      m["witness_file"] = args.robustness_witness;
    }
    out["robustness"] = std::move(m);
  }
  if (args.rel_entropy || all) {
    RelEntropyOptions opts;
    opts.outer_rounds = args.rounds;
    opts.ascent.n_restarts = args.restarts;
    const RelEntropyEstimate est = relative_entropy_of_steering(ass, opts);
    json m;
    m["value"] = est.heuristic_value;
    m["lower_bound"] = est.lower_bound;
    m["heuristic"] = est.heuristic_value;
    m["converged"] = est.converged;
    m["status"] = est.status;
    if (!args.closest_lhs.empty()) {
      save_json(args.closest_lhs, to_json(est.closest_lhs));
      m["witness_file"] = args.closest_lhs;
    }
    out["rel_entropy"] = std::move(m);
  }
  std::cout << canonical_dump(out);
  return 0;
}

int cmd_apply(const std::string& snio_path, const std::string& in_path,
              const std::string& out_path, int branch) {
  const SnioMap snio = read_snio(snio_path);
  const Assemblage ass = read_assemblage(in_path);
  const Assemblage mapped =
      branch < 0 ? apply(snio, ass)
                 : apply_branch(snio, static_cast<std::size_t>(branch), ass);
  save_json(out_path, to_json(mapped));
  return 0;
}

int cmd_convert_check(const std::string& from_path, const std::string& to_path,
                      const std::string& witness_path) {
  const PureAssemblage from = PureAssemblage::from(read_assemblage(from_path));
  const PureAssemblage to = PureAssemblage::from(read_assemblage(to_path));
  const ConversionResult verdict = can_convert(from, to);
  json out;
  out["format"] = kFormatVersion;
  out["convertible"] = verdict.convertible;
  out["reason"] = verdict.reason;
  if (verdict.convertible && verdict.witness && !witness_path.empty()) {
    save_json(witness_path, to_json(*verdict.witness));
    out["witness_file"] = witness_path;
  }
  std::cout << canonical_dump(out);
  return verdict.convertible ? 0 : 1;
}

int cmd_gen(const std::string& kind, const std::string& out_path, double theta,
            std::uint64_t seed) {
  Rng rng(seed);
  Assemblage ass = Assemblage::white_noise(2, 2, 2);
  if (kind == "singlet-xz") {
    ass = Assemblage::singlet_xz();
  } else if (kind == "theta") {
    ass = pure_orthogonal_from_angles(theta).to_assemblage();
  } else if (kind == "random-lhs") {
    ass = assemble_from_model(random_lhs_model(rng, 2, 2, 2));
  } else if (kind == "random-steerable") {
    ass = detail::random_steerable_fixture(rng);
  } else {
    throw ValidationError("unknown kind: " + kind);
  }
  save_json(out_path, to_json(ass));
  return 0;
}

int cmd_bit_search(const std::string& candidate_path,
                   const std::string& thetas_csv, std::size_t restarts,
                   std::size_t iters, std::uint64_t seed) {
  const PureAssemblage candidate =
      PureAssemblage::from(read_assemblage(candidate_path));
  std::vector<double> thetas;
  std::stringstream ss(thetas_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    thetas.push_back(std::stod(item));
  }
  if (thetas.empty()) throw ValidationError("no target angles given");
  BitSearchOptions opts;
  opts.restarts = restarts;
  opts.iters = iters;
  opts.seed = seed;
  const std::vector<double> residuals =
      steering_bit_search(candidate, thetas, opts);
  json out;
  out["format"] = kFormatVersion;
  out["thetas"] = thetas;
  out["residuals"] = residuals;
  std::cout << canonical_dump(out);
  return 0;
}

struct SuiteArgs {
  std::uint64_t seed = 42;
  std::size_t trials = std::numeric_limits<std::size_t>::max();
  std::vector<std::string> suites;
  std::string out_path;
  std::string dump_dir = "suite-failures";
  std::string replay_path;
};

int cmd_suite(const SuiteArgs& args) {
  SuiteConfig cfg;
  cfg.seed = args.seed;
  cfg.trials = args.trials;
  cfg.suites = args.suites;
  cfg.dump_dir = args.dump_dir;

  if (!args.replay_path.empty()) {
    const TrialResult res = replay_trial(args.replay_path, cfg);
    json out;
    out["format"] = kFormatVersion;
    out["pass"] = res.pass;
    out["residual"] = res.residual;
    out["detail"] = res.detail;
    std::cout << canonical_dump(out);
    return res.pass ? 0 : 1;
  }

  const SuiteReport report = run_suites(cfg);
  const json j = report.to_json();
  if (!args.out_path.empty()) save_json(args.out_path, j);
  std::cout << canonical_dump(j);
  return report.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EPR-steering assemblage toolkit"};
  app.require_subcommand(1);
  std::function<int()> run;

  {
    auto* c = app.add_subcommand("inspect", "summarize a JSON artifact");
    auto path = std::make_shared<std::string>();
    c->add_option("file", *path, "artifact file")->required();
    c->callback([run = &run, path] { *run = [path] { return cmd_inspect(*path); }; });
  }
  {
    auto* c = app.add_subcommand(
        "is-lhs", "test membership in the unsteerable set (exit 0/1)");
    auto path = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(1e-6);
    c->add_option("file", *path, "assemblage file")->required();
    c->add_option("--tol", *tol, "membership tolerance");
    c->callback([run = &run, path, tol] {
      *run = [path, tol] { return cmd_is_lhs(*path, *tol); };
    });
  }
  {
    auto* c = app.add_subcommand("measure", "evaluate steering monotones");
    auto args = std::make_shared<MeasureArgs>();
    c->add_option("file", args->path, "assemblage file")->required();
    c->add_flag("--weight", args->weight, "steerable weight");
    c->add_flag("--robustness", args->robustness, "steering robustness");
    c->add_flag("--rel-entropy", args->rel_entropy,
                "relative entropy of steering");
    c->add_option("--restarts", args->restarts, "ascent restarts");
    c->add_option("--rounds", args->rounds, "alternation rounds");
    c->add_option("--weight-witness", args->weight_witness,
                  "save the weight decomposition here");
    c->add_option("--robustness-witness", args->robustness_witness,
                  "save the robustness decomposition here");
    c->add_option("--closest-lhs", args->closest_lhs,
                  "save the nearest unsteerable assemblage here");
    c->callback(
        [run = &run, args] { *run = [args] { return cmd_measure(*args); }; });
  }
  {
    auto* c = app.add_subcommand("apply", "push an assemblage through a map");
    auto snio = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto branch = std::make_shared<int>(-1);
    c->add_option("--snio", *snio, "operation file")->required();
    c->add_option("--in", *in, "input assemblage")->required();
    c->add_option("--out", *out, "output path")->required();
    c->add_option("--branch", *branch, "single branch index (default: all)");
    c->callback([run = &run, snio, in, out, branch] {
      *run = [snio, in, out, branch] {
        return cmd_apply(*snio, *in, *out, *branch);
      };
    });
  }
  {
    auto* c = app.add_subcommand("convert-check",
                                 "decide pure-assemblage convertibility");
    auto from = std::make_shared<std::string>();
    auto to = std::make_shared<std::string>();
    auto wit = std::make_shared<std::string>();
    c->add_option("from", *from, "source assemblage")->required();
    c->add_option("to", *to, "target assemblage")->required();
    c->add_option("--emit-witness", *wit, "save the witness map here");
    c->callback([run = &run, from, to, wit] {
      *run = [from, to, wit] { return cmd_convert_check(*from, *to, *wit); };
    });
  }
  {
    auto* c = app.add_subcommand("gen", "generate a fixture assemblage");
    auto kind = std::make_shared<std::string>("theta");
    auto out = std::make_shared<std::string>();
    auto theta = std::make_shared<double>(0.7853981633974483);
    auto seed = std::make_shared<std::uint64_t>(7);
    c->add_option("--kind", *kind,
                  "singlet-xz | theta | random-lhs | random-steerable");
    c->add_option("--out", *out, "output path")->required();
    c->add_option("--theta", *theta, "angle for the theta family");
    c->add_option("--seed", *seed, "generator seed");
    c->callback([run = &run, kind, out, theta, seed] {
      *run = [kind, out, theta, seed] {
        return cmd_gen(*kind, *out, *theta, *seed);
      };
    });
  }
  {
    auto* c = app.add_subcommand(
        "bit-search", "search for maps onto the theta family (exploratory)");
    auto cand = std::make_shared<std::string>();
    auto thetas = std::make_shared<std::string>();
    auto restarts = std::make_shared<std::size_t>(64);
    auto iters = std::make_shared<std::size_t>(300);
    auto seed = std::make_shared<std::uint64_t>(11);
    c->add_option("--candidate", *cand, "candidate assemblage")->required();
    c->add_option("--thetas", *thetas, "comma-separated target angles")
        ->required();
    c->add_option("--restarts", *restarts, "search restarts per angle");
    c->add_option("--iters", *iters, "iterations per restart");
    c->add_option("--seed", *seed, "search seed");
    c->callback([run = &run, cand, thetas, restarts, iters, seed] {
      *run = [cand, thetas, restarts, iters, seed] {
        return cmd_bit_search(*cand, *thetas, *restarts, *iters, *seed);
      };
    });
  }
  {
    auto* c = app.add_subcommand("suite", "run the property suites");
    auto args = std::make_shared<SuiteArgs>();
    c->add_option("--seed", args->seed, "suite seed");
    c->add_option("--trials", args->trials,
                  "override the per-suite trial counts");
    c->add_option("--suite", args->suites, "run only the named suites");
    c->add_option("--out", args->out_path, "save the JSON report here");
    c->add_option("--dump-dir", args->dump_dir,
                  "directory for failing-instance dumps");
    c->add_option("--replay", args->replay_path,
                  "re-run one dumped failure and exit");
    c->callback(
        [run = &run, args] { *run = [args] { return cmd_suite(*args); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return run();
  } catch (const steering::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
