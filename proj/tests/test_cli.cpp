#include <catch2/catch_amalgamated.hpp>

#include <steering/json_io.hpp>
#include <steering/snio.hpp>
#include <steering/suite.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace steering;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

std::string cli_binary() {
  const char* env = std::getenv("STEERING_CLI");
  REQUIRE(env != nullptr);
  return env;
}

CliResult run_cli(const std::string& args, bool keep_stderr = false) {
  const std::string cmd =
      cli_binary() + " " + args + (keep_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
    res.out.append(buf.data(), n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

struct TmpDir {
  std::filesystem::path dir;
  TmpDir() : dir("cli-test-tmp") { std::filesystem::create_directories(dir); }
  ~TmpDir() { std::filesystem::remove_all(dir); }
  std::string operator/(const std::string& name) const {
    return (dir / name).string();
  }
};

}  // namespace

TEST_CASE("gen writes byte-stable canonical fixtures") {
  TmpDir tmp;
  const std::string f1 = tmp / "a.json";
  const std::string f2 = tmp / "b.json";
  REQUIRE(run_cli("gen --kind singlet-xz --out " + f1).exit_code == 0);
  REQUIRE(run_cli("gen --kind singlet-xz --out " + f2).exit_code == 0);
  REQUIRE(slurp(f1) == slurp(f2));

  const Assemblage parsed = read_assemblage(f1);
  REQUIRE(parsed.outputs() == 2);

  // the interface accepts a bare angle invocation
  REQUIRE(run_cli("gen --theta 0.6 --out " + (tmp / "t.json")).exit_code == 0);
  REQUIRE(read_assemblage(tmp / "t.json").dim() == 2);
}

TEST_CASE("gen seeds are reproducible and kinds validated") {
  TmpDir tmp;
  const std::string f1 = tmp / "r1.json";
  const std::string f2 = tmp / "r2.json";
  REQUIRE(run_cli("gen --kind random-steerable --seed 7 --out " + f1)
              .exit_code == 0);
  REQUIRE(run_cli("gen --kind random-steerable --seed 7 --out " + f2)
              .exit_code == 0);
  REQUIRE(slurp(f1) == slurp(f2));
  REQUIRE(run_cli("gen --kind nonsense --out " + (tmp / "x.json")).exit_code ==
          2);
}

TEST_CASE("is-lhs separates members from steerers via exit codes") {
  TmpDir tmp;
  const std::string local = tmp / "local.json";
  const std::string steer = tmp / "steer.json";
  REQUIRE(run_cli("gen --kind random-lhs --seed 7 --out " + local).exit_code ==
          0);
  REQUIRE(run_cli("gen --kind singlet-xz --out " + steer).exit_code == 0);

  const CliResult member = run_cli("is-lhs " + local);
  REQUIRE(member.exit_code == 0);
  const json jm = json::parse(member.out);
  REQUIRE(jm.at("is_member").get<bool>());
  REQUIRE(jm.at("margin").get<double>() <= 1e-6);

  const CliResult non = run_cli("is-lhs " + steer);
  REQUIRE(non.exit_code == 1);
  const json jn = json::parse(non.out);
  REQUIRE_FALSE(jn.at("is_member").get<bool>());
  REQUIRE(jn.at("margin").get<double>() > 0.1);

  // loosening the tolerance beyond the margin flips the verdict
  REQUIRE(run_cli("is-lhs --tol 2.0 " + steer).exit_code == 0);
}

TEST_CASE("measure reports values and optional witness files") {
  TmpDir tmp;
  const std::string f = tmp / "s.json";
  REQUIRE(run_cli("gen --kind singlet-xz --out " + f).exit_code == 0);

  const std::string wfile = tmp / "w.json";
  const CliResult res = run_cli("measure --weight --robustness " + f +
                                " --weight-witness " + wfile);
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  REQUIRE(j.at("weight").at("value").get<double>() ==
          Catch::Approx(1.0).margin(1e-6));
  REQUIRE(j.at("robustness").at("value").get<double>() ==
          Catch::Approx(0.171572873548).margin(1e-6));
  REQUIRE_FALSE(j.contains("rel_entropy"));

  const json w = load_json(j.at("weight").at("witness_file").get<std::string>());
  REQUIRE(w.at("nu").get<double>() ==
          Catch::Approx(j.at("weight").at("value").get<double>()));
  REQUIRE_NOTHROW(assemblage_from_json(w.at("lhs_part")));
}

TEST_CASE("measure covers the entropy estimate on request") {
  TmpDir tmp;
  const std::string f = tmp / "s.json";
  REQUIRE(run_cli("gen --kind random-lhs --seed 3 --out " + f).exit_code == 0);
  const CliResult res =
      run_cli("measure --rel-entropy --restarts 2 --rounds 1 " + f);
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  REQUIRE(j.at("rel_entropy").at("lower_bound").get<double>() <= 1e-5);
  REQUIRE(j.at("rel_entropy").contains("status"));
}

TEST_CASE("apply pushes assemblages through operation files") {
  TmpDir tmp;
  const std::string in = tmp / "in.json";
  const std::string op = tmp / "op.json";
  const std::string out = tmp / "out.json";
  REQUIRE(run_cli("gen --kind singlet-xz --out " + in).exit_code == 0);
  save_json(op, to_json(identity_snio(2, 2, 2)));

  REQUIRE(run_cli("apply --snio " + op + " --in " + in + " --out " + out)
              .exit_code == 0);
  const Assemblage a = read_assemblage(in);
  const Assemblage b = read_assemblage(out);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t o = 0; o < 2; ++o)
      REQUIRE((a.member(o, x) - b.member(o, x)).frobenius() < 1e-12);

  REQUIRE(run_cli("apply --snio " + op + " --in " + in + " --out " + out +
                  " --branch 0")
              .exit_code == 0);
  REQUIRE(run_cli("apply --snio " + op + " --in " + in + " --out " + out +
                  " --branch 5")
              .exit_code == 2);
}

TEST_CASE("convert-check decides the angle grid and emits witnesses") {
  TmpDir tmp;
  const std::string a = tmp / "a.json";
  const std::string b = tmp / "b.json";
  const std::string w = tmp / "w.json";
  REQUIRE(run_cli("gen --theta 0.5 --out " + a).exit_code == 0);
  REQUIRE(run_cli("gen --theta 1.0 --out " + b).exit_code == 0);

  const CliResult same =
      run_cli("convert-check " + a + " " + a + " --emit-witness " + w);
  REQUIRE(same.exit_code == 0);
  const json js = json::parse(same.out);
  REQUIRE(js.at("convertible").get<bool>());
  REQUIRE(js.at("witness_file").get<std::string>() == w);
  REQUIRE_NOTHROW(read_snio(w));

  const CliResult diff = run_cli("convert-check " + a + " " + b);
  REQUIRE(diff.exit_code == 1);
  REQUIRE_FALSE(json::parse(diff.out).at("convertible").get<bool>());
}

TEST_CASE("bit-search reports residuals for each angle") {
  TmpDir tmp;
  const std::string f = tmp / "c.json";
  REQUIRE(run_cli("gen --theta 0.7853981633974483 --out " + f).exit_code == 0);
  const CliResult res = run_cli(
      "bit-search --candidate " + f +
      " --thetas 0.7853981633974483 --restarts 1 --iters 5 --seed 11");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  REQUIRE(j.at("residuals").size() == 1);
  REQUIRE(j.at("residuals").at(0).get<double>() < 1e-6);
}

TEST_CASE("suite subcommand runs, saves, and replays") {
  TmpDir tmp;
  const std::string report = tmp / "report.json";
  const CliResult run = run_cli("suite --trials 1 --suite lhs-zero --out " +
                                report + " --dump-dir " + (tmp / "dumps"));
  REQUIRE(run.exit_code == 0);
  const json j = json::parse(run.out);
  REQUIRE(j.at("all_passed").get<bool>());
  REQUIRE(json::parse(slurp(report)) == j);

  const std::string record = tmp / "record.json";
  save_json(record, replay_record("lhs-zero", 0, 42));
  const CliResult replay = run_cli("suite --replay " + record);
  REQUIRE(replay.exit_code == 0);
  REQUIRE(json::parse(replay.out).at("pass").get<bool>());
}

TEST_CASE("usage errors exit with code 2") {
  REQUIRE(run_cli("no-such-command").exit_code == 2);
  REQUIRE(run_cli("is-lhs").exit_code == 2);  // missing required argument
  REQUIRE(run_cli("is-lhs does-not-exist.json").exit_code == 2);
  REQUIRE(run_cli("").exit_code == 2);  // a subcommand is required
}
