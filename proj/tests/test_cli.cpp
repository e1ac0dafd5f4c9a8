#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(GATEBENCH_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

std::string temp_path(const std::string& name) {
  return std::string("/tmp/gatebench_cli_test_") + name;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("help and bad invocations") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("epg").exit_code == 2);  // missing required --chi
}

TEST_CASE("fidelity subcommand reports one-decimal percentages") {
  const CliResult r = run_cli("fidelity --chi " + fixture("experiment_chi.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("process fidelity: 78.2%") != std::string::npos);
  CHECK(r.out.find("average fidelity: 82.6%") != std::string::npos);
}

TEST_CASE("fidelity against a second process matrix") {
  const CliResult r = run_cli("fidelity --chi " + fixture("experiment_chi.json") + " --other " +
                              fixture("experiment_chi.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("process fidelity:") != std::string::npos);
}

TEST_CASE("missing input file exits with the input-error code") {
  CHECK(run_cli("fidelity --chi /nonexistent/chi.json").exit_code == 2);
  CHECK(run_cli("reconstruct --counts /nonexistent.csv").exit_code == 2);
}

TEST_CASE("epg subcommand prints bounds and threshold verdicts") {
  const CliResult r =
      run_cli("epg --chi " + fixture("experiment_chi.json") + " --delta-points 6");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("lower bound: 0.218") != std::string::npos);
  CHECK(r.out.find("noise-added upper estimate:") != std::string::npos);
  CHECK(r.out.find("threshold knill-3pct") != std::string::npos);
  CHECK(r.out.find("threshold aliferis-gottesman-preskill") != std::string::npos);
}

TEST_CASE("epg reruns are byte-identical") {
  const std::string out1 = temp_path("bounds1.json");
  const std::string out2 = temp_path("bounds2.json");
  const std::string base = "epg --chi " + fixture("experiment_chi.json") +
                           " --delta-points 5 --restarts 2 --optimize --out ";
  REQUIRE(run_cli(base + out1).exit_code == 0);
  REQUIRE(run_cli(base + out2).exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));
  std::remove(out1.c_str());
  std::remove(out2.c_str());
}

TEST_CASE("reconstruct from the sampled fixture") {
  const std::string out = temp_path("rec_chi.json");
  const CliResult r = run_cli("reconstruct --counts " + fixture("experiment_counts.csv") +
                              " --method linear --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("process fidelity vs ideal:") != std::string::npos);

  // the written file is a valid input again
  const CliResult again = run_cli("fidelity --chi " + out);
  CHECK(again.exit_code == 0);
  std::remove(out.c_str());
}

TEST_CASE("coherence subcommand writes a labeled table") {
  const std::string out = temp_path("coherence.csv");
  const CliResult r =
      run_cli("coherence --chi " + fixture("experiment_chi.json") + " --out " + out);
  CHECK(r.exit_code == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("element,II',IX'", 0) == 0);
  CHECK(r.out.find("mean coherence over populated pairs:") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("simulate with all imperfections off reproduces the ideal gate") {
  const std::string out = temp_path("sim_chi.json");
  const CliResult r =
      run_cli("simulate --source off --gate off --loss off --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("process fidelity vs ideal: 100.0%") != std::string::npos);

  const CliResult check = run_cli("epg --chi " + out + " --delta-points 4");
  CHECK(check.exit_code == 0);
  std::remove(out.c_str());
}

TEST_CASE("simulate emits a counts table usable by reconstruct") {
  const std::string counts = temp_path("sim_counts.csv");
  const CliResult r = run_cli(
      "--seed 11 simulate --source off --gate off --loss off --shots 5000 --counts-out " +
      counts);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("5000 expected total events") != std::string::npos);

  const CliResult rec = run_cli("reconstruct --counts " + counts + " --method linear");
  CHECK(rec.exit_code == 0);
  CHECK(rec.out.find("process fidelity vs ideal:") != std::string::npos);
  std::remove(counts.c_str());
}

TEST_CASE("global options are accepted after the subcommand") {
  const std::string counts = temp_path("sim_counts_trailing.csv");
  // --shots scales to expected total events, so even the tiny raw fourfold
  // probabilities of the lossy multi-pair model produce a usable table
  const CliResult r = run_cli("simulate --source on --loss on --shots 20000 --counts-out " +
                              counts + " --seed 7");
  CHECK(r.exit_code == 0);

  std::ifstream in(counts);
  std::string line;
  std::getline(in, line);  // header
  double total = 0.0;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    REQUIRE(pos != std::string::npos);
    total += std::stod(line.substr(pos + 1));
  }
  CHECK(total > 10000.0);
  CHECK(total < 40000.0);
  std::remove(counts.c_str());
}

TEST_CASE("quiet mode silences informational output") {
  const CliResult r =
      run_cli("--quiet fidelity --chi " + fixture("experiment_chi.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.empty());
}
