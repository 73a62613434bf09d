// Drives the installed binary end to end: exit codes, output formats,
// determinism. The binary path arrives via --cli-bin (see CMakeLists).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_cli_bin;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = g_cli_bin + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    result.output.append(buf.data(), got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/unisort_test_") + name;
}

}  // namespace

TEST_CASE("sort-demo prints the expected permutation") {
  const RunResult r = run_cli("sort-demo 9 1 5 2");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("sort permutation: [1, 3, 4, 2]") != std::string::npos);
  CHECK(r.output.find("hard projection: [1, 3, 4, 2]") != std::string::npos);
  CHECK(r.output.find("unimodal=true") != std::string::npos);
}

TEST_CASE("sort-demo json mode emits the relaxed matrix near identity at tiny tau") {
  const RunResult r = run_cli("sort-demo --tau 0.001 --json 1 0");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"projection\"") != std::string::npos);
  // relaxed matrix is [[1,0],[0,1]] to within 1e-6, so 1.0 appears verbatim
  CHECK(r.output.find("1.0") != std::string::npos);
}

TEST_CASE("sort-demo rejects bad input with a usage error") {
  CHECK(run_cli("sort-demo --tau -1 1 0").exit_code == 1);
  CHECK(run_cli("sort-demo").exit_code == 1);           // missing scores
  CHECK(run_cli("sort-demo 1 2 --tau nope").exit_code == 1);
  CHECK(run_cli("definitely-not-a-command").exit_code == 1);
}

TEST_CASE("pl-check reports a small TV distance for s = 3 2 1") {
  const RunResult r = run_cli("pl-check 3 2 1 --samples 20000 --seed 7");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("tv_distance=") != std::string::npos);
  CHECK(r.output.find("chi_squared=") != std::string::npos);
  // six table rows, one per permutation
  std::size_t rows = 0, pos = 0;
  while ((pos = r.output.find("[", pos)) != std::string::npos) {
    ++rows;
    ++pos;
  }
  CHECK(rows >= 6);
}

TEST_CASE("pl-check capacity and precondition errors") {
  CHECK(run_cli("pl-check 1 2 3 4 5 6 7 --samples 10").exit_code == 1);  // n > 6
  CHECK(run_cli("pl-check 1 0 --samples 10").exit_code == 1);            // non-positive score
}

TEST_CASE("pl-check is deterministic per seed") {
  const std::string args = "pl-check 3 2 1 --samples 5000 --seed 11 --json";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
}

TEST_CASE("train writes a CSV curve and metric JSON, reproducibly") {
  const std::string csv = temp_path("sort_curve.csv");
  const std::string args = "train sort --n 4 --d 3 --count 48 --epochs 2 --lr 0.5 --tau 2 "
                           "--seed 5 --out " + csv;
  const RunResult a = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.output.find("exact_perm_accuracy") != std::string::npos);
  const std::string csv_a = slurp(csv);
  CHECK(csv_a.rfind("epoch,train_loss,valid_metric\n", 0) == 0);

  const RunResult b = run_cli(args);
  CHECK(b.output == a.output);
  CHECK(slurp(csv) == csv_a);
}

TEST_CASE("train honors config files and rejects unknown keys") {
  const std::string cfg_path = temp_path("train.cfg");
  {
    std::ofstream cfg(cfg_path);
    cfg << "# desk-scale smoke config\n";
    cfg << "n = 4\nd = 3\ncount = 48\nepochs = 2\nlr = 0.5\ntau = 2\nseed = 5\n";
    cfg << "out = " << temp_path("cfg_curve.csv") << "\n";
  }
  const RunResult ok = run_cli("train sort --config " + cfg_path);
  CHECK(ok.exit_code == 0);

  // flag overrides config: epochs=1 yields a shorter curve
  const RunResult overridden = run_cli("train sort --config " + cfg_path + " --epochs 1");
  CHECK(overridden.exit_code == 0);
  const std::string curve = slurp(temp_path("cfg_curve.csv"));
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 2);  // header + one epoch

  {
    std::ofstream cfg(cfg_path);
    cfg << "bogus_key = 1\n";
  }
  CHECK(run_cli("train sort --config " + cfg_path).exit_code == 1);
}

TEST_CASE("train usage errors") {
  CHECK(run_cli("train").exit_code == 1);                       // missing task
  CHECK(run_cli("train pottery --epochs 1").exit_code == 1);    // unknown task
  CHECK(run_cli("train sort --mode wat --epochs 1").exit_code == 1);
  CHECK(run_cli("train sort --epochs 0").exit_code == 1);
}

TEST_CASE("UNISORT_SEED is the fallback seed source") {
  const std::string csv1 = temp_path("env_seed_a.csv");
  const std::string csv2 = temp_path("env_seed_b.csv");
  const std::string base = "train sort --n 4 --d 3 --count 32 --epochs 1 --lr 0.5 --tau 2 --out ";
  const std::string cmd1 = "env UNISORT_SEED=99 " + g_cli_bin + " " + base + csv1;
  const std::string cmd2 = "env UNISORT_SEED=99 " + g_cli_bin + " " + base + csv2;
  CHECK(std::system((cmd1 + " >/dev/null 2>&1").c_str()) == 0);
  CHECK(std::system((cmd2 + " >/dev/null 2>&1").c_str()) == 0);
  CHECK(slurp(csv1) == slurp(csv2));

  // explicit --seed beats the environment
  const std::string csv3 = temp_path("env_seed_c.csv");
  const std::string cmd3 = "env UNISORT_SEED=123 " + g_cli_bin + " " + base + csv3 + " --seed 99";
  CHECK(std::system((cmd3 + " >/dev/null 2>&1").c_str()) == 0);
  CHECK(slurp(csv3) == slurp(csv1));
}

TEST_CASE("variance-sweep emits one row per temperature plus a summary") {
  const std::string csv = temp_path("sweep.csv");
  const RunResult r =
      run_cli("variance-sweep --samples 64 --seed 3 --n 4 --d 3 --out " + csv);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("monotone_non_increasing=") != std::string::npos);
  const std::string body = slurp(csv);
  CHECK(body.rfind("tau,log_variance\n", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 6);  // header + 5 default taus

  const RunResult again =
      run_cli("variance-sweep --samples 64 --seed 3 --n 4 --d 3 --out " + csv);
  CHECK(again.output == r.output);
}

TEST_CASE("validate passes on a clean build") {
  const RunResult r = run_cli("validate --seed 42");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("FAIL") == std::string::npos);
  for (const char* name : {"unimodality-fuzz", "limit-convergence", "sort-identities",
                           "pmf-normalization", "gradient-checks", "sampler-coupling"})
    CHECK(r.output.find(name) != std::string::npos);
}

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli-bin") g_cli_bin = argv[i + 1];
  if (g_cli_bin.empty()) {
    const char* env = std::getenv("UNISORT_CLI_BIN");
    if (env) g_cli_bin = env;
  }
  if (g_cli_bin.empty()) {
    std::fprintf(stderr, "test_cli: pass --cli-bin <path> or set UNISORT_CLI_BIN\n");
    return 1;
  }
  doctest::Context context;
  context.applyCommandLine(1, argv);  // doctest flags unused; path already captured
  return context.run();
}
