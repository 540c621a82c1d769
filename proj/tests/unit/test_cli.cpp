#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string cli() {
  if (const char* p = std::getenv("REGRAPH_CLI")) return p;
  return REGRAPH_CLI_DEFAULT;
}

int run(const std::string& args) {
  const std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / ("regraph_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("simulate writes every artifact and is reproducible") {
  const fs::path a = scratch("a"), b = scratch("b");
  const std::string flags = "simulate --n 100 --m 2 --k 0 --c 0.5 --slots 64 --seed 7 --out-dir ";
  CHECK(run(flags + a.string()) == 0);
  CHECK(run(flags + b.string()) == 0);
  for (const char* f : {"graph.txt", "rfa.txt", "decomposition.txt", "delivery.csv", "summary.csv", "repair.csv"}) {
    CHECK_MESSAGE(fs::exists(a / f), std::string(f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "summary.csv").rfind("peer,flow,distance,steady_delay,connected\n", 0) == 0);
  CHECK(slurp(a / "graph.txt").rfind("100 2\n", 0) == 0);
}

TEST_CASE("invalid configurations exit 2") {
  const std::string out = " --out-dir " + scratch("bad").string();
  CHECK(run("simulate --n 0 --seed 1" + out) == 2);
  CHECK(run("simulate --n 10 --c 1.5 --seed 1" + out) == 2);
  CHECK(run("simulate --n 10 --m -1 --seed 1" + out) == 2);
  CHECK(run("simulate --n 10 --k -1 --seed 1" + out) == 2);
  CHECK(run("simulate --n 10" + out) == 2);
  CHECK(run("verify nonsense" + out) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("simulate --churn-file /nonexistent/script --seed 1" + out) == 2);
}

TEST_CASE("churn scripts drive simulate") {
  const fs::path dir = scratch("churn");
  {
    std::ofstream s(dir / "ok.txt");
    s << "join\njoin\njoin\nleave 3\njoin\n";
    std::ofstream t(dir / "source.txt");
    t << "join\nleave 1\n";
  }
  CHECK(run("simulate --seed 2 --churn-file " + (dir / "ok.txt").string() + " --out-dir " + dir.string()) == 0);
  CHECK(slurp(dir / "graph.txt").rfind("4 2\n", 0) == 0);
  CHECK(run("simulate --seed 2 --churn-file " + (dir / "source.txt").string() + " --out-dir " + dir.string()) == 2);
}

TEST_CASE("verify writes a JSON report and reports failures in the exit code") {
  const fs::path dir = scratch("verify");
  CHECK(run("verify delay --replicas 3 --out-dir " + dir.string()) == 0);
  const std::string report = slurp(dir / "report-delay.json");
  CHECK(report.find("\"delay-equals-distance\"") != std::string::npos);
  const int degenerate = run("verify uniformity --n 3 --replicas 1 --out-dir " + dir.string());
  CHECK((degenerate == 0 || degenerate == 1));
}

TEST_CASE("sweep honours the K list and the output directory variable") {
  const fs::path dir = scratch("sweep");
  const std::string cmd = "REGRAPH_OUT_DIR=" + dir.string() + " " + cli() +
                          " sweep --n 10 31 --k 0 --replicas 3 --seed 4 > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);
  CHECK(fs::exists(dir / "mean_disconnected.csv"));
  CHECK(fs::exists(dir / "mean_max_delay.csv"));
  fs::remove_all(dir.parent_path());
}
