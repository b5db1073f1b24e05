#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "topolow_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd " + work_dir().string() + " && " + env + " " + TOPOLOW_CLI_PATH + " " + args +
                          " > last_stdout.txt 2> last_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(work_dir() / p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(work_dir() / p) << text; }

// Small simulated bundle shared by the tests below.
void ensure_data() {
  static bool done = false;
  if (done) return;
  REQUIRE(cli("--seed 4 simulate --m 14 --clusters 2 --fraction 0.2 --out data") == 0);
  done = true;
}

const char* kTinyBudget = "--initial 3 --amc-rounds 1 --batch 2 --folds 3 --dim-max 3 --max-iterations 200";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("version and usage errors") {
    CHECK(cli("--version") == 0);
    CHECK(slurp("last_stdout.txt").find("topolow 0.1.0") != std::string::npos);
    CHECK(cli("--help") == 0);
    CHECK(cli("") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("simulate --m notanumber") == 2);
    CHECK(cli("euclidify missing.csv") == 2);
  }

  TEST_CASE("simulate writes the bundle and masks the expected pair count") {
    CHECK(cli("--seed 1 simulate --out sim") == 0);
    for (const char* f : {"truth.csv", "input.csv", "coords.csv", "params.json", "manifest.json"})
      CHECK(fs::exists(work_dir() / "sim" / f));
    CHECK(slurp("sim/manifest.json").find("\"masked_pairs\": 367") != std::string::npos);
    const auto first = slurp("sim/input.csv");
    CHECK(cli("--seed 1 simulate --out sim") == 0);
    CHECK(slurp("sim/input.csv") == first);
    CHECK(cli("simulate --fraction 1.5 --out bad") == 2);
  }

  TEST_CASE("input errors map to exit codes") {
    write("garbage.csv", ",a,b\na,0,zz\nb,1,0\n");
    CHECK(cli("euclidify garbage.csv --dim 2 --k0 1 --c0 0.01 --alpha 0.01 --out g") == 2);
    CHECK(slurp("last_stderr.txt").find("line 2") != std::string::npos);
    write("negative.csv", ",a,b\na,0,-1\nb,1,0\n");
    CHECK(cli("euclidify negative.csv --dim 2 --k0 1 --c0 0.01 --alpha 0.01 --out g") == 3);
    write("ok.csv", ",a,b\na,0,1\nb,1,0\n");
    CHECK(cli("euclidify ok.csv --dim 2 --k0 1 --out g") == 2);
    CHECK(cli("euclidify ok.csv --dim 2 --k0 1 --c0 0.01 --alpha 2 --out g") == 2);
    CHECK(cli("euclidify ok.csv --transform log --out g") == 2);
  }

  TEST_CASE("euclidify with fixed hyperparameters is byte-stable") {
    ensure_data();
    const std::string args = "--seed 3 euclidify data/input.csv --dim 2 --k0 2 --c0 0.01 --alpha 0.02 --out fixed";
    REQUIRE(cli(args) == 0);
    const auto coords = slurp("fixed/coordinates.csv");
    const auto meta = slurp("fixed/fit.json");
    CHECK(lines(coords) == 15);
    CHECK(meta.find("\"searched\": false") != std::string::npos);
    REQUIRE(cli(args) == 0);
    CHECK(slurp("fixed/coordinates.csv") == coords);
    CHECK(slurp("fixed/fit.json") == meta);
  }

  TEST_CASE("search and euclidify with search") {
    ensure_data();
    const std::string s = std::string("--seed 5 search data/input.csv ") + kTinyBudget + " --out srch";
    REQUIRE(cli(s) == 0);
    const auto history = slurp("srch/history.csv");
    const auto theta = slurp("srch/theta.json");
    CHECK(lines(history) == 1 + 5);
    CHECK(history.rfind("N,k0,c0,alpha,cv_log_likelihood,fold_mae_1,fold_mae_2,fold_mae_3\n", 0) == 0);
    REQUIRE(cli(s) == 0);
    CHECK(slurp("srch/history.csv") == history);
    CHECK(slurp("srch/theta.json") == theta);

    REQUIRE(cli("search data/input.csv --initial 1 --amc-rounds 0 --folds 3 --out one") == 0);
    CHECK(lines(slurp("one/history.csv")) == 2);

    const std::string e = std::string("--seed 5 euclidify data/input.csv ") + kTinyBudget + " --out full";
    REQUIRE(cli(e) == 0);
    const auto coords = slurp("full/coordinates.csv");
    CHECK(lines(slurp("full/search_history.csv")) == 6);
    REQUIRE(cli(e) == 0);
    CHECK(slurp("full/coordinates.csv") == coords);
  }

  TEST_CASE("evaluate") {
    ensure_data();
    REQUIRE(cli("--seed 3 euclidify data/input.csv --dim 2 --k0 2 --c0 0.01 --alpha 0.02 --out ev_fit") == 0);
    REQUIRE(cli("evaluate data/truth.csv ev_fit/coordinates.csv --svg --out ev") == 0);
    const auto report = slurp("ev/report.csv");
    CHECK(report.rfind("method,normalized_stress,pearson_r,r_squared,deviation_score,n_pairs\n", 0) == 0);
    CHECK(report.find(",91\n") != std::string::npos);
    CHECK(lines(slurp("ev/shepard.csv")) == 1 + 91);
    CHECK(slurp("ev/shepard.svg").find("<svg") != std::string::npos);
    REQUIRE(cli("evaluate data/truth.csv ev_fit/coordinates.csv --svg --out ev") == 0);
    CHECK(slurp("ev/report.csv") == report);

    // A symmetric truth against itself as a distance matrix is a perfect fit.
    write("sym.csv", ",a,b,c\na,0,3,5\nb,3,0,4\nc,5,4,0\n");
    REQUIRE(cli("evaluate sym.csv sym.csv --kind matrix --out self") == 0);
    CHECK(slurp("self/report.csv").find("topolow,0,1,1,") != std::string::npos);

    write("other.csv", "label,dim_1\nx,0\ny,1\n");
    CHECK(cli("evaluate data/truth.csv other.csv --out mismatch") == 2);
  }

  TEST_CASE("seed from the environment and replay") {
    ensure_data();
    const std::string args = "euclidify data/input.csv --dim 2 --k0 2 --c0 0.01 --alpha 0.02 --out ";
    REQUIRE(cli(args + "env_a", "EUCLIDIFY_SEED=9") == 0);
    REQUIRE(cli("--seed 9 " + args + "env_b") == 0);
    CHECK(slurp("env_a/coordinates.csv") == slurp("env_b/coordinates.csv"));
    const auto manifest = slurp("env_a/manifest.json");
    CHECK(manifest.find("\"seed_source\": \"EUCLIDIFY_SEED\"") != std::string::npos);

    REQUIRE(cli("replay env_a/manifest.json --out env_replay") == 0);
    CHECK(slurp("env_replay/coordinates.csv") == slurp("env_a/coordinates.csv"));
    CHECK(cli("replay nowhere.json") == 2);
  }

  TEST_CASE("similarity input with the identity transform") {
    // Similarities 10 - d give back d when every column peaks on its diagonal.
    write("dis.csv", ",a,b,c\na,0,3,5\nb,3,0,4\nc,5,4,0\n");
    write("sim.csv", ",a,b,c\na,10,7,5\nb,7,10,6\nc,5,6,10\n");
    const std::string fixed = " --dim 2 --k0 1 --c0 0.01 --alpha 0.01";
    REQUIRE(cli("--seed 2 euclidify dis.csv" + fixed + " --out from_dis") == 0);
    REQUIRE(cli("--seed 2 euclidify sim.csv --similarity --transform identity" + fixed + " --out from_sim") == 0);
    CHECK(slurp("from_dis/coordinates.csv") == slurp("from_sim/coordinates.csv"));
  }

  TEST_CASE("bench is byte-stable") {
    const std::string args =
        "--seed 7 bench --preset compare --m 10 --clusters 2 --datasets 2 --replicates 2 --initial 2 --amc-rounds 0 "
        "--folds 2 --dim-max 3 --max-iterations 100 --out bench_out";
    REQUIRE(cli(args) == 0);
    fs::path dir;
    for (const auto& e : fs::directory_iterator(work_dir() / "bench_out")) dir = e.path();
    REQUIRE(!dir.empty());
    const auto rel = fs::relative(dir, work_dir());
    const auto results = slurp(rel / "results.csv");
    const auto summary = slurp(rel / "summary.csv");
    CHECK(lines(results) == 1 + 8);
    REQUIRE(cli(args) == 0);
    CHECK(slurp(rel / "results.csv") == results);
    CHECK(slurp(rel / "summary.csv") == summary);
  }
}
