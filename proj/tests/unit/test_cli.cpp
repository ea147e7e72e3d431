#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

const std::string kTmp = HILL_GSE_TEST_TMP;

std::string path(const std::string& name) { return kTmp + "/cli_" + name; }

int run(const std::string& args, const std::string& stdout_file = "/dev/null", const std::string& env = "") {
  const std::string cmd = env + std::string(HILL_GSE_BIN) + " " + args + " > " + stdout_file + " 2> " + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string write(const std::string& name, const std::string& text) {
  const std::string p = path(name);
  std::ofstream(p) << text;
  return p;
}

// Small OU setup so that every command below finishes in seconds.
std::string small_config() {
  return write("small.json",
               R"({"grid_size": 128, "galerkin_modes": 32, "ode_steps": 1024, "n_samples": 300, "seed": 5})");
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("density --config /nonexistent.json") == 1);
    CHECK(run("density --config " + write("bad.json", R"({"seed": "x"})")) == 1);
    CHECK(run("variational --lambdas 3") == 1);
    CHECK(run("tailfit --in /nonexistent.csv") == 1);
  }

  TEST_CASE("numerical failures exit 2 with the module named") {
    // stderr larger than the estimate: the tail fit refuses the table
    std::ostringstream table;
    table << "# config: {}\nlambda,f_hat,stderr,n_eff,tilt_theta\n";
    for (int i = 0; i < 7; ++i) table << 3.0 + 0.5 * i << ",1e-9,1e-8,10,0\n";
    CHECK(run("tailfit --in " + write("noisy.csv", table.str()) + " --side right") == 2);
    CHECK(slurp(path("stderr.txt")).find("numerical error [montecarlo]") != std::string::npos);
  }

  TEST_CASE("verify passes with the default config") {
    CHECK(run("verify --config default --cases 10", path("verify.txt")) == 0);
    const std::string table = slurp(path("verify.txt"));
    CHECK(table.find("FAIL") == std::string::npos);
    CHECK(table.find("PASS") != std::string::npos);
  }

  TEST_CASE("eig and phi report JSON") {
    std::string zeros;
    for (int j = 0; j < 128; ++j) zeros += "0\n";
    const std::string pot = write("zero.txt", zeros);
    CHECK(run("eig --potential " + pot, path("eig.json")) == 0);
    const json e = json::parse(slurp(path("eig.json")));
    CHECK(std::abs(e.at("lambda0").get<double>()) < 1e-12);
    CHECK(e.at("run").contains("config_hash"));
    CHECK(e.at("run").contains("wall_clock_seconds"));
    CHECK(run("phi --potential " + pot, path("phi.json")) == 0);
    CHECK(std::abs(json::parse(slurp(path("phi.json"))).at("phi").get<double>()) < 1e-12);
  }

  TEST_CASE("density output is identical across runs and thread counts") {
    const std::string cfg = small_config();
    const std::string args = "density --config " + cfg + " --lambda-min -2 --lambda-max 2 --step 1 --n 200";
    REQUIRE(run(args + " --threads 1 --out " + path("d1.csv")) == 0);
    REQUIRE(run(args + " --threads 1 --out " + path("d1b.csv")) == 0);
    REQUIRE(run(args + " --threads 3 --out " + path("d3.csv")) == 0);
    const std::string a = slurp(path("d1.csv"));
    CHECK(a.find("# config_hash: ") != std::string::npos);
    CHECK(a.find("lambda,f_hat,stderr,n_eff,tilt_theta") != std::string::npos);
    CHECK(a == slurp(path("d1b.csv")));
    CHECK(a == slurp(path("d3.csv")));
    const json side = json::parse(slurp(path("d1.csv.run.json")));
    CHECK(side.contains("wall_clock_seconds"));
  }

  TEST_CASE("seed precedence: flag over environment over config") {
    const std::string cfg = small_config();
    const std::string args = "sample --config " + cfg + " --n 2";
    REQUIRE(run(args, path("s_cfg.csv")) == 0);
    REQUIRE(run(args + " --seed 5", path("s_flag.csv")) == 0);
    CHECK(slurp(path("s_cfg.csv")) == slurp(path("s_flag.csv")));
    REQUIRE(run(args, path("s_env.csv"), "HILL_GSE_SEED=6 ") == 0);
    REQUIRE(run(args + " --seed 5", path("s_both.csv"), "HILL_GSE_SEED=6 ") == 0);
    CHECK(slurp(path("s_both.csv")) == slurp(path("s_cfg.csv")));
    const std::string env = slurp(path("s_env.csv"));
    CHECK(env.find("# seed: 6") != std::string::npos);
    CHECK(env != slurp(path("s_cfg.csv")));
  }

  TEST_CASE("tailfit on the constant kernel recovers 1/2") {
    const std::string cfg = write("unit.json", R"({"grid_size": 128, "kernel": {"type": "coeffs", "values": [1.0]}})");
    REQUIRE(run("density --config " + cfg + " --lambda-min 3 --lambda-max 6 --step 0.5 --n 20 --out " +
                path("const.csv")) == 0);
    REQUIRE(run("tailfit --in " + path("const.csv") + " --side right", path("fit.json")) == 0);
    const json f = json::parse(slurp(path("fit.json")));
    CHECK(std::abs(f.at("rate_hat").get<double>() - 0.5) < 0.02);
    CHECK(f.at("target").get<double>() == doctest::Approx(0.5));
    CHECK(run("tailfit --in " + path("const.csv") + " --side right --window 3:4") == 1);
  }

  TEST_CASE("dist and variational produce results") {
    const std::string cfg = small_config();
    CHECK(run("dist --config " + cfg + " --lambda -1,0 --n 50 --method direct", path("dist.json")) == 0);
    const json d = json::parse(slurp(path("dist.json")));
    CHECK(d.at("p_hat").size() == 2);
    CHECK(run("variational --config " + cfg + " --lambdas -2,-4 --out " + path("var.csv")) == 0);
    CHECK(slurp(path("var.csv")).find("lambda,J_over_lambda2,target,eig_residual,iters") != std::string::npos);
  }
}
