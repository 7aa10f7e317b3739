#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(NONHOLO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return {WEXITSTATUS(rc)};
}

fs::path temp_dir() {
    static int counter = 0;
    fs::path d = fs::temp_directory_path() / ("nonholo_cli_" + std::to_string(::getpid()) + "_" +
                                              std::to_string(counter++));
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kChaplyginCfg = R"(system = chaplygin
chaplygin.I1 = 2.0
chaplygin.I3 = 1.0
chaplygin.m = 1.0
chaplygin.R = 1.0
integrate.step = 1e-3
integrate.t_end = 1.0
state.q = 0.4, 1.1, 0.7, 0.0, 0.0
state.pi = 0.6, 0.3, -0.4
seed = 42
)";

const char* kRevolutionCfg = R"(system = revolution
revolution.profile = sphere
revolution.radius = 1.0
revolution.I1 = 2.0
revolution.I3 = 1.0
revolution.m = 1.0
integrate.step = 1e-3
integrate.t_end = 1.0
seed = 42
)";

} // namespace

TEST_CASE("simulate writes a trajectory and a summary") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const std::string out = (dir / "traj").string();
    const CliResult r =
        run_cli("simulate --config " + (dir / "chap.cfg").string() + " --output " + out);
    CHECK(r.exit_code == 0);
    REQUIRE(fs::exists(dir / "traj.csv"));
    REQUIRE(fs::exists(dir / "traj.json"));
    const std::string csv = slurp(dir / "traj.csv");
    CHECK(csv.rfind("t,phi,theta,psi,x,y,pi1,pi2,pi3,H,p_Z1,M1,M2,M3,gamma1,gamma2,gamma3", 0) ==
          0);
    const std::string json = slurp(dir / "traj.json");
    CHECK(json.find("\"status\": \"completed\"") != std::string::npos);
    CHECK(json.find("\"version\"") != std::string::npos);
}

TEST_CASE("simulate output is byte-identical across runs") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const CliResult r1 = run_cli("simulate --config " + (dir / "chap.cfg").string() +
                                 " --output " + (dir / "a").string());
    const CliResult r2 = run_cli("simulate --config " + (dir / "chap.cfg").string() +
                                 " --output " + (dir / "b").string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
}

TEST_CASE("missing config file exits 2 without partial output") {
    const fs::path dir = temp_dir();
    const CliResult r = run_cli("simulate --config " + (dir / "nope.cfg").string() +
                                " --output " + (dir / "x").string());
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(dir / "x.csv"));
    CHECK_FALSE(fs::exists(dir / "x.json"));
}

TEST_CASE("bad config values exit 2") {
    const fs::path dir = temp_dir();
    write(dir / "bad.cfg", "system = chaplygin\nchaplygin.I1 = banana\n");
    CHECK(run_cli("simulate --config " + (dir / "bad.cfg").string()).exit_code == 2);
    write(dir / "bad2.cfg", "system = neither\n");
    CHECK(run_cli("simulate --config " + (dir / "bad2.cfg").string()).exit_code == 2);
}

TEST_CASE("leaving the chart is an integration failure (exit 3)") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const CliResult r = run_cli("simulate --config " + (dir / "chap.cfg").string() +
                                " --set state.q=0.0,0.05,0.0,0.0,0.0" +
                                " --set state.pi=0.0,-1.0,0.0 --output " + (dir / "t").string());
    CHECK(r.exit_code == 3);
    const std::string json = slurp(dir / "t.json");
    CHECK(json.find("chart") != std::string::npos);
}

TEST_CASE("verify all passes on both bundled systems") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    write(dir / "rev.cfg", kRevolutionCfg);
    CHECK(run_cli("verify --config " + (dir / "chap.cfg").string() +
                  " --check all --set verify.n_samples=60 --set verify.n_triples=40")
              .exit_code == 0);
    CHECK(run_cli("verify --config " + (dir / "rev.cfg").string() +
                  " --check all --set verify.n_samples=60 --set verify.n_triples=40")
              .exit_code == 0);
}

TEST_CASE("parallel verification merges deterministically") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const std::string base = "verify --config " + (dir / "chap.cfg").string() +
                             " --check all --set verify.n_samples=40 --set verify.n_triples=30";
    CHECK(run_cli(base + " --jobs 4 --output " + (dir / "par.json").string()).exit_code == 0);
    CHECK(run_cli(base + " --output " + (dir / "seq.json").string()).exit_code == 0);
    CHECK(slurp(dir / "par.json") == slurp(dir / "seq.json"));
}

TEST_CASE("explicitly requested negative control fails with exit 4") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const CliResult r = run_cli("verify --config " + (dir / "chap.cfg").string() +
                                " --check casimir --lambda zero --set verify.n_samples=50");
    CHECK(r.exit_code == 4);
}

TEST_CASE("rank2 check on the intermediate bracket records an expected failure") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const fs::path rep = dir / "report.json";
    const CliResult r = run_cli("verify --config " + (dir / "chap.cfg").string() +
                                " --check rank2-jacobi --system chaplygin-intermediate" +
                                " --set verify.n_triples=60 --output " + rep.string());
    CHECK(r.exit_code == 0);
    const std::string json = slurp(rep);
    CHECK(json.find("\"expected_fail\": true") != std::string::npos);
    CHECK(json.find("\"pass\": false") != std::string::npos);
}

TEST_CASE("verify respects the NONHOLO_SEED environment override") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const std::string base = "verify --config " + (dir / "chap.cfg").string() +
                             " --check casimir --set verify.n_samples=30 --output ";
    const std::string cmd1 = std::string("NONHOLO_SEED=777 ") + NONHOLO_CLI_PATH + " " + base +
                             (dir / "r1.json").string() + " >/dev/null 2>&1";
    const std::string cmd2 = std::string("NONHOLO_SEED=777 ") + NONHOLO_CLI_PATH + " " + base +
                             (dir / "r2.json").string() + " >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd1.c_str())) == 0);
    REQUIRE(WEXITSTATUS(std::system(cmd2.c_str())) == 0);
    CHECK(slurp(dir / "r1.json") == slurp(dir / "r2.json"));
    CHECK(slurp(dir / "r1.json").find("\"seed\": 777") != std::string::npos);
}

TEST_CASE("gauge-ode writes the theta grid and residuals") {
    const fs::path dir = temp_dir();
    write(dir / "rev.cfg", kRevolutionCfg);
    const CliResult r = run_cli("gauge-ode --config " + (dir / "rev.cfg").string() +
                                " --output " + (dir / "ode").string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "ode.csv");
    CHECK(csv.rfind("theta,g1,k1,g2,k2", 0) == 0);
    // homogeneous ball: first solution is exactly (1, 0)
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    int checked = 0;
    while (std::getline(lines, line) && checked < 100) {
        double th, g1, k1, g2, k2;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &th, &g1, &k1, &g2, &k2) == 5);
        CHECK(std::abs(g1 - 1.0) < 1e-9);
        CHECK(std::abs(k1) < 1e-9);
        ++checked;
    }
    const std::string json = slurp(dir / "ode.json");
    CHECK(json.find("evenness_residual") != std::string::npos);

    // gauge-ode demands the revolution system
    write(dir / "chap.cfg", kChaplyginCfg);
    CHECK(run_cli("gauge-ode --config " + (dir / "chap.cfg").string()).exit_code == 2);
}

TEST_CASE("bracket-table dumps both bivectors") {
    const fs::path dir = temp_dir();
    write(dir / "chap.cfg", kChaplyginCfg);
    const std::string cmd = std::string(NONHOLO_CLI_PATH) + " bracket-table --config " +
                            (dir / "chap.cfg").string() + " > " + (dir / "table.json").string() +
                            " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const std::string json = slurp(dir / "table.json");
    CHECK(json.find("\"pi_nh\"") != std::string::npos);
    CHECK(json.find("\"pi_lambda\"") != std::string::npos);
    CHECK(json.find("\"gram\"") != std::string::npos);
}
