// Drives the built CLI binary (path in argv[1]): exit codes, output files,
// schema, and byte-level determinism.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {
std::string g_cli;

int run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("steady: happy path writes versioned json") {
    fs::remove_all("cli_out1");
    CHECK(run("--out cli_out1 steady --phi cos1:0.3") == 0);
    std::string j = slurp("cli_out1/steady_result.json");
    CHECK(j.find("\"stokeswave/1\"") != std::string::npos);
    CHECK(j.find("\"eta_star\"") != std::string::npos);
    CHECK(j.find("\"newton\"") != std::string::npos);
}

TEST_CASE("steady: constant phi solves in one step") {
    fs::remove_all("cli_out2");
    CHECK(run("--out cli_out2 steady --phi const:0.5") == 0);
    std::string j = slurp("cli_out2/steady_result.json");
    CHECK(j.find("\"iterations\": 0") != std::string::npos);
}

TEST_CASE("exit 2 on inadmissible phi and bad config") {
    CHECK(run("--out cli_out3 steady --phi const:2.0") == 2);    // min(-phi) <= -gb
    CHECK(run("--out cli_out3 steady --phi bogus") == 2);        // malformed spec
    CHECK(run("--out cli_out3 steady --no-such-flag 1") == 2);   // unknown option
}

TEST_CASE("strict config file parsing rejects unknown keys") {
    fs::create_directories("cli_out4");
    {
        std::ofstream f("cli_out4/good.ini");
        f << "[steady]\nphi = cos1:0.2\nnx = 32\n";
    }
    CHECK(run("--out cli_out4 --config cli_out4/good.ini steady") == 0);
    {
        std::ofstream f("cli_out4/bad.ini");
        f << "[steady]\nphi = cos1:0.2\nmistyped_key = 3\n";
    }
    CHECK(run("--out cli_out4 --config cli_out4/bad.ini steady") == 2);
}

TEST_CASE("travel: gamma = 0 writes trivial wave; csv schema") {
    fs::remove_all("cli_out5");
    CHECK(run("--out cli_out5 travel --gamma-list 0 --phi cos1:0.3") == 0);
    std::string j = slurp("cli_out5/travel_result.json");
    CHECK(j.find("\"converged\": true") != std::string::npos);
    std::string csv = slurp("cli_out5/travel_profiles.csv");
    CHECK(csv.find("# format = stokeswave/1") != std::string::npos);
    CHECK(csv.find("x,eta_0") != std::string::npos);
}

TEST_CASE("evolve: trace csv has the exact column order; determinism") {
    fs::remove_all("cli_outA");
    fs::remove_all("cli_outB");
    std::string args = " evolve --init steady --phi cos1:0.3 --dt 0.01 --t-final 0.05 "
                       "--record-every 1 --seed 7";
    CHECK(run("--out cli_outA" + args) == 0);
    CHECK(run("--out cli_outB" + args) == 0);
    std::string a = slurp("cli_outA/evolve_trace.csv");
    std::string b = slurp("cli_outB/evolve_trace.csv");
    CHECK(a.find("t,norm_hs1,energy,mean_eta,min_depth\n") != std::string::npos);
    CHECK(a == b);  // bit-identical
    std::string ja = slurp("cli_outA/evolve_result.json");
    std::string jb = slurp("cli_outB/evolve_result.json");
    CHECK(ja == jb);
    CHECK(ja.find("\"completed\"") != std::string::npos);
}

TEST_CASE("evolve: decay fit json for wave+perturbation") {
    fs::remove_all("cli_out6");
    CHECK(run("--out cli_out6 evolve --init wave+perturbation --perturb cos1:0.001 "
              "--gamma 0 --phi cos1:0.2 --dt 0.05 --t-final 8 --record-every 4") == 0);
    std::string j = slurp("cli_out6/decay_fit.json");
    CHECK(j.find("\"c0\"") != std::string::npos);
}

TEST_CASE("evolve: blow-up timestep exits 3 with a partial trace") {
    fs::remove_all("cli_out7");
    CHECK(run("--out cli_out7 evolve --init cos7:0.0001 --phi cos1:0.2 --dt 1.4 "
              "--t-final 30 --record-every 1") == 3);
    std::string j = slurp("cli_out7/evolve_result.json");
    CHECK(j.find("step_rejected") != std::string::npos);
    CHECK(slurp("cli_out7/evolve_trace.csv").find("t,norm_hs1") != std::string::npos);
}

TEST_CASE("travel: +-gamma sweep reports the mirror-profile defect") {
    fs::remove_all("cli_out9");
    CHECK(run("--out cli_out9 --threads 2 travel --gamma-list -0.01,0.01 --phi cos1:0.3") == 0);
    std::string j = slurp("cli_out9/travel_result.json");
    auto pos = j.find("\"reflection_pairs\"");
    REQUIRE(pos != std::string::npos);
    auto dpos = j.find("\"defect\": ", pos);
    REQUIRE(dpos != std::string::npos);
    double defect = std::stod(j.substr(dpos + 11));
    CHECK(defect < 1e-8);
}

TEST_CASE("verify: suites pass on a curved surface and exit 0") {
    fs::remove_all("cli_out8");
    CHECK(run("--out cli_out8 --threads 2 verify --eta cos1:0.3 --nx 32 --nz 20 "
              "--suites flat-symbol,self-adjoint,coercivity,commutator,isomorphism") == 0);
    std::string j = slurp("cli_out8/verify_report.json");
    CHECK(j.find("\"all_pass\": true") != std::string::npos);
    CHECK(j.find("\"c_psi\"") != std::string::npos);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-stokeswave-binary>\n");
        return 1;
    }
    g_cli = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
