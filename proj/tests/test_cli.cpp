#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "coherence/state_io.hpp"

using namespace coherence;

namespace {

#ifndef COHERENCE_CLI_PATH
#error "COHERENCE_CLI_PATH must be defined by the build"
#endif

const std::string cli = COHERENCE_CLI_PATH;

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string out_file = "/tmp/coherence_cli_out.txt";
    const std::string cmd = cli + " " + args + " > " + out_file + " 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

// Raw shell command (used to set environment variables for a run).
RunResult run_raw(const std::string& raw_cmd) {
    const std::string out_file = "/tmp/coherence_cli_out2.txt";
    const int rc = std::system((raw_cmd + " > " + out_file + " 2>&1").c_str());
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double grab(const std::string& output, const std::string& key) {
    const size_t pos = output.find(key + ":");
    REQUIRE(pos != std::string::npos);
    return std::strtod(output.c_str() + pos + key.size() + 1, nullptr);
}

} // namespace

TEST_CASE("compute on a pure state file uses the closed form and cross-checks") {
    write_file("/tmp/coh_pure3.txt",
               "kind: pure\ndim: 3\n"
               "0.8944271909999159,0\n0.4472135954999579,0\n0,0\n");
    const RunResult r = run("compute --state /tmp/coh_pure3.txt --measure mod-tr --method auto");
    CHECK(r.exit_code == 0);
    CHECK(grab(r.output, "value") == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(grab(r.output, "witness_p") == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(grab(r.output, "dual_lower_bound") == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(std::abs(grab(r.output, "solver_value") - 0.8) <= 1e-6);
}

TEST_CASE("compute on the plus state gives 1") {
    write_file("/tmp/coh_plus.txt",
               "kind: pure\ndim: 2\n0.7071067811865476,0 0.7071067811865476,0\n");
    const RunResult r = run("compute --state /tmp/coh_plus.txt --measure mod-tr");
    CHECK(r.exit_code == 0);
    CHECK(grab(r.output, "value") == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("compute on a diagonal density file gives 0 for all measures") {
    write_file("/tmp/coh_diag.txt",
               "kind: density\ndim: 2\n0.3,0 0,0\n0,0 0.7,0\n");
    for (const char* m : {"l1", "tr", "mod-tr"}) {
        const RunResult r = run(std::string("compute --state /tmp/coh_diag.txt --measure ") + m);
        CHECK(r.exit_code == 0);
        CHECK(grab(r.output, "value") == doctest::Approx(0.0).epsilon(1e-8));
    }
}

TEST_CASE("malformed state file exits 2 with a line diagnostic") {
    write_file("/tmp/coh_bad.txt", "kind: pure\ndim: 2\n0.7,0\nnot_a_number\n");
    const RunResult r = run("compute --state /tmp/coh_bad.txt");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("line 4") != std::string::npos);

    write_file("/tmp/coh_bad2.txt", "kind: banana\ndim: 2\n");
    CHECK(run("compute --state /tmp/coh_bad2.txt").exit_code == 2);
}

TEST_CASE("invariant-violating state file exits 3 naming the invariant") {
    write_file("/tmp/coh_bad3.txt",
               "kind: density\ndim: 2\n0.9,0 0,0\n0,0 0.9,0\n");
    const RunResult r = run("compute --state /tmp/coh_bad3.txt");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("trace") != std::string::npos);

    write_file("/tmp/coh_bad4.txt",
               "kind: density\ndim: 2\n1.2,0 0,0\n0,0 -0.2,0\n");
    const RunResult r2 = run("compute --state /tmp/coh_bad4.txt");
    CHECK(r2.exit_code == 3);
    CHECK(r2.output.find("positive semidefinite") != std::string::npos);
}

TEST_CASE("closed-form method on an unsupported input is rejected") {
    write_file("/tmp/coh_mixed3.txt",
               "kind: density\ndim: 3\n"
               "0.5,0 0.1,0.05 0,0\n0.1,-0.05 0.3,0 0,0\n0,0 0,0 0.2,0\n");
    const RunResult r =
        run("compute --state /tmp/coh_mixed3.txt --measure mod-tr --method closed-form");
    CHECK(r.exit_code == 3);
}

TEST_CASE("sample writes replayable state files") {
    const RunResult r = run("sample --dims 4 --samples 2 --seed 9 --out /tmp/coh_sample");
    CHECK(r.exit_code == 0);
    const StateFile s0 = read_state_file("/tmp/coh_sample_000.txt");
    CHECK(std::holds_alternative<PureState>(s0));
    CHECK(std::get<PureState>(s0).dim() == 4);

    const RunResult r2 =
        run("sample --dims 4 --ranks 2 --samples 1 --seed 9 --out /tmp/coh_sampled");
    CHECK(r2.exit_code == 0);
    const StateFile s1 = read_state_file("/tmp/coh_sampled_000.txt");
    CHECK(std::holds_alternative<DensityMatrix>(s1));
}

TEST_CASE("sweep emits the pinned CSV schema, byte-identical across thread counts") {
    const std::string cmd = "sweep --dims 2..5 --ranks 1..2 --samples 300 --seed 42";
    CHECK(run_raw("COHERENCE_THREADS=1 " + cli + " " + cmd + " --out /tmp/coh_sweep1.csv")
              .exit_code == 0);
    CHECK(run_raw("COHERENCE_THREADS=3 " + cli + " " + cmd + " --out /tmp/coh_sweep3.csv")
              .exit_code == 0);

    const std::string a = slurp("/tmp/coh_sweep1.csv");
    const std::string b = slurp("/tmp/coh_sweep3.csv");
    CHECK(a == b);
    CHECK(a.substr(0, a.find('\n')) == "n,k,samples,hits,estimate,ci_halfwidth,exact,seed");

    // Rank-1 rows carry the exact value; estimates track it.
    std::istringstream lines(a);
    std::string line;
    std::getline(lines, line); // header
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.find(",42") != std::string::npos);
    }
    CHECK(rows == 8);
}

TEST_CASE("infeasible sweep pairs produce warning rows") {
    const RunResult r = run("sweep --dims 2..2 --ranks 1..3 --samples 50 --seed 1");
    CHECK(r.exit_code == 0);
    // Full-rank qubits at (n, k) = (2, 2) are feasible; only k = 3 is skipped.
    CHECK(r.output.find("\n2,2,50,") != std::string::npos);
    CHECK(r.output.find("2,3,0,0,,,,1") != std::string::npos);
}

TEST_CASE("figure data endpoints") {
    const RunResult f1 = run("figure fig1");
    CHECK(f1.exit_code == 0);
    CHECK(f1.output.find("a,value\n0,1\n") != std::string::npos);
    CHECK(f1.output.find("\n0.705,1\n") != std::string::npos); // last grid point <= 1/sqrt(2)
    CHECK(f1.output.find("\n1,0\n") != std::string::npos);

    const RunResult f2 = run("figure fig2");
    CHECK(f2.exit_code == 0);
    CHECK(f2.output.find("\n5,0.6875\n") != std::string::npos);
    CHECK(f2.output.find("\n20,0.999961853027\n") != std::string::npos);
}

TEST_CASE("verify suites exit zero") {
    CHECK(run("verify qubit --samples 50 --seed 2").exit_code == 0);
    CHECK(run("verify gradient --samples 10 --seed 2").exit_code == 0);
    const RunResult dual = run("verify duality --samples 10 --dims 2..6 --seed 2");
    CHECK(dual.exit_code == 0);
    CHECK(dual.output.find("[pass]") != std::string::npos);
}
