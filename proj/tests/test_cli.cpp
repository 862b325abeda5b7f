#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += std::string(GIBBSGATE_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    RunResult r;
    r.out = out;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data_file(const std::string& name) {
    return std::string(DATA_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("check reports admissibility and atom count") {
    auto r = run_cli("check " + data_file("fixture_a.json"));
    CHECK(r.code == 0);
    CHECK(contains(r.out, "admissible: true, atoms: 1"));

    auto rb = run_cli("check " + data_file("fixture_b.json"));
    CHECK(rb.code == 0);
    CHECK(contains(rb.out, "admissible: false, atoms: 2"));
}

TEST_CASE("check --witness names the blocking rectangle") {
    auto r = run_cli("check --witness " + data_file("fixture_b.json"));
    CHECK(r.code == 0);
    CHECK(contains(r.out, "witness: U = [x1], V = [y0]"));
}

TEST_CASE("check --strict exits 2 on a non-admissible joint") {
    auto r = run_cli("check --strict " + data_file("fixture_b.json"));
    CHECK(r.code == 2);
    auto ok = run_cli("check --strict " + data_file("fixture_a.json"));
    CHECK(ok.code == 0);
}

TEST_CASE("check --atoms lists atom cells and atoms is an alias") {
    auto r = run_cli("check --atoms " + data_file("fixture_b.json"));
    CHECK(r.code == 0);
    CHECK(contains(r.out, "atom 0: (x0, y0)"));
    CHECK(contains(r.out, "atom 1: (x1, y1)"));

    auto alias = run_cli("atoms " + data_file("fixture_b.json"));
    CHECK(alias.code == 0);
    CHECK(alias.out == r.out);
}

TEST_CASE("check --oracle cross-checks the enumeration oracle") {
    auto r = run_cli("check --oracle " + data_file("fixture_a.json"));
    CHECK(r.code == 0);
    CHECK(contains(r.out, "oracle: agree"));
}

TEST_CASE("check --format json emits a machine-readable report") {
    auto r = run_cli("check --format json --witness --atoms --oracle " +
                     data_file("fixture_b.json"));
    CHECK(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["admissible"] == false);
    CHECK(doc["atoms"] == 2);
    CHECK(doc["witness"]["u"] == nlohmann::json::array({"x1"}));
    CHECK(doc["witness"]["v"] == nlohmann::json::array({"y0"}));
    CHECK(doc["atom_cells"].size() == 2);
    CHECK(doc["oracle"] == "agree");
}

TEST_CASE("input errors exit 1") {
    auto missing = run_cli("check /tmp/gibbsgate_no_such_file.json");
    CHECK(missing.code == 1);

    const std::string bad = "/tmp/gibbsgate_cli_bad.json";
    {
        std::ofstream out(bad);
        out << "{\"weights\": [[1, 1], [1]]}\n";
    }
    auto ragged = run_cli("check " + bad);
    CHECK(ragged.code == 1);

    auto zero = run_cli("iterate " + data_file("fixture_a.json") +
                        " --phi /tmp/gibbsgate_no_such_phi.json");
    CHECK(zero.code == 1);
}

TEST_CASE("iterate prints even iterates and the power discrepancy") {
    const std::string csv = "/tmp/gibbsgate_cli_iterate.csv";
    auto r = run_cli("iterate " + data_file("fixture_a.json") + " --phi " +
                     data_file("phi_00.json") + " --steps 4 --csv " + csv);
    CHECK(r.code == 0);
    CHECK(contains(r.out, "phi_2: 0.5 0"));
    CHECK(contains(r.out, "phi_4: 0.375 0.25"));
    CHECK(contains(r.out, "max_discrepancy: 0"));

    const std::string body = read_file(csv);
    CHECK(contains(body, "n,x,y,value"));
    CHECK(contains(body, "4,0,0,0.375"));
    CHECK(contains(body, "2,0,0,0.5"));
}

TEST_CASE("ergodic verdicts and doeblin certificates") {
    auto a = run_cli("ergodic --doeblin " + data_file("fixture_a.json"));
    CHECK(a.code == 0);
    CHECK(contains(a.out, "s0_full: true"));
    CHECK(contains(a.out, "aperiodic: true"));
    CHECK(contains(a.out, "verdict: ergodic"));
    CHECK(contains(a.out, "doeblin: epsilon = 0.5, rate_bound = 0.5"));

    auto t = run_cli("ergodic --doeblin --spectral " + data_file("triangle3.json"));
    CHECK(t.code == 0);
    CHECK(contains(t.out, "epsilon = 0.3333333333333333"));
    CHECK(contains(t.out, "rate_bound = 0.6666666666666667"));
    CHECK(contains(t.out, "spectral_rate:"));

    auto b = run_cli("ergodic " + data_file("fixture_b.json"));
    CHECK(b.code == 0);
    CHECK(contains(b.out, "verdict: not ergodic: 2 atoms"));
}

TEST_CASE("ergodic --csv writes the sup-tv curve") {
    const std::string csv = "/tmp/gibbsgate_cli_ergodic.csv";
    auto r = run_cli("ergodic --csv " + csv + " " + data_file("product22.json"));
    CHECK(r.code == 0);
    CHECK(read_file(csv) == "n,sup_tv\n1,0\n");
}

TEST_CASE("simulate matches the long-run mean within the band") {
    auto r = run_cli("simulate " + data_file("fixture_a.json") + " --phi " +
                     data_file("phi_00.json") + " --steps 1000000 --seed 7");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "rng: gibbsgate-rng-v1, seed: 7"));
    CHECK(contains(r.out, "target: 0.3333333333333333"));
    CHECK(contains(r.out, "band: 0.01"));
    CHECK(contains(r.out, "verdict: pass"));
}

TEST_CASE("simulate reports failure from an absorbing start") {
    auto r = run_cli("simulate " + data_file("fixture_b.json") + " --phi " +
                     data_file("phi_00.json") + " --start 0,0 --steps 1000 --seed 3");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "final = 1"));
    CHECK(contains(r.out, "abs_error = 0.5"));
    CHECK(contains(r.out, "verdict: fail"));
}

TEST_CASE("simulate reruns are byte-identical") {
    const std::string csv1 = "/tmp/gibbsgate_cli_sim1.csv";
    const std::string csv2 = "/tmp/gibbsgate_cli_sim2.csv";
    const std::string args = "simulate " + data_file("fixture_a.json") + " --phi " +
                             data_file("phi_00.json") + " --steps 20000 --seed 11";
    auto r1 = run_cli(args + " --csv " + csv1);
    auto r2 = run_cli(args + " --csv " + csv2);
    CHECK(r1.code == 0);
    CHECK(r2.code == 0);
    CHECK(r1.out == r2.out);
    CHECK(read_file(csv1) == read_file(csv2));
}

TEST_CASE("output does not depend on the thread budget") {
    const std::string args = "check --atoms --oracle " + data_file("triangle3.json");
    auto one = run_cli(args, "GIBBSGATE_THREADS=1");
    auto four = run_cli(args, "GIBBSGATE_THREADS=4");
    CHECK(one.code == 0);
    CHECK(four.code == 0);
    CHECK(one.out == four.out);
}

TEST_CASE("kcheck handles multi-coordinate joints") {
    auto d = run_cli("kcheck --oracle " + data_file("kdiag3.json"));
    CHECK(d.code == 0);
    CHECK(contains(d.out, "admissible: false, atoms: 2"));
    CHECK(contains(d.out, "witness: (0, 0, 0) / (1, 1, 1) are in different atoms"));
    CHECK(contains(d.out, "oracle: agree"));

    auto s = run_cli("kcheck --oracle " + data_file("kstair3.json"));
    CHECK(s.code == 0);
    CHECK(contains(s.out, "admissible: true, atoms: 1"));
    CHECK(contains(s.out, "oracle: agree"));
}

TEST_CASE("kcheck rejects a shape and weights length mismatch") {
    const std::string bad = "/tmp/gibbsgate_cli_kbad.json";
    {
        std::ofstream out(bad);
        out << "{\"shape\": [2, 2, 2], \"weights\": [1, 0, 0, 1]}\n";
    }
    auto r = run_cli("kcheck " + bad);
    CHECK(r.code == 1);
}

TEST_CASE("tip reports per-set status and chain certificates") {
    auto bands = run_cli("tip " + data_file("product22.json") + " --sets " +
                         data_file("sets_bands.json"));
    CHECK(bands.code == 0);
    CHECK(contains(bands.out, "set F: tip = true, components = 1"));
    CHECK(contains(bands.out, "set G: tip = true, components = 1"));
    CHECK(contains(bands.out, "communicates F G: true via column y1"));
    CHECK(contains(bands.out, "chain valid, union TIP"));

    auto diag = run_cli("tip " + data_file("product22.json") + " --sets " +
                        data_file("sets_diagonal.json"));
    CHECK(diag.code == 0);
    CHECK(contains(diag.out, "communicates F G: false"));
    CHECK(contains(diag.out, "no communication at step 1"));

    auto single = run_cli("tip " + data_file("product22.json") + " --sets " +
                          data_file("sets_single.json"));
    CHECK(single.code == 0);
    CHECK(contains(single.out, "set F: tip = true"));
    CHECK(!contains(single.out, "chain"));
    CHECK(!contains(single.out, "communicates"));
}
