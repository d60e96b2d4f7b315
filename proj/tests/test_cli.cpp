// Drives the abellab binary end to end.  The binary path arrives in the
// ABELLAB_BIN environment variable, set by CTest.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const char* bin = std::getenv("ABELLAB_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    std::array<char, 4096> buf;
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("analyze: no nonzero cycles on the degenerate line") {
    const RunResult r =
        run("analyze --params 0,1,0,0,0,1 --window -10:10 --grid 128");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["inventory"]["cycles"].empty());
    CHECK(j["inventory"]["zero_orbit"]["multiplicity"] == 4);
    CHECK(j["hypotheses"]["nullcline_monotone"] == true);
    CHECK(j["normal_form"]["q2"] == 1.0);
}

TEST_CASE("analyze: uniqueness-condition parameters hold at most one nonzero cycle") {
    const RunResult r = run("analyze --params 2,1,0,0,0,1 --window -10:10 --grid 128");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["hypotheses"]["uniqueness_a"] == true);
    CHECK(j["inventory"]["cycles"].size() <= 1);
}

TEST_CASE("analyze: malformed params exit 1 and write nothing") {
    const std::string path = "/tmp/abellab_test_should_not_exist.json";
    std::remove(path.c_str());
    const RunResult r = run("analyze --params 1,2 --out " + path);
    CHECK(r.exit_code == 1);
    std::ifstream f(path);
    CHECK(!f.good());
}

TEST_CASE("analyze output is deterministic") {
    const std::string cmd = "analyze --params 0.25,1,0,0.003125,0,1 --grid 128";
    const RunResult a = run(cmd);
    const RunResult b = run(cmd);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    const auto j = nlohmann::json::parse(a.out);
    CHECK(j["inventory"]["cycles"].size() == 2);
    CHECK(j["inventory"]["total_count"] == 3);
    REQUIRE(j.contains("diagnostics"));
    for (const auto& d : j["diagnostics"]) CHECK(d["geometry"]["ok"] == true);
}

TEST_CASE("analyze writes a W-profile CSV on request") {
    const std::string path = "/tmp/abellab_wprofile.csv";
    std::remove(path.c_str());
    const RunResult r = run("analyze --params 0.25,1,0,0.003125,0,1 --grid 128 "
                            "--w-profile " + path + " --w-cycle-index 0 --out /dev/null");
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(path);
    CHECK(csv.find("s,W,Wprime") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') > 200);  // 256 sample rows
    std::remove(path.c_str());
}

TEST_CASE("check reports hypotheses without scanning") {
    const RunResult r = run("check --params 1,3,4,0,5,5");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["normal_form"]["p1"] == 5.0);
    CHECK(j["normal_form"]["q1"] == 7.0);
    CHECK(j["normal_form"]["q2"] == -1.0);
    CHECK(j.contains("hypotheses"));
}

TEST_CASE("sweep: rows in order, degenerate row clean, empty range header-only") {
    SECTION("three rows") {
        const RunResult r = run(
            "sweep --params 0,1,0,0,0,1 --vary b0=0:0.02:0.01 --window -6:6 --grid 128");
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("value,cycle_count_pos,cycle_count_neg,zero_orbit_class,"
                         "min_mult_dist,status")
              != std::string::npos);
        // q0 = 0 row: degenerate line, no nonzero cycles
        CHECK(r.out.find("\n0,0,0,4:upper_unstable_lower_stable") != std::string::npos);
        CHECK(std::count(r.out.begin(), r.out.end(), '\n') >= 3 + 9);
    }
    SECTION("empty range") {
        const RunResult r =
            run("sweep --params 0,1,0,0,0,1 --vary b0=1:0:0.5 --window -6:6 --grid 128");
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("value,") != std::string::npos);
        CHECK(r.out.find("\n0.5,") == std::string::npos);  // no data rows
    }
    SECTION("unknown parameter name") {
        const RunResult r = run("sweep --params 0,1,0,0,0,1 --vary q7=0:1:0.5");
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("continue: branch CSV ends in a fold for the two-cycle case") {
    const RunResult r = run(
        "continue --params 0.25,1,0,0.003125,0,1 --dir up --q0-to 0.05 --cycle-index 0 "
        "--grid 128 --format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("# termination=fold") != std::string::npos);
    CHECK(r.out.find("q0,x_at_0,multiplier,stability") != std::string::npos);
    CHECK(r.out.find("stable") != std::string::npos);
}

TEST_CASE("continue: JSON format carries the fold event") {
    const RunResult r = run(
        "continue --params 0.25,1,0,0.003125,0,1 --dir up --q0-to 0.05 --cycle-index 0 "
        "--grid 128 --format json");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["termination"] == "fold");
    REQUIRE(j.contains("fold"));
    CHECK(std::fabs(j["fold"]["cycle"]["multiplier"].get<double>() - 1.0) < 1e-6);
    CHECK(j["fold"]["lpp_sign"] == 1);
}

TEST_CASE("witness: finds three cycles and reports them") {
    const RunResult r = run("witness --seed 3 --budget 10 --grid 128");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["found"] == true);
    CHECK(j["inventory"]["total_count"] == 3);
    CHECK(j["inventory"]["cycles"].size() == 2);
    for (const auto& c : j["inventory"]["cycles"]) CHECK(c["x_at_0"].get<double>() < 0);
}

TEST_CASE("oracle self-test passes and respects --out") {
    const std::string path = "/tmp/abellab_oracle_table.txt";
    std::remove(path.c_str());
    const RunResult r = run("oracle --out " + path);
    CHECK(r.exit_code == 0);
    const std::string table = slurp(path);
    CHECK(table.find("oracle: all rows pass") != std::string::npos);
    CHECK(table.find("FAIL") == std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("usage errors exit 1") {
    CHECK(run("frobnicate").exit_code == 1);
    CHECK(run("analyze").exit_code == 1);          // missing params
    CHECK(run("continue --params 0,1,0,0,0,1 --cycle-index 5 --grid 128").exit_code == 1);
    CHECK(run("analyze --params 0,1,0,0,0,1 --window 5:1").exit_code == 1);
}
