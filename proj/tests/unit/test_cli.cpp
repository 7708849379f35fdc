#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + CSLOW_BIN + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture(const std::string& args, const std::string& env = "") {
    const fs::path out = fs::temp_directory_path() / "cslow_cli_capture.txt";
    const std::string cmd = env + " " + CSLOW_BIN + " " + args + " >" + out.string() + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) {
    }
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("cslow_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("exit codes") {
    const auto counter = support::fixture_path("counter");
    CHECK(run("parse " + counter) == 0);
    CHECK(run("report-timing " + counter) == 0);
    CHECK(run("parse /no/such/file.v") == 1);
    CHECK(run("csr " + counter + " --cmf 0") == 1);
    CHECK(run("--bogus") == 1);
    CHECK(run("") == 1);

    auto dir = scratch("bad");
    std::ofstream(dir / "bad.v") << "module m(input a, output y); assign y = nope; endmodule\n";
    CHECK(run("parse " + (dir / "bad.v").string()) == 1);
    std::ofstream(dir / "loop.v") << "module m(input a, output y); wire p; assign p = p & a; assign y = p; endmodule\n";
    CHECK(run("report-timing " + (dir / "loop.v").string()) == 1);
}

TEST_CASE("csr writes its artifacts") {
    auto dir = scratch("csr");
    CHECK(run("csr " + support::fixture_path("alu") + " --cmf 3 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "alu_csr3.v"));
    CHECK(fs::exists(dir / "alu_csr3.schedule.json"));
    CHECK(fs::exists(dir / "alu_csr3.cuts.json"));
}

TEST_CASE("check passes and fails with the right code") {
    const auto mac = support::fixture_path("mac");
    CHECK(run("check " + mac + " --cmf 2 --cycles 200") == 0);
    CHECK(run("check " + mac + " --cmf 2 --cycles 200 --inject-fault first") == 1);
    auto out = capture("check " + mac + " --cmf 2 --cycles 200 --inject-fault first");
    CHECK(out.find("\"witness\"") != std::string::npos);
}

TEST_CASE("seed precedence: flag, config, environment") {
    const auto alu = support::fixture_path("alu");
    auto dir = scratch("seed");
    auto traces = [&](const std::string& args, const std::string& env) {
        fs::remove_all(dir / "t");
        (void)run("check " + alu + " --cmf 2 --cycles 40 --dump-traces " + (dir / "t").string() + " " + args, env);
        std::ifstream in(dir / "t" / "thread0.json");
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::ofstream(dir / "cfg.json") << R"({"seed": 11})";
    const auto s11 = traces("--seed 11", "");
    const auto s12 = traces("--seed 12", "");
    CHECK_FALSE(s11.empty());
    CHECK(s11 != s12);
    CHECK(traces("", "CSLOW_SEED=12") == s12);
    CHECK(traces("--config " + (dir / "cfg.json").string(), "CSLOW_SEED=12") == s11);
    CHECK(traces("--config " + (dir / "cfg.json").string() + " --seed 12", "") == s12);
    CHECK(run("check " + alu + " --cycles 10", "CSLOW_SEED=abc") == 1);
}

TEST_CASE("config keys mirror flags and unknown keys fail") {
    auto dir = scratch("cfg");
    std::ofstream(dir / "ok.json") << R"({"files": [")" + support::fixture_path("counter") + R"("], "cmf": 3, "out": ")" +
                                          dir.string() + R"("})";
    CHECK(run("csr --config " + (dir / "ok.json").string()) == 0);
    CHECK(fs::exists(dir / "counter_csr3.v"));
    CHECK(run("csr --config " + (dir / "ok.json").string() + " --cmf 2") == 0);
    CHECK(fs::exists(dir / "counter_csr2.v"));
    std::ofstream(dir / "bad.json") << R"({"cmff": 3})";
    CHECK(run("csr " + support::fixture_path("counter") + " --config " + (dir / "bad.json").string()) == 1);
}

TEST_CASE("output is deterministic") {
    const auto args = "report-timing " + support::fixture_path("mac");
    CHECK(capture(args) == capture(args));
    const auto m = "metrics --t-orig 13.853 --cmf 2,3,4 --json";
    CHECK(capture(m) == capture(m));
    CHECK(capture(m).find("cslow.metrics/1") != std::string::npos);
}
