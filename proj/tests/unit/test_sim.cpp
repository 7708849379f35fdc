#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace cslow;

TEST_CASE("counter counts") {
    auto flat = flatten(support::load_unit("counter"), "counter");
    Stimulus s{{"en"}, {{1}, {1}, {1}}};
    auto t = simulate(flat, s);
    REQUIRE(t.signals == std::vector<std::string>{"q"});
    CHECK(t.cycles == std::vector<std::vector<uint64_t>>{{0}, {1}, {2}});
}

TEST_CASE("alu trace matches the hand-computed golden file") {
    std::ifstream in(support::golden_path("alu_trace.txt"));
    REQUIRE(in);
    Stimulus s{{"rst", "op", "b"}, {}};
    std::vector<std::vector<uint64_t>> want;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        uint64_t rst, op, b, result, zero;
        char bar;
        ls >> rst >> op >> b >> bar >> result >> zero;
        s.cycles.push_back({rst, op, b});
        want.push_back({result, zero});
    }
    REQUIRE(want.size() == 10);
    auto t = simulate(flatten(support::load_unit("alu"), "alu"), s);
    REQUIRE(t.signals == std::vector<std::string>{"result", "zero"});
    CHECK(t.cycles == want);
}

TEST_CASE("stimulus must drive data inputs") {
    auto flat = flatten(support::load_unit("counter"), "counter");
    CHECK_THROWS(simulate(flat, Stimulus{{"q"}, {{1}}}));
    Simulator sim(flat);
    CHECK(sim.data_inputs() == std::vector<std::string>{"en"});
}

TEST_CASE("deinterleave inverts interleave") {
    std::vector<Stimulus> threads(3);
    for (int k = 0; k < 3; ++k) {
        threads[k].inputs = {"x"};
        for (uint64_t t = 0; t < 5; ++t)
            threads[k].cycles.push_back({100 * k + t});
    }
    auto fast = interleave(threads, 2);
    CHECK(fast.cycles.size() == 17);
    Trace tr{{"x"}, {16}, fast.cycles};
    auto back = deinterleave(tr, 3, {{"x", 0}});
    for (int k = 0; k < 3; ++k)
        CHECK(back[k].cycles == threads[k].cycles);
}

TEST_CASE("random streams are seeded and hold reset at first") {
    auto flat = flatten(support::load_unit("alu"), "alu");
    auto a = random_streams(flat, 2, 50, 9, 3);
    auto b = random_streams(flat, 2, 50, 9, 3);
    CHECK(a[0].cycles == b[0].cycles);
    CHECK(a[0].cycles != a[1].cycles);
    CHECK(random_streams(flat, 2, 50, 10, 3)[0].cycles != a[0].cycles);
    const auto rst = std::find(a[0].inputs.begin(), a[0].inputs.end(), "rst") - a[0].inputs.begin();
    for (int t = 0; t < 3; ++t)
        CHECK(a[0].cycles[t][rst] == 1);
}

TEST_CASE("C-slowed fixtures are equivalent per thread") {
    for (const auto& name : support::corpus()) {
        CAPTURE(name);
        auto e = support::emit_fixture(name, 3);
        auto v = support::check_text(name, e.result.text, 3, e.result.plan, 200, 5);
        CHECK(v.equivalent);
        CHECK(v.comparisons > 0);
        CHECK_FALSE(v.witness.has_value());
    }
}

TEST_CASE("threads are isolated") {
    // changing one thread's inputs leaves every other thread's outputs alone
    auto e = support::emit_fixture("mac", 3);
    auto fast = parse_source(e.result.text).modules.at(0);
    auto original = flatten(support::load_unit("mac"), "mac");
    auto streams = random_streams(original, 3, 60, 3, 3);
    auto base = deinterleave(simulate(fast, interleave(streams, 4)), 3, support::latencies(e.result.plan));
    streams[1] = random_streams(original, 3, 60, 99, 3)[0];
    auto changed = deinterleave(simulate(fast, interleave(streams, 4)), 3, support::latencies(e.result.plan));
    CHECK(base[0].cycles == changed[0].cycles);
    CHECK(base[2].cycles == changed[2].cycles);
    CHECK(base[1].cycles != changed[1].cycles);
}

TEST_CASE("a removed SP register is caught with a witness") {
    auto e = support::emit_fixture("fsm", 2);
    const auto& reg = e.result.plan.chains.at(0).registers.at(0);
    auto v = support::check_text("fsm", remove_sp_register(e.result.text, reg.name), 2, e.result.plan, 300, 5);
    CHECK_FALSE(v.equivalent);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->expected != v.witness->actual);
}

TEST_CASE("trace dumps") {
    auto flat = flatten(support::load_unit("counter"), "counter");
    auto t = simulate(flat, Stimulus{{"en"}, {{1}, {0}, {1}}});
    auto j = trace_json(t);
    CHECK(j.find("cslow.trace/1") != std::string::npos);
    auto vcd = trace_vcd(t, "counter");
    CHECK(vcd.find("$scope module counter $end") != std::string::npos);
    CHECK(vcd.find("$enddefinitions") != std::string::npos);
}
