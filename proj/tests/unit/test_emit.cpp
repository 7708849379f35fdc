#include "support.hpp"

#include "cslow/printer.hpp"

#include <doctest.h>

using namespace cslow;

namespace {

bool contains(const std::string& text, const std::string& what) {
    return text.find(what) != std::string::npos;
}

}  // namespace

TEST_CASE("figure4 fixture: a cut in front of the AND gate") {
    auto g = support::load_graph("figure4");
    REQUIRE(g.comb_nodes.size() == 1);
    auto a = initial_assignment(g, 2);
    a.seg[0] = 2;  // both operands cross cut 1
    REQUIRE(legality_check(g, a, 100).ok);
    auto text = emit_verilog(g, a);
    CHECK(contains(text, "assign lhs = rhs1_sp1 & rhs2_sp1;"));
    CHECK(contains(text, "always @(posedge clk_sp1)\n        rhs2_sp1 <= #1 rhs2;"));
    CHECK(contains(text, "input clk_sp1,"));
    CHECK(subset_check(parse_source(text)).empty());

    a.seg[0] = 1;  // cut behind the gate
    text = emit_verilog(g, a);
    CHECK(contains(text, "assign lhs = rhs1 & rhs2;"));
    CHECK(contains(text, "lhs_sp1 <= #1 lhs;"));
}

TEST_CASE("cmf 1 reproduces the input") {
    for (const auto& name : support::corpus()) {
        auto g = support::load_graph(name);
        auto e = emit_design(g, initial_assignment(g, 1));
        CHECK(e.plan.chains.empty());
        CHECK(equal(parse_source(e.text).modules.at(0), flatten(support::load_unit(name), name)));
    }
}

TEST_CASE("emission options") {
    auto g = support::load_graph("counter");
    auto a = balance(g, initial_assignment(g, 3));
    EmitOptions opt;
    opt.sp_delay = false;
    CHECK_FALSE(contains(emit_verilog(g, a, opt), "#1"));
    opt.tie_clocks = true;
    auto tied = emit_verilog(g, a, opt);
    CHECK_FALSE(contains(tied, "clk_sp"));
    CHECK(subset_check(parse_source(tied)).empty());
    CHECK(contains(emit_verilog(g, a), "input clk_sp2"));
}

TEST_CASE("emitted fixtures reparse, elaborate and keep their register bits") {
    for (const auto& name : support::corpus())
        for (int cmf = 2; cmf <= 4; ++cmf) {
            CAPTURE(name);
            CAPTURE(cmf);
            auto e = support::emit_fixture(name, cmf);
            auto unit = parse_source(e.result.text);
            CHECK(subset_check(unit).empty());
            CHECK_NOTHROW(elaborate(unit, name));
            uint64_t bits = 0;
            for (const auto& c : e.result.plan.chains)
                for (const auto& r : c.registers)
                    bits += r.width;
            CHECK(bits == segment_depths(e.graph, e.assignment).total_register_bits);
            CHECK(e.result.text == support::emit_fixture(name, cmf).result.text);
        }
}

TEST_CASE("memories are banked by thread") {
    auto e = support::emit_fixture("ram_rmw", 3);
    CHECK(e.result.plan.banked_memories.size() == 1);
    CHECK(e.result.plan.thread_counter == "csr_tid");
    CHECK(contains(e.result.text, "csr_tid"));
}

TEST_CASE("schedule JSON") {
    auto e = support::emit_fixture("alu", 3);
    auto s = emit_schedule(e.graph, e.assignment, e.result.plan);
    CHECK(contains(s, "\"schema\": \"cslow.schedule/1\""));
    CHECK(contains(s, "\"threads\": 3"));
    for (const auto& o : e.result.plan.outputs)
        CHECK(o.latency == 2);
    CHECK(s == emit_schedule(e.graph, e.assignment, e.result.plan));
}

TEST_CASE("fault injection edits one register") {
    auto e = support::emit_fixture("counter", 2);
    const auto& reg = e.result.plan.chains.at(0).registers.at(0);
    auto broken = remove_sp_register(e.result.text, reg.name);
    CHECK(broken != e.result.text);
    CHECK(contains(broken, "assign " + reg.name + " = " + reg.input + ";"));
    CHECK(subset_check(parse_source(broken)).empty());
    const SpRegister* wide = nullptr;
    for (const auto& c : e.result.plan.chains)
        for (const auto& r : c.registers)
            if (!wide && r.width > 1)
                wide = &r;
    REQUIRE(wide);
    auto masked = remove_sp_register(e.result.text, wide->name, 1);
    CHECK(contains(masked, wide->name + "__q"));
    CHECK(subset_check(parse_source(masked)).empty());
    CHECK_THROWS_AS(remove_sp_register(e.result.text, "no_such_reg"), DesignError);
}
