#include "support.hpp"

#include "cslow/eval.hpp"
#include "cslow/printer.hpp"

#include <doctest.h>

using namespace cslow;

namespace {

std::vector<Diagnostic> check(const std::string& src) {
    return subset_check(parse_source(src));
}

bool mentions(const std::vector<Diagnostic>& ds, const std::string& what) {
    for (const auto& d : ds)
        if (d.message.find(what) != std::string::npos)
            return true;
    return false;
}

}  // namespace

TEST_CASE("every fixture parses and passes the subset check") {
    for (const auto& name : support::corpus()) {
        CAPTURE(name);
        auto unit = support::load_unit(name);
        CHECK(subset_check(unit).empty());
    }
    CHECK(subset_check(support::load_unit("figure4")).empty());
}

TEST_CASE("print then parse is the identity on the AST") {
    for (const auto& name : support::corpus()) {
        CAPTURE(name);
        auto unit = support::load_unit(name);
        auto again = parse_source(pretty_print(unit));
        CHECK(equal(unit, again));
        CHECK(pretty_print(again) == pretty_print(unit));
    }
}

TEST_CASE("syntax errors carry file, line and column") {
    try {
        parse_source("module m(input a);\n  assign = a;\nendmodule\n", "bad.v");
        FAIL("expected a SourceError");
    } catch (const SourceError& e) {
        CHECK(e.span().begin.line == 2);
        auto text = format_diagnostic(e.diagnostic(), "bad.v");
        CHECK(text.rfind("bad.v:2:", 0) == 0);
    }
}

TEST_CASE("constructs outside the subset are rejected") {
    CHECK_THROWS_AS(parse_source("module m(input a); initial begin end endmodule"), SourceError);

    SUBCASE("two drivers") {
        auto ds = check("module m(input a, output y); assign y = a; assign y = ~a; endmodule");
        CHECK_FALSE(ds.empty());
    }
    SUBCASE("latch") {
        auto ds = check("module m(input a, input e, output reg y); always @* if (e) y = a; endmodule");
        CHECK_FALSE(ds.empty());
    }
    SUBCASE("blocking assignment in a clocked process") {
        auto ds = check("module m(input clk, input a, output reg y); always @(posedge clk) y = a; endmodule");
        CHECK_FALSE(ds.empty());
    }
    SUBCASE("undeclared identifier") {
        auto ds = check("module m(input a, output y); assign y = b; endmodule");
        CHECK(mentions(ds, "b"));
    }
    SUBCASE("two clock domains") {
        auto ds = check(
            "module m(input c1, input c2, input a, output reg x, output reg y);"
            " always @(posedge c1) x <= a; always @(posedge c2) y <= a; endmodule");
        CHECK_FALSE(ds.empty());
    }
    SUBCASE("combinational cycle") {
        auto ds = check("module m(input a, output y); wire p, q; assign p = q & a; assign q = p; assign y = q; endmodule");
        CHECK_FALSE(ds.empty());
    }
}

TEST_CASE("stage clocks belong to the main clock domain") {
    CHECK(is_stage_clock("clk_sp1"));
    CHECK(is_stage_clock("clk_sp12"));
    CHECK_FALSE(is_stage_clock("clk_sp"));
    CHECK_FALSE(is_stage_clock("clk_spx"));
    auto ds = check(
        "module m(input clk, input clk_sp1, input a, output reg y); reg s;"
        " always @(posedge clk_sp1) s <= #1 a; always @(posedge clk) y <= s; endmodule");
    CHECK(ds.empty());
}

TEST_CASE("flatten prefixes instance-internal names") {
    auto unit = parse_source(
        "module inv(input a, output y); wire t; assign t = ~a; assign y = t; endmodule\n"
        "module top(input x, output z); inv u0(.a(x), .y(z)); endmodule\n");
    auto flat = flatten(unit, "top");
    bool saw_instance = false, saw_prefixed = false;
    for (const auto& item : flat.items) {
        saw_instance |= std::holds_alternative<Instance>(item);
        if (const auto* n = std::get_if<NetDecl>(&item))
            saw_prefixed |= n->name == "u0__t";
    }
    CHECK_FALSE(saw_instance);
    CHECK(saw_prefixed);
}

TEST_CASE("operator semantics are two-valued and width-masked") {
    CHECK(eval_binary(BinaryOp::Add, 255, 8, 1, 8, 8) == 0);
    CHECK(eval_binary(BinaryOp::Add, 255, 8, 1, 8, 9) == 256);
    CHECK(eval_binary(BinaryOp::Sub, 0, 4, 1, 4, 4) == 15);
    CHECK(eval_binary(BinaryOp::Mul, 15, 4, 15, 4, 8) == 225);
    CHECK(eval_binary(BinaryOp::Lt, 3, 4, 9, 4, 1) == 1);
    CHECK(eval_binary(BinaryOp::Shl, 1, 8, 9, 4, 8) == 0);
    CHECK(eval_unary(UnaryOp::RedXor, 0b1011, 4, 1) == 1);
    CHECK(eval_unary(UnaryOp::BitNot, 0, 3, 3) == 7);
}
