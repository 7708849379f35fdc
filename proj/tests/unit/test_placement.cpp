#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace cslow;

TEST_CASE("balanced fixtures are legal under the path oracle") {
    std::vector<std::string> names = support::corpus();
    names.push_back("figure4");
    for (const auto& name : names)
        for (int cmf = 1; cmf <= 4; ++cmf) {
            CAPTURE(name);
            CAPTURE(cmf);
            auto g = support::load_graph(name);
            auto a = balance(g, initial_assignment(g, cmf));
            auto v = legality_check(g, a, 100000);
            CHECK(v.ok);
            CHECK(v.path_oracle_used);
        }
}

TEST_CASE("the initial assignment is legal and puts all logic in the last segment") {
    auto g = support::load_graph("alu");
    auto a = initial_assignment(g, 3);
    CHECK(legality_check(g, a, 1000).ok);
    for (int s : a.seg)
        CHECK(s == 3);
    auto obj = evaluate_objective(g, a);
    CHECK(obj.bottleneck == doctest::Approx(19));
}

TEST_CASE("illegal assignments are reported and refused") {
    auto g = support::load_graph("figure4");
    auto a = initial_assignment(g, 2);
    a.seg[0] = 3;
    auto v = legality_check(g, a, 1000);
    CHECK_FALSE(v.ok);
    CHECK_FALSE(v.violations.empty());
    CHECK_THROWS_AS(balance_traced(g, a), DesignError);
}

TEST_CASE("balance on chains matches the exhaustive optimum") {
    std::mt19937_64 rng(7);
    for (int cmf = 2; cmf <= 4; ++cmf)
        for (int rep = 0; rep < 40; ++rep) {
            const int n = 1 + static_cast<int>(rng() % 12);
            std::vector<uint32_t> w(n);
            for (auto& x : w)
                x = 1 + static_cast<uint32_t>(rng() % 16);
            auto g = support::make_chain(w);
            auto r = balance_traced(g, initial_assignment(g, cmf));
            CHECK(evaluate_objective(g, r.assignment).bottleneck == support::chain_optimum(w, cmf));
            for (size_t i = 1; i < r.history.size(); ++i)
                CHECK(r.history[i] < r.history[i - 1]);
            CHECK(legality_check(g, r.assignment, 1000).ok);
        }
}

TEST_CASE("exhaustive search over small chain cuts") {
    // every labeling of a 5-node chain into 3 segments; balance never loses
    const std::vector<uint32_t> w{4, 1, 3, 2, 5};
    auto g = support::make_chain(w);
    auto best = evaluate_objective(g, balance(g, initial_assignment(g, 3)));
    for (int a = 1; a <= 3; ++a)
        for (int b = a; b <= 3; ++b)
            for (int c = b; c <= 3; ++c)
                for (int d = c; d <= 3; ++d)
                    for (int e = d; e <= 3; ++e) {
                        SegmentAssignment s = initial_assignment(g, 3);
                        s.seg = {a, b, c, d, e};
                        REQUIRE(legality_check(g, s, 100).ok);
                        CHECK(best.bottleneck <= evaluate_objective(g, s).bottleneck);
                    }
    CHECK(best.bottleneck == 5);
}

TEST_CASE("balance is deterministic") {
    for (const auto& name : support::corpus()) {
        auto g = support::load_graph(name);
        auto a = balance(g, initial_assignment(g, 3));
        auto b = balance(g, initial_assignment(g, 3));
        CHECK(a.seg == b.seg);
    }
}

TEST_CASE("cut report totals agree with the placement") {
    for (const auto& name : support::corpus()) {
        auto g = support::load_graph(name);
        auto a = balance(g, initial_assignment(g, 3));
        auto r = segment_depths(g, a);
        CHECK(r.total_register_bits == sp_register_bits(g, a));
        CHECK(r.segments.size() == 3);
        uint32_t worst = 0;
        for (const auto& s : r.segments)
            worst = std::max(worst, s.depth);
        CHECK(worst == evaluate_objective(g, a).bottleneck);
        CHECK(cut_report_json(g, r) == cut_report_json(g, segment_depths(g, a)));
    }
}

TEST_CASE("unaligned outputs carry no alignment registers") {
    auto g = support::load_graph("alu");
    auto aligned = balance(g, initial_assignment(g, 3, true));
    auto free = balance(g, initial_assignment(g, 3, false));
    CHECK(legality_check(g, free, 1000).ok);
    CHECK(sp_register_bits(g, free) < sp_register_bits(g, aligned));
}

TEST_CASE("back-annotation") {
    auto g = support::load_graph("mac");
    auto a = balance(g, initial_assignment(g, 3));

    SUBCASE("an empty annotation is the identity") {
        auto ann = read_back_annotation(R"({"segments": {}})", "sta.json");
        CHECK(reoptimize_with_sta(g, a, ann).seg == a.seg);
    }
    SUBCASE("malformed input is rejected") {
        CHECK_THROWS_AS(read_back_annotation("{", "x"), DesignError);
        CHECK_THROWS_AS(read_back_annotation(R"({"segments": {"1": -3}})", "x"), DesignError);
        CHECK_THROWS_AS(read_back_annotation(R"({"segments": {"a": 3}})", "x"), DesignError);
        auto ann = read_back_annotation(R"({"segments": {"9": 1000}})", "x");
        CHECK_THROWS_AS(reoptimize_with_sta(g, a, ann), DesignError);
    }
    SUBCASE("a slow segment sheds logic") {
        auto r = segment_depths(g, a);
        const int slow = r.bottleneck_segment;
        std::string json = R"({"segments": {)";
        for (const auto& s : r.segments) {
            const double ps = std::max<uint32_t>(s.depth, 1) * 825.0 * (s.segment == slow ? 3.0 : 1.0);
            json += (s.segment > 1 ? "," : "") + ("\"" + std::to_string(s.segment) + "\": " + std::to_string(ps));
        }
        json += "}}";
        auto b = reoptimize_with_sta(g, a, read_back_annotation(json, "sta.json"));
        CHECK(legality_check(g, b, 100000).ok);
    }
}
