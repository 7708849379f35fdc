#include "support.hpp"

#include "cslow/delay_model.hpp"
#include "cslow/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace cslow;

TEST_CASE("fixture depths under the default cost table") {
    const std::map<std::string, uint32_t> expected{
        {"counter", 8}, {"fsm", 8}, {"alu", 19}, {"mac", 50}, {"ram_rmw", 8}, {"figure4", 1}};
    for (const auto& [name, t] : expected) {
        CAPTURE(name);
        auto g = support::load_graph(name);
        CHECK(longest_paths(g).t_2ild == t);
    }
}

TEST_CASE("alu topological order matches the golden file") {
    auto g = support::load_graph("alu");
    std::ostringstream got;
    for (int id : topo_order(g))
        got << g.node_label({false, id}) << ' ' << g.comb_nodes[id].weight << '\n';
    std::ifstream in(support::golden_path("alu_topo.txt"));
    std::stringstream want;
    want << in.rdbuf();
    CHECK(got.str() == want.str());
}

TEST_CASE("longest paths agree with brute-force enumeration") {
    std::vector<std::string> names = support::corpus();
    names.push_back("figure4");
    for (const auto& name : names) {
        CAPTURE(name);
        auto g = support::load_graph(name);
        auto r = longest_paths(g);
        CHECK(r.t_2ild == support::brute_force_max(g));
        // the witness is a real path of that depth
        uint64_t sum = 0;
        for (const auto& n : r.witness)
            if (!n.seq)
                sum += g.comb_nodes[n.id].weight;
        CHECK(sum == r.t_2ild);
        REQUIRE(r.witness.size() >= 2);
        CHECK(r.witness.front().seq);
        CHECK(r.witness.back().seq);
        // d_in + weight + d_out bounded by T everywhere
        for (const auto& c : g.comb_nodes)
            CHECK(r.d_in[c.id] + c.weight + r.d_out[c.id] <= r.t_2ild);
    }
}

TEST_CASE("path enumeration counts agree") {
    for (const auto& name : support::corpus()) {
        auto g = support::load_graph(name);
        uint64_t brute = 0;
        support::brute_force_paths(g, [&](uint64_t) { ++brute; });
        CHECK(count_paths(g) == brute);
        auto paths = enumerate_paths(g, 100000);
        REQUIRE(paths);
        CHECK(paths->size() == brute);
        CHECK_FALSE(enumerate_paths(g, brute - 1).has_value());
    }
}

TEST_CASE("cost table rows") {
    CostTable t;
    RtlcsShape s;
    s.result_width = 16;
    s.operand_widths = {16, 16};
    CHECK(rtlcs_depth(Rtlcs::Math, s, t) == 16);
    s.is_mul = true;
    CHECK(rtlcs_depth(Rtlcs::Math, s, t) == 29);  // DSP-scaled: 16 * 1520 / 825
    s.is_mul = false;
    CHECK(rtlcs_depth(Rtlcs::Compare, s, t) == 5);
    CHECK(rtlcs_depth(Rtlcs::If, s, t) == 1);
    CHECK(rtlcs_depth(Rtlcs::Comb, s, t) == 1);
    CHECK(rtlcs_depth(Rtlcs::Wiring, s, t) == 0);
    s.alternatives = 3;
    CHECK(rtlcs_depth(Rtlcs::Case, s, t) == 2);
    s.alternatives = 1;
    CHECK(rtlcs_depth(Rtlcs::Case, s, t) == 1);
    s.operand_widths = {8};
    CHECK(rtlcs_depth(Rtlcs::Unary, s, t) == 3);
}

TEST_CASE("cost table overrides") {
    CostTable t;
    t.apply_json(R"({"if_depth": 3, "reg_overhead_ns": 0.5})");
    CHECK(t.if_depth == 3);
    CHECK(t.reg_overhead_ns == doctest::Approx(0.5));
    CHECK_THROWS_AS(t.apply_json(R"({"no_such_row": 1})"), DesignError);
    CHECK_THROWS_AS(t.apply_json(R"({"if_depth": "x"})"), DesignError);
    CostTable back;
    back.apply_json(t.to_json());
    CHECK(back.to_json() == t.to_json());
    // weights follow the table
    auto g = support::load_graph("counter", t);
    auto g2 = support::load_graph("counter");
    weigh_graph(g2, t);
    CHECK(longest_paths(g).t_2ild == longest_paths(g2).t_2ild);
}

TEST_CASE("graph and report JSON are deterministic") {
    auto a = support::load_graph("mac");
    auto b = support::load_graph("mac");
    CHECK(graph_to_json(a) == graph_to_json(b));
    CostTable t;
    CHECK(depth_report_json(a, longest_paths(a), t) == depth_report_json(b, longest_paths(b), t));
}

TEST_CASE("theoretical timing and derived metrics") {
    auto th = theoretical_timing(13.853, 2);
    CHECK(th.ns == doctest::Approx(7.1265).epsilon(1e-9));
    CHECK(theoretical_timing(13.853, 1).ns == doctest::Approx(13.853));
    auto m = derive_metrics(13.853, th.ns, 7.327, 1414.0, 100.0, 150.0);
    CHECK(m.relative_performance == doctest::Approx(13.853 / 7.327));
    CHECK(*m.timing_ratio == doctest::Approx(th.ns / 7.327));
    CHECK(*m.pps_khz == doctest::Approx(1e6 / 7.327 / 1414.0));
    CHECK(*m.relative_luts == doctest::Approx(1.5));
    CHECK(relative_area_asic(2.0, 1.0) == doctest::Approx(0.58 + 0.84));
}

TEST_CASE("segment delay model") {
    DelayModel model;
    auto a = sample_segment_delay(10, model, 2000);
    auto b = sample_segment_delay(10, model, 2000);
    CHECK(a.mean == b.mean);
    CHECK(a.mean == doctest::Approx(8250).epsilon(0.03));
    CHECK(analytic_skewness(1, model) == doctest::Approx(1.0));
    CHECK(analytic_skewness(70, model) == doctest::Approx(std::sqrt(8.0 / 560)));
    model.seed = 2;
    CHECK(sample_segment_delay(10, model, 2000).mean != a.mean);
}
