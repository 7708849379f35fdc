// Acceptance suite: one PASS/FAIL line per criterion.
#include "support.hpp"

#include "cslow/delay_model.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace cslow;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void fail(const std::string& why) {
        if (pass)
            detail.str("");
        else
            detail << "; ";
        pass = false;
        detail << why;
    }
};

struct CommandResult {
    int exit_code = -1;
    std::string out;
};

CommandResult run_cli(const std::string& args) {
    const std::string cmd = std::string(CSLOW_BIN) + " " + args + " 2>/dev/null";
    CommandResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0)
        r.out.append(buf, n);
    const int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

json metrics_rows(const std::string& args, Outcome& o) {
    auto r = run_cli("metrics --json " + args);
    if (r.exit_code != 0) {
        o.fail("metrics exited with " + std::to_string(r.exit_code));
        return json::array();
    }
    return json::parse(r.out).at("rows");
}

const json* row_for(const json& rows, int cmf) {
    for (const auto& r : rows)
        if (r.at("cmf").get<int>() == cmf)
            return &r;
    return nullptr;
}

void near(Outcome& o, const std::string& what, double got, double want, double tol) {
    if (std::fabs(got - want) > tol)
        o.fail(what + " = " + fmt(got, 4) + ", expected " + fmt(want, 4) + " +- " + fmt(tol, 4));
}

void near_rel(Outcome& o, const std::string& what, double got, double want, double rel) {
    if (std::fabs(got - want) > rel * want)
        o.fail(what + " = " + fmt(got, 2) + ", expected " + fmt(want, 2) + " +- " + fmt(rel * 100, 1) + "%");
}

// 1: theoretical timing.
Outcome criterion1() {
    constexpr double kNsTol = 0.001, kPointTol = 1.0, kMaxSeconds = 1.0;
    const double ns[] = {7.126, 4.884, 3.763};
    const double pct[] = {193, 282, 367};
    Outcome o;
    const auto t0 = Clock::now();
    auto rows = metrics_rows("--t-orig 13.853 --cmf 2,3,4", o);
    const double secs = seconds_since(t0);
    for (int cmf = 2; cmf <= 4; ++cmf) {
        const json* r = row_for(rows, cmf);
        if (!r) {
            o.fail("no row for cmf " + std::to_string(cmf));
            continue;
        }
        near(o, "cmf " + std::to_string(cmf) + " ns", r->at("theoretical_ns"), ns[cmf - 2], kNsTol);
        near(o, "cmf " + std::to_string(cmf) + " speedup %", r->at("speedup_percent"), pct[cmf - 2], kPointTol);
    }
    if (secs > kMaxSeconds)
        o.fail("took " + fmt(secs) + " s");
    if (o.pass)
        o.detail << "7.126/4.884/3.763 ns, speedups within 1 point, " << fmt(secs) << " s";
    return o;
}

// 2: derived implementation metrics.
Outcome criterion2() {
    constexpr double kPerfTol = 0.02, kRatioTol = 0.01, kPpsRel = 0.015, kMaxSeconds = 1.0;
    const double perf[] = {1.88, 2.56, 2.82};
    const double ratio[] = {0.97, 0.90, 0.76};
    const double pps[] = {63.8, 96.1, 116, 114};
    Outcome o;
    const auto t0 = Clock::now();
    auto rows = metrics_rows("--t-orig 13.853 --cmf 2,3,4 --t-achieved 7.327,5.398,4.902 --slices 1131,1414,1594,1773", o);
    const double secs = seconds_since(t0);
    for (int cmf = 1; cmf <= 4; ++cmf) {
        const json* r = row_for(rows, cmf);
        const std::string tag = "cmf " + std::to_string(cmf);
        if (!r || !r->contains("pps_khz")) {
            o.fail("no PpS for " + tag);
            continue;
        }
        near_rel(o, tag + " PpS", r->at("pps_khz"), pps[cmf - 1], kPpsRel);
        if (cmf == 1)
            continue;
        near(o, tag + " relative performance", r->at("relative_performance"), perf[cmf - 2], kPerfTol);
        near(o, tag + " timing ratio", r->at("timing_ratio"), ratio[cmf - 2], kRatioTol);
    }
    if (secs > kMaxSeconds)
        o.fail("took " + fmt(secs) + " s");
    if (o.pass)
        o.detail << "relative performance, timing ratio and PpS within tolerance, " << fmt(secs) << " s";
    return o;
}

// 3: ASIC area estimate from flip-flop counts.
Outcome criterion3() {
    constexpr double kTol = 0.01, kMaxSeconds = 1.0;
    const double area[] = {1.59, 1.85, 2.01};
    const double rel_ff[] = {2.42, 3.04, 3.43};
    Outcome o;
    const auto t0 = Clock::now();
    auto rows = metrics_rows("--t-orig 13.853 --cmf 2,3,4 --ff 1239,2995,3769,4244", o);
    const double secs = seconds_since(t0);
    for (int cmf = 2; cmf <= 4; ++cmf) {
        const json* r = row_for(rows, cmf);
        const std::string tag = "cmf " + std::to_string(cmf);
        if (!r || !r->contains("relative_area_asic")) {
            o.fail("no area for " + tag);
            continue;
        }
        near(o, tag + " relative area", r->at("relative_area_asic"), area[cmf - 2], kTol);
        near(o, tag + " relative FF", r->at("relative_ff"), rel_ff[cmf - 2], kTol);
    }
    if (secs > kMaxSeconds)
        o.fail("took " + fmt(secs) + " s");
    if (o.pass)
        o.detail << "areas 1.59/1.85/2.01 and FF ratios 2.42/3.04/3.43 within 0.01, " << fmt(secs) << " s";
    return o;
}

// 4: C-thread equivalence through the CLI.
Outcome criterion4() {
    constexpr size_t kCycles = 1000;
    constexpr uint64_t kSeed = 2024;
    constexpr double kMaxSeconds = 60.0;
    Outcome o;
    const auto t0 = Clock::now();
    uint64_t comparisons = 0;
    int runs = 0;
    for (const auto& name : support::corpus())
        for (int cmf = 2; cmf <= 4; ++cmf) {
            auto r = run_cli("check " + support::fixture_path(name) + " --cmf " + std::to_string(cmf) + " --cycles " +
                             std::to_string(kCycles) + " --seed " + std::to_string(kSeed));
            const std::string tag = name + " cmf " + std::to_string(cmf);
            ++runs;
            if (r.exit_code != 0) {
                o.fail(tag + " exit " + std::to_string(r.exit_code));
                continue;
            }
            auto v = json::parse(r.out);
            if (!v.at("equivalent").get<bool>() || v.at("cycles_per_thread").get<size_t>() != kCycles ||
                v.at("warmup").get<int>() != cmf)
                o.fail(tag + " not equivalent");
            comparisons += v.at("comparisons").get<uint64_t>();
        }
    const double secs = seconds_since(t0);
    if (secs > kMaxSeconds)
        o.fail("took " + fmt(secs, 1) + " s");
    if (o.pass)
        o.detail << runs << " runs, " << comparisons << " output comparisons, " << fmt(secs, 1) << " s";
    return o;
}

std::set<std::string> sp_register_names(const RewritePlan& plan) {
    std::set<std::string> s;
    for (const auto& c : plan.chains)
        for (const auto& r : c.registers)
            s.insert(r.name);
    return s;
}

// 5: every register-to-register path of the emitted design crosses cmf-1 SP registers.
Outcome criterion5() {
    Outcome o;
    uint64_t paths = 0;
    for (const auto& name : support::corpus())
        for (int cmf = 2; cmf <= 4; ++cmf) {
            const std::string tag = name + " cmf " + std::to_string(cmf);
            auto e = support::emit_fixture(name, cmf);
            auto placement = legality_check(e.graph, e.assignment, 1000000);
            if (!placement.ok || !placement.path_oracle_used)
                o.fail(tag + " placement oracle");

            auto g = elaborate(parse_source(e.result.text), name);
            const auto sp = sp_register_names(e.result.plan);
            const std::string& counter = e.result.plan.thread_counter;
            uint64_t violations = 0;
            std::function<void(NodeRef, int)> walk = [&](NodeRef n, int crossed) {
                for (int id : g.out_edges(n)) {
                    const NodeRef h = g.edges[id].head;
                    if (!h.seq) {
                        walk(h, crossed);
                        continue;
                    }
                    const auto& s = g.seq_nodes[h.id];
                    if (s.kind == SeqKind::RegisterBank && sp.count(s.name)) {
                        walk(h, crossed + 1);
                        continue;
                    }
                    ++paths;
                    if (crossed != cmf - 1)
                        ++violations;
                }
            };
            for (const auto& s : g.seq_nodes) {
                if (!s.is_source() || sp.count(s.name) || (!counter.empty() && s.name == counter))
                    continue;
                walk({true, s.id}, 0);
            }
            if (violations)
                o.fail(tag + ": " + std::to_string(violations) + " paths off by SP count");
        }
    if (o.pass)
        o.detail << paths << " emitted paths, zero violations";
    return o;
}

// 6: placement quality on random chains.
Outcome criterion6() {
    constexpr int kCases = 100, kMaxNodes = 12;
    constexpr uint32_t kMaxWeight = 16;
    constexpr double kOptimalShare = 0.90;
    Outcome o;
    std::ostringstream shares;
    for (int cmf = 2; cmf <= 4; ++cmf) {
        std::mt19937_64 rng(1000 + cmf);
        int optimal = 0;
        for (int c = 0; c < kCases; ++c) {
            const int n = 1 + static_cast<int>(rng() % kMaxNodes);
            std::vector<uint32_t> w(n);
            for (auto& x : w)
                x = 1 + static_cast<uint32_t>(rng() % kMaxWeight);
            auto g = support::make_chain(w);
            auto r = balance_traced(g, initial_assignment(g, cmf));
            const auto got = static_cast<uint64_t>(evaluate_objective(g, r.assignment).bottleneck);
            uint64_t total = 0, maxw = 0;
            for (auto x : w) {
                total += x;
                maxw = std::max<uint64_t>(maxw, x);
            }
            optimal += got == support::chain_optimum(w, cmf);
            if (got > (total + cmf - 1) / cmf + maxw)
                o.fail("cmf " + std::to_string(cmf) + " case " + std::to_string(c) + " exceeds the bound");
            for (size_t i = 1; i < r.history.size(); ++i)
                if (r.history[i - 1] < r.history[i])
                    o.fail("cmf " + std::to_string(cmf) + " case " + std::to_string(c) + " objective increased");
            if (!legality_check(g, r.assignment, 1000).ok)
                o.fail("cmf " + std::to_string(cmf) + " case " + std::to_string(c) + " illegal");
        }
        if (optimal < kOptimalShare * kCases)
            o.fail("cmf " + std::to_string(cmf) + " optimal in " + std::to_string(optimal) + "/100");
        shares << (cmf > 2 ? "/" : "") << optimal;
    }
    if (o.pass)
        o.detail << "optimal in " << shares.str() << " of 100 cases for cmf 2/3/4";
    return o;
}

// 7: longest paths against brute force.
Outcome criterion7() {
    constexpr uint64_t kPathLimit = 10000;
    Outcome o;
    std::vector<std::string> names = support::corpus();
    names.push_back("figure4");
    int checked = 0;
    for (const auto& name : names) {
        auto g = support::load_graph(name);
        if (count_paths(g) > kPathLimit)
            continue;
        ++checked;
        const auto t = longest_paths(g).t_2ild;
        const auto brute = support::brute_force_max(g);
        if (t != brute)
            o.fail(name + ": " + std::to_string(t) + " vs brute force " + std::to_string(brute));
    }
    if (o.pass)
        o.detail << checked << " designs, zero mismatches";
    return o;
}

// 8: Gaussian limit of the segment delay model.
Outcome criterion8() {
    constexpr uint32_t kPairs = 70;
    constexpr size_t kSamples = 100000;
    constexpr double kMean = 57750.0, kMeanRel = 0.01, kSkew = 0.15, kMaxSeconds = 10.0;
    Outcome o;
    const auto t0 = Clock::now();
    auto s = sample_segment_delay(kPairs, DelayModel{}, kSamples);
    const double secs = seconds_since(t0);
    near_rel(o, "mean", s.mean, kMean, kMeanRel);
    if (std::fabs(s.skewness) >= kSkew)
        o.fail("skewness " + fmt(s.skewness));
    if (secs > kMaxSeconds)
        o.fail("took " + fmt(secs) + " s");
    if (o.pass)
        o.detail << "mean " << fmt(s.mean, 1) << " ps, skewness " << fmt(s.skewness, 4) << ", " << fmt(secs, 2) << " s";
    return o;
}

uint64_t stage_clocked_bits(const ModuleDecl& m) {
    uint64_t bits = 0;
    std::function<void(const StmtPtr&, std::set<std::string>&)> targets = [&](const StmtPtr& s, std::set<std::string>& out) {
        if (!s)
            return;
        switch (s->kind) {
        case StmtKind::Assign:
            out.insert(s->lhs.name);
            break;
        case StmtKind::Block:
            for (const auto& b : s->body)
                targets(b, out);
            break;
        case StmtKind::If:
            targets(s->then_stmt, out);
            targets(s->else_stmt, out);
            break;
        case StmtKind::Case:
            for (const auto& it : s->items)
                targets(it.body, out);
            break;
        }
    };
    std::set<std::string> regs;
    for (const auto& item : m.items)
        if (const auto* p = std::get_if<ProcessBlock>(&item))
            if (p->sensitivity.clocked && is_stage_clock(p->sensitivity.clock))
                targets(p->body, regs);
    for (const auto& r : regs)
        bits += m.width_of(r);
    return bits;
}

// 9: emitted Verilog reparses and carries exactly the reported SP bits.
Outcome criterion9() {
    Outcome o;
    int designs = 0;
    for (const auto& name : support::corpus())
        for (int cmf = 2; cmf <= 4; ++cmf) {
            const std::string tag = name + " cmf " + std::to_string(cmf);
            auto e = support::emit_fixture(name, cmf);
            ++designs;
            SourceUnit unit;
            try {
                unit = parse_source(e.result.text, tag);
            } catch (const SourceError& err) {
                o.fail(tag + ": " + err.what());
                continue;
            }
            if (!subset_check(unit).empty())
                o.fail(tag + ": subset diagnostics");
            const auto reported = segment_depths(e.graph, e.assignment).total_register_bits;
            const auto counted = stage_clocked_bits(unit.modules.at(0));
            if (counted != reported)
                o.fail(tag + ": " + std::to_string(counted) + " SP bits vs " + std::to_string(reported) + " reported");
        }
    if (o.pass)
        o.detail << designs << " designs reparse clean, SP bits match";
    return o;
}

// 10: every removed SP register is caught.
Outcome criterion10() {
    constexpr int kMinFaults = 20;
    constexpr size_t kCycles = 1000;
    constexpr uint64_t kSeed = 77;
    Outcome o;
    std::ostringstream counts;
    for (const auto& name : support::corpus()) {
        int faults = 0, caught = 0;
        for (int cmf = 2; cmf <= 6; ++cmf) {
            auto e = support::emit_fixture(name, cmf);
            for (const auto& reg : sp_register_names(e.result.plan)) {
                ++faults;
                auto broken = remove_sp_register(e.result.text, reg);
                auto v = support::check_text(name, broken, cmf, e.result.plan, kCycles, kSeed);
                if (!v.equivalent && v.witness && v.witness->expected != v.witness->actual)
                    ++caught;
                else
                    o.fail(name + " cmf " + std::to_string(cmf) + " " + reg + " undetected");
            }
        }
        if (faults < kMinFaults)
            o.fail(name + ": only " + std::to_string(faults) + " faults");
        counts << (counts.tellp() > 0 ? ", " : "") << name << " " << caught << "/" << faults;
    }
    if (o.pass)
        o.detail << counts.str();
    return o;
}

}  // namespace

int main() {
    using Fn = Outcome (*)();
    const Fn criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                           criterion6, criterion7, criterion8, criterion9, criterion10};
    int failed = 0;
    for (int i = 0; i < 10; ++i) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail.str() << ")"
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
