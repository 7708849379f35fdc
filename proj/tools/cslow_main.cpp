// cslow: C-slow retiming driver.
#include "cslow/emit.hpp"
#include "cslow/metrics.hpp"
#include "cslow/parser.hpp"
#include "cslow/placement.hpp"
#include "cslow/printer.hpp"
#include "cslow/sim.hpp"
#include "cslow/subset.hpp"
#include "cslow/timing.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <set>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace cslow;
namespace fs = std::filesystem;

namespace {

enum Exit { Ok = 0, UserError = 1, InternalError = 2 };

struct RunConfig {
    std::vector<std::string> files;
    std::string top;
    int cmf = 2;
    std::string cost_table;
    bool tie_clocks = false;
    bool align_outputs = true;
    bool sp_delay = true;
    std::optional<uint64_t> seed;
    uint64_t path_limit = 100000;
    std::string out_dir;
    std::string sta;
    size_t cycles = 1000;
};

// Loads a config file; keys mirror the long flag names.
void load_config(const std::string& path, RunConfig& c) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DesignError("config " + path + ": " + e.what());
    }
    if (!j.is_object())
        throw DesignError("config " + path + ": expected a JSON object");
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "files")
                c.files = v.get<std::vector<std::string>>();
            else if (k == "top")
                c.top = v.get<std::string>();
            else if (k == "cmf")
                c.cmf = v.get<int>();
            else if (k == "cost-table")
                c.cost_table = v.get<std::string>();
            else if (k == "tie-clocks")
                c.tie_clocks = v.get<bool>();
            else if (k == "align-outputs")
                c.align_outputs = v.get<bool>();
            else if (k == "sp-delay")
                c.sp_delay = v.get<bool>();
            else if (k == "seed")
                c.seed = v.get<uint64_t>();
            else if (k == "path-limit")
                c.path_limit = v.get<uint64_t>();
            else if (k == "out")
                c.out_dir = v.get<std::string>();
            else if (k == "sta")
                c.sta = v.get<std::string>();
            else if (k == "cycles")
                c.cycles = v.get<size_t>();
            else
                throw DesignError("config " + path + ": unknown key '" + k + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DesignError("config " + path + ": " + e.what());
    }
}

// Raised after diagnostics have already been printed.
struct ReportedError {};

struct Design {
    SourceUnit unit;
    DesignGraph graph;
    CostTable table;
};

SourceUnit parse_checked(const std::vector<std::string>& files) {
    if (files.empty())
        throw DesignError("no input files");
    SourceUnit unit;
    bool failed = false;
    for (const auto& f : files) {
        if (!fs::exists(f))
            throw DesignError("input file '" + f + "' does not exist");
        SourceUnit part;
        try {
            part = parse_source(read_text_file(f), f);
        } catch (const SourceError& e) {
            std::cerr << format_diagnostic(e.diagnostic(), f) << '\n';
            failed = true;
            continue;
        }
        for (const auto& m : part.modules)
            for (const auto& d : subset_check(m)) {
                std::cerr << format_diagnostic(d, f) << '\n';
                failed |= d.severity == Severity::Error;
            }
        if (unit.file_name.empty())
            unit.file_name = f;
        unit.source_text += part.source_text;
        for (auto& m : part.modules)
            unit.modules.push_back(std::move(m));
    }
    if (failed)
        throw ReportedError{};
    for (const auto& d : subset_check(unit)) {
        std::cerr << format_diagnostic(d, unit.file_name) << '\n';
        failed |= d.severity == Severity::Error;
    }
    if (failed)
        throw ReportedError{};
    return unit;
}

std::string pick_top(const SourceUnit& unit, const std::string& requested) {
    if (!requested.empty())
        return requested;
    // the module nobody instantiates; the last one on ties
    std::set<std::string> used;
    for (const auto& m : unit.modules)
        for (const auto& item : m.items)
            if (const auto* inst = std::get_if<Instance>(&item))
                used.insert(inst->module_name);
    for (auto it = unit.modules.rbegin(); it != unit.modules.rend(); ++it)
        if (!used.count(it->name))
            return it->name;
    throw DesignError("cannot determine the top module; pass --top");
}

Design load_design(const RunConfig& c) {
    Design d;
    d.unit = parse_checked(c.files);
    if (!c.cost_table.empty())
        d.table.apply_json(read_text_file(c.cost_table));
    d.graph = elaborate(d.unit, pick_top(d.unit, c.top));
    weigh_graph(d.graph, d.table);
    return d;
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os)
        throw DesignError("cannot write '" + p.string() + "'");
    os << text;
    if (text.empty() || text.back() != '\n')
        os << '\n';
}

uint64_t resolve_seed(const RunConfig& c) {
    if (c.seed)
        return *c.seed;
    if (const char* env = std::getenv("CSLOW_SEED")) {
        try {
            size_t pos = 0;
            const uint64_t v = std::stoull(env, &pos);
            if (pos == std::string(env).size())
                return v;
        } catch (const std::exception&) {
        }
        throw DesignError(std::string("CSLOW_SEED is not an unsigned integer: '") + env + "'");
    }
    return 1;
}

struct CsrArtifacts {
    SegmentAssignment assignment;
    CutReport cuts;
    EmitResult emitted;
    std::string schedule;
};

CsrArtifacts run_csr(const Design& d, const RunConfig& c) {
    if (c.cmf < 1)
        throw DesignError("cmf must be >= 1");
    EmitOptions opt;
    opt.sp_delay = c.sp_delay;
    opt.tie_clocks = c.tie_clocks;
    CsrArtifacts r;
    r.assignment = balance(d.graph, initial_assignment(d.graph, c.cmf, c.align_outputs));
    bool reoptimized = false;
    std::string ann_source;
    if (!c.sta.empty()) {
        auto ann = read_back_annotation(read_text_file(c.sta), c.sta);
        r.assignment = reoptimize_with_sta(d.graph, r.assignment, ann, d.table);
        reoptimized = !ann.segment_ps.empty();
        ann_source = c.sta;
    }
    auto legal = legality_check(d.graph, r.assignment, c.path_limit);
    if (!legal.ok)
        throw DesignError("internal: illegal cut placement: " + legal.violations.front());
    r.cuts = segment_depths(d.graph, r.assignment);
    r.cuts.reoptimized = reoptimized;
    if (reoptimized)
        r.cuts.notes.push_back("re-optimized with back-annotated segment delays from " + ann_source);
    if (!legal.path_oracle_used)
        r.cuts.notes.push_back("path oracle skipped: more than " + std::to_string(c.path_limit) + " paths");
    for (int id : r.cuts.unsplittable_nodes)
        r.cuts.notes.push_back("node " + d.graph.node_label({false, id}) + " exceeds ceil(T/cmf) and cannot be split");
    r.emitted = emit_design(d.graph, r.assignment, opt);
    r.schedule = emit_schedule(d.graph, r.assignment, r.emitted.plan, opt);
    return r;
}

std::map<std::string, int> latencies(const RewritePlan& plan) {
    std::map<std::string, int> m;
    for (const auto& o : plan.outputs)
        m[o.port] = o.latency;
    return m;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw DesignError(std::string("--") + what + ": '" + tok + "' is not a number");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"C-slow retiming for a synthesizable Verilog subset"};
    app.require_subcommand(1);

    RunConfig flags;
    std::string config_path;
    std::string seed_text;
    bool no_align = false, no_sp_delay = false;

    auto add_design_opts = [&](CLI::App* sub) {
        sub->add_option("files", flags.files, "Verilog source files");
        sub->add_option("--top", flags.top, "top module");
        sub->add_option("--config", config_path, "JSON config mirroring the flags");
        sub->add_option("--cost-table", flags.cost_table, "JSON cost-table overrides");
    };
    auto add_csr_opts = [&](CLI::App* sub) {
        add_design_opts(sub);
        sub->add_option("--cmf", flags.cmf, "core multiplication factor");
        sub->add_flag("--tie-clocks", flags.tie_clocks, "clock SP registers from the main clock");
        sub->add_flag("--no-align-outputs", no_align, "report per-output offsets instead of aligning");
        sub->add_flag("--no-sp-delay", no_sp_delay, "omit the #1 on SP assignments");
        sub->add_option("--path-limit", flags.path_limit, "path count above which the legality oracle is skipped");
        sub->add_option("--out", flags.out_dir, "output directory");
        sub->add_option("--sta", flags.sta, "back-annotated segment delays (JSON)");
    };

    auto* parse_cmd = app.add_subcommand("parse", "parse and check the subset");
    add_design_opts(parse_cmd);
    bool print_ast = false, print_pretty = false;
    parse_cmd->add_flag("--ast", print_ast, "print the AST dump");
    parse_cmd->add_flag("--pretty", print_pretty, "print the normalized source");

    auto* timing_cmd = app.add_subcommand("report-timing", "estimate logic depth before synthesis");
    add_design_opts(timing_cmd);
    std::string dump_graph;
    bool table_out = false;
    timing_cmd->add_option("--dump-graph", dump_graph, "write the graph JSON to this file");
    timing_cmd->add_flag("--table", table_out, "print a human-readable table instead of JSON");

    auto* csr_cmd = app.add_subcommand("csr", "insert SP registers and emit Verilog");
    add_csr_opts(csr_cmd);

    auto* check_cmd = app.add_subcommand("check", "run csr, then check C-thread equivalence by simulation");
    add_csr_opts(check_cmd);
    std::string inject;
    std::string dump_traces;
    check_cmd->add_option("--seed", seed_text, "stimulus seed (falls back to CSLOW_SEED)");
    check_cmd->add_option("--cycles", flags.cycles, "original cycles per thread");
    check_cmd->add_option("--inject-fault", inject, "turn this SP register into a wire ('first' picks one)");
    check_cmd->add_option("--dump-traces", dump_traces, "directory for JSON and VCD traces");

    auto* metrics_cmd = app.add_subcommand("metrics", "theoretical timing and derived implementation metrics");
    double t_orig = 0;
    std::string cmf_list = "2,3,4", achieved_list, slices_list, ff_list, lut_list;
    bool metrics_json = false;
    metrics_cmd->add_option("--t-orig", t_orig, "original clock period [ns]")->required();
    metrics_cmd->add_option("--cmf", cmf_list, "comma-separated cmf values");
    metrics_cmd->add_option("--t-achieved", achieved_list, "achieved period per cmf [ns]");
    metrics_cmd->add_option("--slices", slices_list, "occupied slices: original, then per cmf");
    metrics_cmd->add_option("--ff", ff_list, "flip-flop counts: original, then per cmf");
    metrics_cmd->add_option("--luts", lut_list, "LUT counts: original, then per cmf");
    metrics_cmd->add_option("--cost-table", flags.cost_table, "JSON cost-table overrides");
    metrics_cmd->add_flag("--json", metrics_json, "print JSON instead of a table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : UserError;
    }

    try {
        // config first, then explicit flags
        RunConfig c;
        if (!config_path.empty())
            load_config(config_path, c);
        auto* sub = app.get_subcommands().front();
        auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
        if (given("files"))
            c.files = flags.files;
        if (given("--top"))
            c.top = flags.top;
        if (given("--cost-table"))
            c.cost_table = flags.cost_table;
        if (given("--cmf"))
            c.cmf = flags.cmf;
        if (given("--tie-clocks"))
            c.tie_clocks = true;
        if (given("--no-align-outputs"))
            c.align_outputs = false;
        if (given("--no-sp-delay"))
            c.sp_delay = false;
        if (given("--path-limit"))
            c.path_limit = flags.path_limit;
        if (given("--out"))
            c.out_dir = flags.out_dir;
        if (given("--sta"))
            c.sta = flags.sta;
        if (given("--cycles"))
            c.cycles = flags.cycles;
        if (given("--seed")) {
            try {
                size_t pos = 0;
                c.seed = std::stoull(seed_text, &pos);
                if (pos != seed_text.size())
                    throw std::invalid_argument(seed_text);
            } catch (const std::exception&) {
                throw DesignError("--seed: '" + seed_text + "' is not an unsigned integer");
            }
        }

        if (sub == parse_cmd) {
            auto unit = parse_checked(c.files);
            if (print_ast)
                std::cout << dump_ast(unit);
            else if (print_pretty)
                std::cout << pretty_print(unit);
            else
                std::cout << "ok: " << unit.modules.size() << " module(s), subset check clean\n";
            return Ok;
        }

        if (sub == timing_cmd) {
            auto d = load_design(c);
            auto rep = longest_paths(d.graph);
            if (!dump_graph.empty())
                write_file(dump_graph, graph_to_json(d.graph));
            std::cout << (table_out ? depth_report_table(d.graph, rep, d.table)
                                    : depth_report_json(d.graph, rep, d.table) + "\n");
            return Ok;
        }

        if (sub == csr_cmd) {
            auto d = load_design(c);
            auto r = run_csr(d, c);
            const fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
            const std::string stem = d.graph.top + "_csr" + std::to_string(c.cmf);
            write_file(dir / (stem + ".v"), r.emitted.text);
            write_file(dir / (stem + ".schedule.json"), r.schedule);
            write_file(dir / (stem + ".cuts.json"), cut_report_json(d.graph, r.cuts));
            std::cout << cut_report_json(d.graph, r.cuts) << "\n";
            return Ok;
        }

        if (sub == check_cmd) {
            auto d = load_design(c);
            auto r = run_csr(d, c);
            std::string text = r.emitted.text;
            if (!inject.empty()) {
                std::string name = inject;
                if (name == "first") {
                    if (r.emitted.plan.chains.empty())
                        throw DesignError("--inject-fault: the design has no SP registers");
                    name = r.emitted.plan.chains.front().registers.front().name;
                }
                text = remove_sp_register(text, name);
            }
            if (!c.out_dir.empty()) {
                const std::string stem = d.graph.top + "_csr" + std::to_string(c.cmf);
                write_file(fs::path(c.out_dir) / (stem + ".v"), text);
                write_file(fs::path(c.out_dir) / (stem + ".schedule.json"), r.schedule);
            }
            const ModuleDecl original = flatten(d.unit, d.graph.top);
            const ModuleDecl cslow = parse_source(text, "<emitted>").modules.at(0);
            const size_t warmup = static_cast<size_t>(c.cmf);
            auto streams = random_streams(original, c.cmf, c.cycles, resolve_seed(c), warmup);
            auto v = check_equivalence(original, cslow, c.cmf, latencies(r.emitted.plan), streams, warmup);
            if (!dump_traces.empty()) {
                const fs::path dir(dump_traces);
                for (int k = 0; k < c.cmf; ++k) {
                    auto t = simulate(original, streams[k]);
                    write_file(dir / ("thread" + std::to_string(k) + ".json"), trace_json(t));
                    write_file(dir / ("thread" + std::to_string(k) + ".vcd"), trace_vcd(t, d.graph.top));
                }
                auto fast = simulate(cslow, interleave(streams));
                write_file(dir / "cslow.json", trace_json(fast));
                write_file(dir / "cslow.vcd", trace_vcd(fast, cslow.name));
            }
            std::cout << verdict_json(v) << "\n";
            return v.equivalent ? Ok : UserError;
        }

        if (sub == metrics_cmd) {
            CostTable table;
            if (!c.cost_table.empty())
                table.apply_json(read_text_file(c.cost_table));
            std::vector<int> cmfs;
            for (double x : parse_list(cmf_list, "cmf")) {
                if (x < 1 || x != static_cast<int>(x))
                    throw DesignError("--cmf values must be integers >= 1");
                cmfs.push_back(static_cast<int>(x));
            }
            auto achieved = achieved_list.empty() ? std::vector<double>{} : parse_list(achieved_list, "t-achieved");
            auto slices = slices_list.empty() ? std::vector<double>{} : parse_list(slices_list, "slices");
            auto ffs = ff_list.empty() ? std::vector<double>{} : parse_list(ff_list, "ff");
            auto luts = lut_list.empty() ? std::vector<double>{} : parse_list(lut_list, "luts");
            if (!achieved.empty() && achieved.size() != cmfs.size())
                throw DesignError("--t-achieved needs one value per cmf");
            for (const auto& [list, name] : {std::pair{&slices, "--slices"}, std::pair{&ffs, "--ff"}, std::pair{&luts, "--luts"}})
                if (!list->empty() && list->size() != cmfs.size() + 1)
                    throw DesignError(std::string(name) + " needs the original value followed by one per cmf");
            if (!slices.empty() && achieved.empty())
                throw DesignError("--slices needs --t-achieved");
            if (!luts.empty() && achieved.empty())
                throw DesignError("--luts needs --t-achieved");

            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            if (!slices.empty()) {
                nlohmann::ordered_json o;
                o["cmf"] = 1;
                o["theoretical_ns"] = t_orig;
                o["pps_khz"] = 1e6 / t_orig / slices[0];
                rows.push_back(o);
            }
            for (size_t i = 0; i < cmfs.size(); ++i) {
                auto th = theoretical_timing(t_orig, cmfs[i], table);
                nlohmann::ordered_json row;
                row["cmf"] = cmfs[i];
                row["theoretical_ns"] = th.ns;
                row["speedup_percent"] = th.speedup_percent;
                if (!achieved.empty()) {
                    auto m = derive_metrics(t_orig, th.ns, achieved[i],
                                            slices.empty() ? std::nullopt : std::optional<double>(slices[i + 1]),
                                            luts.empty() ? std::nullopt : std::optional<double>(luts[0]),
                                            luts.empty() ? std::nullopt : std::optional<double>(luts[i + 1]));
                    row["achieved_ns"] = achieved[i];
                    row["relative_performance"] = m.relative_performance;
                    row["timing_ratio"] = *m.timing_ratio;
                    if (m.pps_khz)
                        row["pps_khz"] = *m.pps_khz;
                    if (m.relative_luts)
                        row["relative_luts"] = *m.relative_luts;
                }
                if (!ffs.empty()) {
                    row["relative_ff"] = ffs[i + 1] / ffs[0];
                    row["relative_area_asic"] = relative_area_asic(ffs[i + 1], ffs[0]);
                }
                rows.push_back(row);
            }
            if (metrics_json) {
                nlohmann::ordered_json j;
                j["schema"] = "cslow.metrics/1";
                j["t_orig_ns"] = t_orig;
                j["reg_overhead_ns"] = table.reg_overhead_ns;
                j["rows"] = rows;
                std::cout << j.dump(2) << "\n";
                return Ok;
            }
            const char* cols[] = {"cmf", "theoretical_ns", "speedup_percent", "achieved_ns", "relative_performance",
                                  "timing_ratio", "pps_khz", "relative_luts", "relative_ff", "relative_area_asic"};
            std::vector<const char*> present;
            for (const char* col : cols)
                for (const auto& r : rows)
                    if (r.contains(col)) {
                        present.push_back(col);
                        break;
                    }
            for (const char* col : present)
                std::cout << std::setw(std::max<int>(10, static_cast<int>(std::strlen(col)) + 2)) << col;
            std::cout << '\n' << std::fixed;
            for (const auto& r : rows) {
                for (const char* col : present) {
                    const int w = std::max<int>(10, static_cast<int>(std::strlen(col)) + 2);
                    if (!r.contains(col))
                        std::cout << std::setw(w) << "-";
                    else if (std::string(col) == "cmf")
                        std::cout << std::setw(w) << r[col].get<int>();
                    else
                        std::cout << std::setw(w) << std::setprecision(3) << r[col].get<double>();
                }
                std::cout << '\n';
            }
            return Ok;
        }
    } catch (const ReportedError&) {
        return UserError;
    } catch (const SourceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return UserError;
    } catch (const DesignError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return UserError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return InternalError;
    }
    return InternalError;
}
