#pragma once

#include "cslow/ast.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cslow {

// Sequential boundaries. Sources: PrimaryInput, RegisterBank (Q), MemoryReadPort
// (read data). Sinks: PrimaryOutput, RegisterBank (D), MemoryReadPort (address),
// MemoryWritePort (enable, address, data).
enum class SeqKind { PrimaryInput, PrimaryOutput, RegisterBank, MemoryReadPort, MemoryWritePort };

enum class Opcode {
    Mux2,  // c ? a : b, also if/else merges
    Case,
    Add, Sub, Mul, Neg,
    And, Or, Xor, Xnor, Not,
    LogicAnd, LogicOr, LogicNot,
    RedAnd, RedOr, RedXor, RedNand, RedNor, RedXnor,
    Eq, Ne, Lt, Le, Gt, Ge,
    Shl, Shr,
    BitSelect,   // a[i]
    PartSelect,  // a[m:l]
    Concat,
    Replicate,
    Demux,  // a with bit i replaced by v
    Resize  // zero-extension or truncation to the node width
};

// Cost-model class of a node (one per cost-table row; Wiring costs nothing).
enum class Rtlcs { If, Case, Math, Comb, Unary, Mux, Demux, ShiftVar, ShiftConst, Compare, Wiring };

struct NodeRef {
    bool seq = false;
    int id = -1;
    bool valid() const { return id >= 0; }
    friend bool operator==(const NodeRef&, const NodeRef&) = default;
    friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

// A node input: either an edge or a constant.
struct Operand {
    int edge = -1;
    uint64_t value = 0;
    uint32_t width = 0;
    bool is_const() const { return edge < 0; }
};

struct Edge {
    int id = -1;
    NodeRef tail;
    NodeRef head;
    int head_port = 0;
    // Net through which the consumer reads the value; empty for unnamed temporaries.
    std::string via_name;
    uint32_t width = 0;
};

struct SeqNode {
    int id = -1;
    SeqKind kind = SeqKind::PrimaryInput;
    std::string name;    // port, register, read-data register or memory name
    std::string memory;  // memory ports only
    uint32_t width = 0;
    std::optional<uint64_t> reset_value;
    std::vector<Operand> inputs;
    std::vector<int> out_edges;
    int owner_item = -1;
    Span span;

    bool is_source() const { return kind != SeqKind::PrimaryOutput && kind != SeqKind::MemoryWritePort; }
    bool is_sink() const { return kind != SeqKind::PrimaryInput; }
};

struct CombNode {
    int id = -1;
    Opcode op = Opcode::Add;
    std::vector<Operand> operands;
    uint32_t width = 0;
    uint32_t weight = 0;
    bool weighted = false;
    int owner_item = -1;
    std::string owner_target;  // target being computed when the node was created
    Span span;
    std::vector<int> out_edges;

    // Case: operands = [sel, v_1 .. v_k, v_default]; labels per non-default item.
    std::vector<std::vector<uint64_t>> case_labels;
    uint32_t case_alternatives = 0;  // number of case items including default
    uint32_t msb = 0, lsb = 0;       // PartSelect
    uint32_t repeat = 1;             // Replicate
};

// A value produced during elaboration: a constant or the output of a node.
struct Value {
    bool is_const = true;
    uint64_t value = 0;
    uint32_t width = 0;
    NodeRef src;
    std::string name;  // net name the value was read through, if any
    bool dead = false;  // producing node was pruned
};

enum class ItemKind { Decl, Assign, CombProcess, ClockedProcess };

struct TargetRecord {
    std::string name;
    Value value;       // comb targets: final value
    int seq_node = -1;  // clocked targets: register / memory port driven
};

struct ItemRecord {
    int item_index = -1;
    ItemKind kind = ItemKind::Decl;
    std::vector<TargetRecord> targets;
    bool has_memory = false;
};

struct DesignGraph {
    std::string top;
    std::string clock;
    std::optional<std::string> reset;  // synchronous reset input, when one is recognized
    ModuleDecl module;                 // flattened module the graph was built from
    std::vector<SeqNode> seq_nodes;
    std::vector<CombNode> comb_nodes;
    std::vector<Edge> edges;
    std::vector<ItemRecord> items;  // parallel to module.items

    uint32_t node_width(NodeRef n) const {
        return n.seq ? seq_nodes[n.id].width : comb_nodes[n.id].width;
    }
    const std::vector<int>& out_edges(NodeRef n) const {
        return n.seq ? seq_nodes[n.id].out_edges : comb_nodes[n.id].out_edges;
    }
    std::string node_label(NodeRef n) const;
};

const char* to_string(SeqKind k);
const char* to_string(Opcode op);
const char* to_string(Rtlcs k);
Rtlcs rtlcs_of(const CombNode& n);

// Flattens `top`, checks the subset and builds the graph. Throws DesignError.
DesignGraph elaborate(const SourceUnit& unit, const std::string& top);

// Deterministic topological order of comb node ids (ties: smallest id first).
// Throws DesignError naming the nodes of a cycle.
std::vector<int> topo_order(const DesignGraph& g);

struct GraphPath {
    std::vector<NodeRef> nodes;  // source seq node, comb nodes, sink seq node
    std::vector<int> edges;
};

// Number of source-to-sink edge paths, saturating at UINT64_MAX.
uint64_t count_paths(const DesignGraph& g);

// Every source-to-sink path, or nullopt when there are more than `limit`.
std::optional<std::vector<GraphPath>> enumerate_paths(const DesignGraph& g, uint64_t limit);

// Stable JSON document (schema "cslow.graph/1").
std::string graph_to_json(const DesignGraph& g);

}  // namespace cslow
