#include "cslow/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace cslow {

namespace {

enum class TokKind { Identifier, Number, Symbol, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    Span span;
    // numbers
    uint64_t value = 0;
    uint32_t size = 0;  // 0 = unsized
    char base = 'd';
};

const std::set<std::string>& unsupported_keywords() {
    static const std::set<std::string> kw = {
        "initial", "generate", "endgenerate", "genvar", "for", "while", "repeat", "forever",
        "function", "endfunction", "task", "endtask", "integer", "real", "time", "parameter",
        "defparam", "specify", "endspecify", "inout", "tri", "supply0", "supply1", "wand", "wor",
        "and", "or", "nand", "nor", "xor", "xnor", "not", "buf", "bufif0", "bufif1", "notif0",
        "notif1", "casez", "casex", "fork", "join", "wait", "disable", "assign_deassign", "force",
        "release", "signed", "logic", "always_ff", "always_comb", "always_latch", "primitive"};
    return kw;
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.span.begin = loc();
            if (pos_ >= text_.size()) {
                t.kind = TokKind::End;
                t.span.end = loc();
                out.push_back(t);
                return out;
            }
            char c = text_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = TokKind::Identifier;
                while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                               text_[pos_] == '_' || text_[pos_] == '$'))
                    t.text.push_back(advance());
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
                lex_number(t);
            } else if (c == '`') {
                throw SourceError({t.span.begin, t.span.begin}, "unsupported construct: compiler directive");
            } else if (c == '$') {
                throw SourceError({t.span.begin, t.span.begin}, "unsupported construct: system task");
            } else if (c == '"') {
                throw SourceError({t.span.begin, t.span.begin}, "unsupported construct: string literal");
            } else if (c == '\\') {
                throw SourceError({t.span.begin, t.span.begin}, "unsupported construct: escaped identifier");
            } else {
                t.kind = TokKind::Symbol;
                static const char* multi[] = {"===", "!==", "<<<", ">>>", "<=", ">=", "==", "!=", "&&",
                                              "||",  "<<",  ">>",  "~&",  "~|", "~^", "^~", "+:", "-:"};
                bool matched = false;
                for (const char* m : multi) {
                    std::string_view mv(m);
                    if (text_.substr(pos_, mv.size()) == mv) {
                        for (size_t i = 0; i < mv.size(); ++i)
                            t.text.push_back(advance());
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    static const std::string singles = "()[]{};,.:?=+-*/%&|^~!<>@#";
                    if (singles.find(c) == std::string::npos)
                        throw SourceError({t.span.begin, t.span.begin},
                                          std::string("unexpected character '") + c + "'");
                    t.text.push_back(advance());
                }
                if (t.text == "^~")
                    t.text = "~^";
            }
            t.span.end = loc();
            out.push_back(std::move(t));
        }
    }

private:
    SourceLocation loc() const { return {line_, col_, static_cast<uint32_t>(pos_)}; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
                auto start = loc();
                advance();
                advance();
                while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= text_.size())
                    throw SourceError({start, loc()}, "unterminated block comment");
                advance();
                advance();
            } else {
                break;
            }
        }
    }

    void lex_number(Token& t) {
        t.kind = TokKind::Number;
        std::string digits;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            char c = advance();
            t.text.push_back(c);
            if (c != '_')
                digits.push_back(c);
        }
        if (pos_ < text_.size() && text_[pos_] == '\'') {
            t.text.push_back(advance());
            if (!digits.empty()) {
                unsigned long long sz = std::stoull(digits);
                if (sz == 0 || sz > 64)
                    throw SourceError({t.span.begin, loc()}, "literal size must be in 1..64");
                t.size = static_cast<uint32_t>(sz);
            }
            if (pos_ < text_.size() && (text_[pos_] == 's' || text_[pos_] == 'S'))
                throw SourceError({t.span.begin, loc()}, "unsupported construct: signed literal");
            if (pos_ >= text_.size())
                throw SourceError({t.span.begin, loc()}, "malformed literal");
            char b = static_cast<char>(std::tolower(static_cast<unsigned char>(advance())));
            t.text.push_back(b);
            if (b != 'b' && b != 'o' && b != 'd' && b != 'h')
                throw SourceError({t.span.begin, loc()}, "malformed literal base");
            t.base = b;
            unsigned radix = b == 'b' ? 2 : b == 'o' ? 8 : b == 'd' ? 10 : 16;
            std::string body;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                char c = advance();
                t.text.push_back(c);
                if (c != '_')
                    body.push_back(c);
            }
            if (body.empty())
                throw SourceError({t.span.begin, loc()}, "malformed literal");
            uint64_t v = 0;
            for (char c : body) {
                char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                if (lc == 'x' || lc == 'z' || lc == '?')
                    throw SourceError({t.span.begin, loc()}, "unsupported construct: x/z literal");
                unsigned d;
                if (std::isdigit(static_cast<unsigned char>(lc)))
                    d = static_cast<unsigned>(lc - '0');
                else if (lc >= 'a' && lc <= 'f')
                    d = static_cast<unsigned>(lc - 'a' + 10);
                else
                    throw SourceError({t.span.begin, loc()}, "malformed literal digit");
                if (d >= radix)
                    throw SourceError({t.span.begin, loc()}, "literal digit out of range for base");
                uint64_t nv = v * radix + d;
                if (radix != 0 && (nv - d) / radix != v)
                    throw SourceError({t.span.begin, loc()}, "literal exceeds 64 bits");
                v = nv;
            }
            t.value = t.size ? (v & width_mask(t.size)) : v;
        } else {
            if (digits.empty())
                throw SourceError({t.span.begin, loc()}, "malformed literal");
            if (digits.size() > 19)
                throw SourceError({t.span.begin, loc()}, "literal exceeds 64 bits");
            t.value = std::stoull(digits);
            t.base = 'd';
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    std::vector<ModuleDecl> parse_all() {
        std::vector<ModuleDecl> mods;
        while (!at_end()) {
            if (is_ident("module"))
                mods.push_back(parse_module());
            else
                error_unsupported_or("expected 'module'");
        }
        return mods;
    }

private:
    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == TokKind::End; }
    bool is_sym(const char* s, size_t k = 0) const { return peek(k).kind == TokKind::Symbol && peek(k).text == s; }
    bool is_ident(const char* s, size_t k = 0) const {
        return peek(k).kind == TokKind::Identifier && peek(k).text == s;
    }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size())
            ++pos_;
        last_end_ = t.span.end;
        return t;
    }

    [[noreturn]] void error(const std::string& msg) const {
        throw SourceError(peek().span, msg + (at_end() ? " at end of input" : " near '" + peek().text + "'"));
    }

    [[noreturn]] void error_unsupported_or(const std::string& msg) const {
        if (peek().kind == TokKind::Identifier && unsupported_keywords().count(peek().text))
            throw SourceError(peek().span, "unsupported construct: " + peek().text);
        error(msg);
    }

    void expect_sym(const char* s) {
        if (!is_sym(s))
            error(std::string("expected '") + s + "'");
        next();
    }

    void expect_ident(const char* s) {
        if (!is_ident(s))
            error_unsupported_or(std::string("expected '") + s + "'");
        next();
    }

    std::string expect_name() {
        if (peek().kind != TokKind::Identifier)
            error("expected identifier");
        if (is_reserved(peek().text))
            error_unsupported_or("unexpected keyword");
        return next().text;
    }

    static bool is_reserved(const std::string& s) {
        static const std::set<std::string> kw = {
            "module", "endmodule", "input", "output", "wire", "reg", "assign", "always", "posedge",
            "negedge", "begin", "end", "if", "else", "case", "endcase", "default", "localparam"};
        return kw.count(s) || unsupported_keywords().count(s);
    }

    uint32_t parse_const_uint() {
        if (peek().kind != TokKind::Number)
            error("expected constant number");
        return static_cast<uint32_t>(next().value);
    }

    // [msb:lsb] with lsb == 0
    uint32_t parse_range_width() {
        auto begin = peek().span.begin;
        expect_sym("[");
        uint32_t msb = parse_const_uint();
        expect_sym(":");
        uint32_t lsb = parse_const_uint();
        expect_sym("]");
        if (lsb != 0)
            throw SourceError({begin, last_end_}, "unsupported construct: range with non-zero lsb");
        return msb + 1;
    }

    // -- module ---------------------------------------------------------------

    ModuleDecl parse_module() {
        ModuleDecl m;
        auto begin = peek().span.begin;
        expect_ident("module");
        m.name = expect_name();
        if (is_sym("#"))
            throw SourceError(peek().span, "unsupported construct: module parameters");
        if (is_sym("(")) {
            next();
            if (!is_sym(")")) {
                PortDirection dir = PortDirection::Input;
                bool have_dir = false;
                bool is_reg = false;
                uint32_t width = 1;
                for (;;) {
                    auto pbegin = peek().span.begin;
                    if (is_ident("input") || is_ident("output")) {
                        dir = next().text == "input" ? PortDirection::Input : PortDirection::Output;
                        have_dir = true;
                        is_reg = false;
                        width = 1;
                        if (is_ident("wire")) {
                            next();
                        } else if (is_ident("reg")) {
                            next();
                            is_reg = true;
                        }
                        if (is_sym("["))
                            width = parse_range_width();
                    } else if (!have_dir) {
                        error_unsupported_or("unsupported construct: non-ANSI port list");
                    }
                    Port p;
                    p.name = expect_name();
                    p.direction = dir;
                    p.is_reg = is_reg;
                    p.width = width;
                    p.span = {pbegin, last_end_};
                    if (is_reg && dir == PortDirection::Input)
                        throw SourceError(p.span, "input port cannot be declared reg");
                    m.ports.push_back(p);
                    if (is_sym(",")) {
                        next();
                        continue;
                    }
                    break;
                }
            }
            expect_sym(")");
        }
        expect_sym(";");
        while (!is_ident("endmodule")) {
            if (at_end())
                error("missing 'endmodule'");
            parse_item(m);
        }
        next();
        m.span = {begin, last_end_};
        return m;
    }

    void parse_item(ModuleDecl& m) {
        auto begin = peek().span.begin;
        if (is_ident("wire") || is_ident("reg")) {
            bool is_reg = next().text == "reg";
            uint32_t width = 1;
            if (is_sym("["))
                width = parse_range_width();
            for (;;) {
                auto nbegin = peek().span.begin;
                NetDecl d;
                d.name = expect_name();
                d.kind = is_reg ? NetKind::Reg : NetKind::Wire;
                d.width = width;
                if (is_sym("[")) {
                    if (!is_reg)
                        throw SourceError(peek().span, "unsupported construct: wire array");
                    next();
                    uint32_t a = parse_const_uint();
                    expect_sym(":");
                    uint32_t b = parse_const_uint();
                    expect_sym("]");
                    d.kind = NetKind::Memory;
                    d.depth = (a > b ? a - b : b - a) + 1;
                    if (std::min(a, b) != 0)
                        throw SourceError({nbegin, last_end_}, "unsupported construct: memory range not starting at 0");
                }
                d.span = {nbegin, last_end_};
                ExprPtr init;
                if (is_sym("=")) {
                    if (is_reg)
                        throw SourceError(peek().span, "unsupported construct: reg initializer");
                    next();
                    init = parse_expr();
                }
                m.items.emplace_back(d);
                if (init) {
                    ContinuousAssign a;
                    a.target = d.name;
                    a.rhs = init;
                    a.span = {nbegin, last_end_};
                    m.items.emplace_back(std::move(a));
                }
                if (is_sym(",")) {
                    next();
                    continue;
                }
                break;
            }
            expect_sym(";");
        } else if (is_ident("localparam")) {
            next();
            uint32_t range_width = 0;
            if (is_sym("["))
                range_width = parse_range_width();
            for (;;) {
                auto nbegin = peek().span.begin;
                LocalParam lp;
                lp.name = expect_name();
                expect_sym("=");
                lp.value = parse_expr();
                if (lp.value->kind != ExprKind::Literal)
                    throw SourceError(lp.value->span, "unsupported construct: localparam value must be a literal");
                if (range_width) {
                    lp.value->literal_width = range_width;
                    lp.value->value &= width_mask(range_width);
                }
                lp.span = {nbegin, last_end_};
                m.items.emplace_back(std::move(lp));
                if (is_sym(",")) {
                    next();
                    continue;
                }
                break;
            }
            expect_sym(";");
        } else if (is_ident("assign")) {
            next();
            if (is_sym("#"))
                throw SourceError(peek().span, "unsupported construct: delay on continuous assignment");
            for (;;) {
                auto abegin = peek().span.begin;
                ContinuousAssign a;
                a.target = expect_name();
                if (is_sym("["))
                    throw SourceError(peek().span, "unsupported construct: partial continuous assignment");
                expect_sym("=");
                a.rhs = parse_expr();
                a.span = {abegin, last_end_};
                m.items.emplace_back(std::move(a));
                if (is_sym(",")) {
                    next();
                    continue;
                }
                break;
            }
            expect_sym(";");
        } else if (is_ident("always")) {
            next();
            ProcessBlock p;
            p.sensitivity = parse_sensitivity();
            p.body = parse_stmt();
            p.span = {begin, last_end_};
            m.items.emplace_back(std::move(p));
        } else if (is_ident("input") || is_ident("output")) {
            throw SourceError(peek().span, "unsupported construct: non-ANSI port declaration");
        } else if (peek().kind == TokKind::Identifier && !is_reserved(peek().text) &&
                   peek(1).kind == TokKind::Identifier) {
            m.items.emplace_back(parse_instance());
        } else {
            error_unsupported_or("expected module item");
        }
    }

    Sensitivity parse_sensitivity() {
        Sensitivity s;
        expect_sym("@");
        if (is_sym("*")) {
            next();
            return s;
        }
        expect_sym("(");
        if (is_sym("*")) {
            next();
            expect_sym(")");
            return s;
        }
        if (is_ident("negedge"))
            throw SourceError(peek().span, "unsupported construct: negedge clock");
        if (!is_ident("posedge"))
            throw SourceError(peek().span, "unsupported construct: explicit combinational sensitivity list (use @*)");
        next();
        s.clocked = true;
        s.clock = expect_name();
        if (is_ident("or") || is_sym(",")) {
            next();
            bool high;
            if (is_ident("posedge"))
                high = true;
            else if (is_ident("negedge"))
                high = false;
            else
                error("expected posedge/negedge");
            next();
            s.async_reset = expect_name();
            s.async_reset_active_high = high;
        }
        if (!is_sym(")"))
            throw SourceError(peek().span, "unsupported construct: more than one asynchronous control");
        next();
        return s;
    }

    Instance parse_instance() {
        Instance inst;
        auto begin = peek().span.begin;
        inst.module_name = next().text;
        if (is_sym("#"))
            throw SourceError(peek().span, "unsupported construct: parameter override");
        inst.instance_name = expect_name();
        expect_sym("(");
        if (!is_sym(")")) {
            for (;;) {
                if (!is_sym("."))
                    throw SourceError(peek().span, "unsupported construct: positional port connection");
                next();
                Connection c;
                c.port = expect_name();
                expect_sym("(");
                if (!is_sym(")"))
                    c.expr = parse_expr();
                expect_sym(")");
                inst.connections.push_back(std::move(c));
                if (is_sym(",")) {
                    next();
                    continue;
                }
                break;
            }
        }
        expect_sym(")");
        expect_sym(";");
        inst.span = {begin, last_end_};
        return inst;
    }

    // -- statements -----------------------------------------------------------

    StmtPtr parse_stmt() {
        auto begin = peek().span.begin;
        StmtPtr s;
        if (is_ident("begin")) {
            next();
            if (is_sym(":"))
                throw SourceError(peek().span, "unsupported construct: named block");
            std::vector<StmtPtr> body;
            while (!is_ident("end")) {
                if (at_end())
                    error("missing 'end'");
                body.push_back(parse_stmt());
            }
            next();
            if (body.size() == 1)
                return body.front();
            s = make_block(std::move(body));
        } else if (is_ident("if")) {
            next();
            expect_sym("(");
            auto cond = parse_expr();
            expect_sym(")");
            auto then_stmt = parse_stmt();
            StmtPtr else_stmt;
            if (is_ident("else")) {
                next();
                else_stmt = parse_stmt();
            }
            s = make_if(cond, then_stmt, else_stmt);
        } else if (is_ident("case")) {
            next();
            s = std::make_shared<Stmt>();
            s->kind = StmtKind::Case;
            expect_sym("(");
            s->selector = parse_expr();
            expect_sym(")");
            bool seen_default = false;
            while (!is_ident("endcase")) {
                if (at_end())
                    error("missing 'endcase'");
                CaseItem item;
                if (is_ident("default")) {
                    auto dspan = peek().span;
                    next();
                    if (is_sym(":"))
                        next();
                    if (seen_default)
                        throw SourceError(dspan, "duplicate default case item");
                    seen_default = true;
                } else {
                    for (;;) {
                        item.labels.push_back(parse_expr());
                        if (is_sym(",")) {
                            next();
                            continue;
                        }
                        break;
                    }
                    expect_sym(":");
                }
                item.body = parse_stmt();
                s->items.push_back(std::move(item));
            }
            next();
        } else if (is_sym(";")) {
            next();
            s = make_block({});
        } else if (is_sym("#")) {
            throw SourceError(peek().span, "unsupported construct: statement delay");
        } else if (peek().kind == TokKind::Identifier && !is_reserved(peek().text)) {
            LValue lv;
            auto lbegin = peek().span.begin;
            lv.name = next().text;
            if (is_sym("[")) {
                next();
                auto idx = parse_expr();
                if (is_sym(":")) {
                    next();
                    if (idx->kind != ExprKind::Literal)
                        throw SourceError(idx->span, "part-select bounds must be constant");
                    uint32_t lsb = parse_const_uint();
                    lv.part = {static_cast<uint32_t>(idx->value), lsb};
                } else if (is_sym("+:") || is_sym("-:")) {
                    throw SourceError(peek().span, "unsupported construct: indexed part-select");
                } else {
                    lv.index = idx;
                }
                expect_sym("]");
            }
            lv.span = {lbegin, last_end_};
            bool nonblocking;
            if (is_sym("<="))
                nonblocking = true;
            else if (is_sym("="))
                nonblocking = false;
            else
                error("expected '=' or '<='");
            next();
            bool delay = false;
            if (is_sym("#")) {
                auto dspan = peek().span;
                next();
                if (!nonblocking || peek().kind != TokKind::Number || peek().value != 1 || peek().size != 0)
                    throw SourceError(dspan, "unsupported construct: delay other than '#1' on a non-blocking assignment");
                next();
                delay = true;
            }
            auto rhs = parse_expr();
            expect_sym(";");
            s = make_assign(std::move(lv), rhs, nonblocking, delay);
        } else {
            error_unsupported_or("expected statement");
        }
        s->span = {begin, last_end_};
        return s;
    }

    // -- expressions ----------------------------------------------------------

    static int precedence(const std::string& op) {
        if (op == "||") return 1;
        if (op == "&&") return 2;
        if (op == "|") return 3;
        if (op == "^" || op == "~^") return 4;
        if (op == "&") return 5;
        if (op == "==" || op == "!=") return 6;
        if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
        if (op == "<<" || op == ">>") return 8;
        if (op == "+" || op == "-") return 9;
        if (op == "*") return 10;
        return 0;
    }

    static BinaryOp binary_from(const std::string& op) {
        static const std::pair<const char*, BinaryOp> table[] = {
            {"+", BinaryOp::Add},  {"-", BinaryOp::Sub},       {"*", BinaryOp::Mul},
            {"&", BinaryOp::And},  {"|", BinaryOp::Or},        {"^", BinaryOp::Xor},
            {"~^", BinaryOp::Xnor}, {"&&", BinaryOp::LogicAnd}, {"||", BinaryOp::LogicOr},
            {"==", BinaryOp::Eq},  {"!=", BinaryOp::Ne},       {"<", BinaryOp::Lt},
            {"<=", BinaryOp::Le},  {">", BinaryOp::Gt},        {">=", BinaryOp::Ge},
            {"<<", BinaryOp::Shl}, {">>", BinaryOp::Shr}};
        for (const auto& [s, b] : table)
            if (op == s)
                return b;
        return BinaryOp::Add;
    }

    ExprPtr parse_expr() {
        auto begin = peek().span.begin;
        auto cond = parse_binary(1);
        if (is_sym("?")) {
            next();
            auto t = parse_expr();
            expect_sym(":");
            auto f = parse_expr();
            auto e = make_ternary(cond, t, f);
            e->span = {begin, last_end_};
            return e;
        }
        return cond;
    }

    ExprPtr parse_binary(int min_prec) {
        auto begin = peek().span.begin;
        auto lhs = parse_unary();
        for (;;) {
            if (peek().kind != TokKind::Symbol)
                return lhs;
            const std::string op = peek().text;
            if (op == "/" || op == "%" || op == "===" || op == "!==" || op == "<<<" || op == ">>>")
                throw SourceError(peek().span, "unsupported construct: operator '" + op + "'");
            int prec = precedence(op);
            if (prec == 0 || prec < min_prec)
                return lhs;
            next();
            auto rhs = parse_binary(prec + 1);
            lhs = make_binary(binary_from(op), lhs, rhs);
            lhs->span = {begin, last_end_};
        }
    }

    ExprPtr parse_unary() {
        auto begin = peek().span.begin;
        if (peek().kind == TokKind::Symbol) {
            static const std::pair<const char*, UnaryOp> table[] = {
                {"~", UnaryOp::BitNot},  {"!", UnaryOp::LogicNot}, {"-", UnaryOp::Negate},
                {"&", UnaryOp::RedAnd},  {"|", UnaryOp::RedOr},    {"^", UnaryOp::RedXor},
                {"~&", UnaryOp::RedNand}, {"~|", UnaryOp::RedNor}, {"~^", UnaryOp::RedXnor}};
            if (is_sym("+")) {
                next();
                return parse_unary();
            }
            for (const auto& [s, op] : table) {
                if (is_sym(s)) {
                    next();
                    auto a = parse_unary();
                    auto e = make_unary(op, a);
                    e->span = {begin, last_end_};
                    return e;
                }
            }
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        auto begin = peek().span.begin;
        ExprPtr e;
        if (peek().kind == TokKind::Number) {
            const Token& t = next();
            e = std::make_shared<Expr>();
            e->kind = ExprKind::Literal;
            e->value = t.value;
            e->literal_width = t.size;
            e->literal_base = t.base;
        } else if (is_sym("(")) {
            next();
            e = parse_expr();
            expect_sym(")");
            return e;
        } else if (is_sym("{")) {
            next();
            auto first = parse_expr();
            if (is_sym("{")) {
                if (first->kind != ExprKind::Literal || first->value == 0)
                    throw SourceError(first->span, "replication count must be a positive constant");
                next();
                auto inner = parse_expr();
                if (is_sym(","))
                    throw SourceError(peek().span, "unsupported construct: multi-element replication");
                expect_sym("}");
                expect_sym("}");
                e = std::make_shared<Expr>();
                e->kind = ExprKind::Replicate;
                e->repeat = static_cast<uint32_t>(first->value);
                e->operands = {inner};
            } else {
                std::vector<ExprPtr> parts{first};
                while (is_sym(",")) {
                    next();
                    parts.push_back(parse_expr());
                }
                expect_sym("}");
                e = make_concat(std::move(parts));
            }
        } else if (peek().kind == TokKind::Identifier && !is_reserved(peek().text)) {
            std::string name = next().text;
            if (is_sym("("))
                throw SourceError({begin, peek().span.end}, "unsupported construct: function call");
            if (is_sym("[")) {
                next();
                auto idx = parse_expr();
                if (is_sym(":")) {
                    next();
                    if (idx->kind != ExprKind::Literal)
                        throw SourceError(idx->span, "part-select bounds must be constant");
                    uint32_t lsb = parse_const_uint();
                    expect_sym("]");
                    e = make_part_select(name, static_cast<uint32_t>(idx->value), lsb);
                } else if (is_sym("+:") || is_sym("-:")) {
                    throw SourceError(peek().span, "unsupported construct: indexed part-select");
                } else {
                    expect_sym("]");
                    e = make_bit_select(name, idx);
                }
                if (is_sym("["))
                    throw SourceError(peek().span, "unsupported construct: multi-dimensional select");
            } else {
                e = make_identifier(name);
            }
        } else {
            error_unsupported_or("expected expression");
        }
        e->span = {begin, last_end_};
        return e;
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    SourceLocation last_end_;
};

}  // namespace

SourceUnit parse_source(std::string_view text, std::string file_name) {
    SourceUnit unit;
    unit.source_text = std::string(text);
    unit.file_name = std::move(file_name);
    Lexer lexer(text);
    Parser parser(lexer.run());
    unit.modules = parser.parse_all();
    for (auto& m : unit.modules)
        annotate_widths(m);
    return unit;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SourceUnit parse_files(const std::vector<std::string>& paths) {
    SourceUnit unit;
    for (const auto& p : paths) {
        auto part = parse_source(read_text_file(p), p);
        if (unit.file_name.empty())
            unit.file_name = p;
        unit.source_text += part.source_text;
        for (auto& m : part.modules)
            unit.modules.push_back(std::move(m));
    }
    return unit;
}

}  // namespace cslow
