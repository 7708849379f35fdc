#pragma once

#include "cslow/ast.hpp"

#include <string>

namespace cslow {

std::string print_expr(const Expr& e);
std::string print_module(const ModuleDecl& module);
std::string pretty_print(const SourceUnit& unit);

// Deterministic s-expression dump of the AST (spans excluded).
std::string dump_ast(const SourceUnit& unit);

}  // namespace cslow
