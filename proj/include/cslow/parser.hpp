#pragma once

#include "cslow/ast.hpp"

#include <string>
#include <string_view>

namespace cslow {

// Parses the supported synthesizable Verilog subset. Throws SourceError on syntax
// errors and on constructs outside the subset (initial, generate, gates, delays
// other than `#1` on non-blocking assignments, ...). Widths are annotated.
SourceUnit parse_source(std::string_view text, std::string file_name = "<input>");

// Concatenates several files into one unit (modules in file order).
SourceUnit parse_files(const std::vector<std::string>& paths);

std::string read_text_file(const std::string& path);

}  // namespace cslow
