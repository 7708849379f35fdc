#include "cslow/diagnostics.hpp"

namespace cslow {

std::string format_diagnostic(const Diagnostic& diag, const std::string& file) {
    const char* sev = "error";
    if (diag.severity == Severity::Warning)
        sev = "warning";
    else if (diag.severity == Severity::Note)
        sev = "note";
    return file + ":" + std::to_string(diag.span.begin.line) + ":" +
           std::to_string(diag.span.begin.column) + ": " + sev + ": " + diag.message;
}

}  // namespace cslow
