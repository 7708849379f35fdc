#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cslow {

struct SourceLocation {
    uint32_t line = 0;
    uint32_t column = 0;
    uint32_t offset = 0;
};

struct Span {
    SourceLocation begin;
    SourceLocation end;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
    Severity severity = Severity::Error;
    Span span;
    std::string message;
};

// Renders `file:line:col: severity: message`.
std::string format_diagnostic(const Diagnostic& diag, const std::string& file);

// Thrown for parse errors and unsupported constructs; carries the offending span.
class SourceError : public std::runtime_error {
public:
    SourceError(Span span, std::string message)
        : std::runtime_error(message), span_(span) {}

    const Span& span() const { return span_; }
    Diagnostic diagnostic() const { return {Severity::Error, span_, what()}; }

private:
    Span span_;
};

// Design-level failure (combinational loop, unknown module, bad plan, ...).
class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cslow
