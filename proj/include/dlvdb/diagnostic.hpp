#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlvdb {

/// Position of a construct in its source file. Lines and columns start at 1.
struct SourceSpan {
    std::string file;
    int line = 1;
    int column = 1;
};

std::string to_string(const SourceSpan& span);

struct Diagnostic {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    SourceSpan span;
    std::string message;
};

std::string to_string(const Diagnostic& diag);
std::ostream& operator<<(std::ostream& os, const Diagnostic& diag);

/// Thrown by parsing and analysis passes; carries every diagnostic collected.
class DiagnosticError : public std::runtime_error {
public:
    explicit DiagnosticError(std::vector<Diagnostic> diags);
    explicit DiagnosticError(Diagnostic diag);

    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

}  // namespace dlvdb
