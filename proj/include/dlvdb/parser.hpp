#pragma once

#include <string>
#include <string_view>

#include "dlvdb/ast.hpp"
#include "dlvdb/directives.hpp"

namespace dlvdb {

/// Parses a program and runs the arity and safety checks.
/// Throws DiagnosticError carrying every diagnostic found.
Program parse_program(std::string_view text, const std::string& file = {});

/// Parses an auxiliary-directive file. Throws DiagnosticError.
DirectiveSet parse_directives(std::string_view text, const std::string& file = {});

}  // namespace dlvdb
