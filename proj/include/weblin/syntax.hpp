#pragma once

// Text <-> Expr.
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?
//   atom  := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//
// NUMBER is an integer or a decimal ("0.25"); "p/q" is an ordinary quotient.
// IDENT is x, y, sqrt, exp, log or a parameter name [a-z][a-z0-9_]*.

#include "weblin/expr.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace weblin {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& message);
    std::size_t offset() const { return offset_; }
    const std::string& detail() const { return detail_; }

private:
    std::size_t offset_;
    std::string detail_;
};

/// Builds raw nodes mirroring the input; call simplify() for the canonical form.
Expr parse(std::string_view text);

/// Deterministic, re-parseable rendering. Function nodes print as f, f_x,
/// f_xxy, ...; those names re-parse as plain parameters.
std::string format(Expr e);

} // namespace weblin
