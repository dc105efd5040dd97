#pragma once

#include <string_view>

#include "feff/errors.hpp"
#include "feff/expr.hpp"

namespace feff::expr {

/// Parses the closed-form grammar
///
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := ("-")? power
///   power  := atom ("^" integer)?
///   atom   := number | ident | func "(" expr ")" | "(" expr ")"
///   number := decimal | integer ("/" integer)?
///
/// into `pool`. Every identifier must be one of the pool's coordinates.
/// Throws ParseError on any violation.
Expr parse(std::string_view source, Pool& pool);

}  // namespace feff::expr
