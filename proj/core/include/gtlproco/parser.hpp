#pragma once

#include "gtlproco/formula.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace gtlproco {

class syntax_error : public std::runtime_error {
public:
  syntax_error(const std::string &msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line(line), column(column) {}
  int line;
  int column;
};

/*
 * Grammar (whitespace between tokens is ignored):
 *   formula ::= conj ("|" conj)*
 *   conj    ::= until ("&" until)*
 *   until   ::= unary ("U" until)?
 *   unary   ::= "!" unary | "X" unary | "F" unary | "G" unary
 *             | "FG" unary | "GF" unary
 *             | "E^" INT "o"+ unary
 *             | "(" formula ")" | "true" | "false" | atom
 *   atom    ::= "y" cmp vector | vector "." "y" cmp NUMBER
 *   cmp     ::= "<=" | ">=" | "=" | "<" | ">"
 *   vector  ::= "[" NUMBER ("," NUMBER)* "]"
 *
 * If expected_dim >= 0 every atom must use that label dimension.
 */
std::unique_ptr<Formula> parse_formula(const std::string &text,
                                       int expected_dim = -1);

} // namespace gtlproco
