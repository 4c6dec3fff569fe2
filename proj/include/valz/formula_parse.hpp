#pragma once

#include <string>

#include "valz/formula_ast.hpp"

namespace valz {

/// Parses the concrete formula syntax:
///
///   term    := INT | IDENT | term "+" term | term "-" term | INT "*" term | "-" term
///   vterm   := IDENT | INT | "+inf" | "-inf" | "S(" vterm ")" | "v[" INT "](" term ")"
///   atom    := term "=" "0" | vterm CMP vterm
///            | "Div(" INT "," INT "," PRIMESET "," INT ";" vterm "," vterm ")"
///            | "Ind(" INT "," PRIMESET "," INT ";" vterm "," vterm ")"
///            | "Rel[" IDENT "](" vterm { "," vterm } ")"
///   CMP     := "=" | "<=" | ">=" | "<" | ">"
///   formula := atom | "~" formula | formula ("&"|"|"|"->") formula
///            | ("E"|"A") IDENT ":" ("G"|"I") "." formula | "(" formula ")"
///
/// "->" binds loosest (right-associative), then "|", then "&", then "~";
/// a quantifier body extends as far right as possible. The names E, A, S,
/// v, Div, Ind, Rel, G, I are reserved. Identifiers resolve to the sort of
/// their binder; free identifiers take the sort forced by their position,
/// and inconsistent use raises SortError.
FormulaPtr parse_formula(const std::string& text);

} // namespace valz
