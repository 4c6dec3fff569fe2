#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "valz/chain.hpp"

namespace valz {

/// One linear congruence n*x ≡ a (mod l*B_i): semantically
/// v^l(n*x - a) >= i. Level +inf denotes the equation n*x = a; negated
/// flips membership.
struct Congruence {
    int64_t coeff;   // n, nonzero
    int64_t rhs;     // a
    int64_t scale;   // l >= 1
    ValueElement level;
    bool negated = false;

    bool is_equation() const { return level.is_pos_inf(); }
    bool operator==(const Congruence&) const = default;
};

/// A conjunction of congruences over one chain. The boundary is the maximal
/// finite level appearing among the members (positive or negated): counting
/// happens modulo l*B_boundary at the unified scale l.
struct CongruenceSystem {
    std::vector<Congruence> members;
};

/// Result of a counting query. For coset-structured systems the count is the
/// number of residues modulo the boundary modulus; a system pinned by an
/// equation counts its isolated point instead.
struct SolutionCount {
    bool solvable = false;
    uint64_t count = 0;
    std::optional<int64_t> witness;
    FactoredInt boundary_modulus;
};

} // namespace valz
