#pragma once

#include <cstdint>
#include <vector>

#include "valz/chain.hpp"
#include "valz/congruence_types.hpp"
#include "valz/formula_ast.hpp"

// Brute-force reference implementations used by the acceptance tests.
// Deliberately simple: memberships are evaluated through valuate() and
// quantifiers are expanded by enumeration. This header must not pull in the
// congruence or formula engines (enforced by a build check); it shares only
// the data types.

namespace valz {

/// Exhaustive solution count of a system modulo its boundary modulus
/// M = lcm(scale) * n_{max level}: every x in [0, M) is tested against
/// every member by direct evaluation.
uint64_t brute_count(const CongruenceSystem& system, const ValuationChain& chain);

/// Truth of a sentence by quantifier expansion. Group variables range over
/// the residues modulo the sentence's global modulus, shifted copies (one
/// per equation-like atom) and the candidate points forced by equations;
/// value variables range over {-inf, 0..valueBound, +inf}, plus the
/// interval [-groupBound, groupBound] for group variables. Sound for the
/// fragment where atoms other than equations are residue-determined.
bool brute_decide(const FormulaPtr& sentence, const ValuationChain& chain, int64_t group_bound,
                  uint32_t value_bound);

/// Exhaustive count of x in Q with n*x - a in mprime*Q; a is a coordinate
/// tuple (one entry per slot of Q).
uint64_t brute_count_quotient(int64_t n, const std::vector<int64_t>& a, const FiniteQuotient& Q,
                              int64_t mprime);

/// Diagonal convenience overload.
uint64_t brute_count_quotient(int64_t n, int64_t a, const FiniteQuotient& Q, int64_t mprime);

} // namespace valz
