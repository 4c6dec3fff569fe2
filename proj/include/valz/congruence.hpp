#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "valz/chain.hpp"
#include "valz/congruence_types.hpp"

namespace valz {

/// Direct evaluation of one member at an integer (no solving).
bool member_satisfied(const Congruence& c, int64_t x, const ValuationChain& chain);

/// Single congruence n*x ≡ a (mod M) over the ambient A. d = gcd(n, M);
/// solvable iff a ∈ dA, with exactly prod_{p|d} p^{alpha_p d(p)} solutions
/// modulo M (= d over Z). The witness is a diagonal integer built from the
/// Bezout certificate and is re-verified before returning.
SolutionCount solve_single(int64_t n, int64_t a, int64_t M, const AmbientGroup& A);

/// Multiply-congruence step: (n, a, l, i) -> (t*n, t*a, t*l, i) for a
/// pi-number t. Solution sets are unchanged.
Congruence rescale(const Congruence& c, int64_t t, const std::set<int64_t>& pi);

/// Fixed-modulus reduction: Bezout-combines positive members sharing scale
/// and level into a single equivalent congruence. Solvability is decided via
/// the rescaled companion system (coefficients n_r / (n/d)) and its candidate
/// point a/d; when solvable the combined congruence has the same solution
/// set as the input system.
std::pair<Congruence, SolutionCount> reduce_fixed_modulus(const std::vector<Congruence>& system,
                                                          const ValuationChain& chain);

/// Collapse a positive congruence at finite level i to the coarser modulus
/// k*u*l*B_j (j < i). Requires the side conditions: with m = l*n_i and
/// target base u*l*n_j dividing m, every p | gcd(coeff, m) must satisfy
/// p^{d(p)} | m/(u*l*n_j) or not divide it at all; k is the product of
/// p^{d(p)} over the dividing primes. Counts are preserved and the solution
/// images modulo u*l*B_j agree with multiplicity k.
Congruence collapse(const Congruence& c, uint32_t target_level, int64_t u,
                    const ValuationChain& chain);

/// Exact solution count of a system modulo its boundary modulus. Positive
/// members are merged level by level through rescale / reduce_fixed_modulus /
/// collapse; negated members enter by inclusion-exclusion over subsets (at
/// most 16). Equation members are resolved into candidate points first.
/// Requires at least one positive member and ambient Z.
SolutionCount count_system(const CongruenceSystem& system, const ValuationChain& chain);

/// Smallest-absolute-value integer satisfying every member (positive
/// preferred on ties), or nullopt. Verified against each member on return.
std::optional<int64_t> witness(const CongruenceSystem& system, const ValuationChain& chain);

} // namespace valz
