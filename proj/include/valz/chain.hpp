#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "valz/ambient.hpp"
#include "valz/arith.hpp"

namespace valz {

/// Element of the value sort I = omega ∪ {+inf, -inf} with the total order
/// -inf < fin(0) < fin(1) < ... < +inf.
struct ValueElement {
    enum class Tag { NegInf, Fin, PosInf };
    Tag tag = Tag::Fin;
    uint32_t n = 0;

    static ValueElement neg_inf() { return {Tag::NegInf, 0}; }
    static ValueElement pos_inf() { return {Tag::PosInf, 0}; }
    static ValueElement fin(uint32_t n) { return {Tag::Fin, n}; }

    bool is_fin() const { return tag == Tag::Fin; }
    bool is_neg_inf() const { return tag == Tag::NegInf; }
    bool is_pos_inf() const { return tag == Tag::PosInf; }

    // Successor with idempotent endpoints: S(fin n) = fin(n+1),
    // S(-inf) = -inf, S(+inf) = +inf. The endpoint behavior is a fixed
    // convention; order-based conversions elsewhere do not use it.
    ValueElement successor() const {
        if (tag == Tag::Fin) return fin(n + 1);
        return *this;
    }

    friend bool operator==(const ValueElement& a, const ValueElement& b) {
        return a.tag == b.tag && (a.tag != Tag::Fin || a.n == b.n);
    }
    friend bool operator<(const ValueElement& a, const ValueElement& b) {
        if (a.tag != b.tag) return static_cast<int>(a.tag) < static_cast<int>(b.tag);
        return a.tag == Tag::Fin && a.n < b.n;
    }
    friend bool operator<=(const ValueElement& a, const ValueElement& b) { return a < b || a == b; }
    friend bool operator>(const ValueElement& a, const ValueElement& b) { return b < a; }
    friend bool operator>=(const ValueElement& a, const ValueElement& b) { return b <= a; }

    std::string str() const;
};

/// A strictly descending chain B_i = n_i * A described by prefix multipliers
/// plus an optional repeating cycle: n_0 = 1, n_i = m_1 * ... * m_i where the
/// m_j walk the prefix and then the cycle. Every multiplier is >= 2, so the
/// chain is strictly descending and good by construction.
class ValuationChain {
public:
    ValuationChain(AmbientGroup ambient, std::vector<int64_t> prefix,
                   std::optional<std::vector<int64_t>> cycle);

    const AmbientGroup& ambient() const { return ambient_; }
    const std::vector<int64_t>& prefix() const { return prefix_; }
    const std::optional<std::vector<int64_t>>& cycle() const { return cycle_; }
    bool eventually_periodic() const { return cycle_.has_value(); }

    // Multiplier m_i for i >= 1; DepthExceeded past the prefix of a
    // cycle-free chain.
    int64_t multiplier_at(uint32_t i) const;

    // Level i representable without running off a cycle-free prefix.
    bool has_level(uint32_t i) const { return cycle_.has_value() || i <= prefix_.size(); }

    // n_i as a plain integer; ResourceLimit past 64 bits.
    int64_t modulus_value_at(uint32_t i) const;

    // n_i factored.
    FactoredInt modulus_at(uint32_t i) const;

private:
    AmbientGroup ambient_;
    std::vector<int64_t> prefix_;
    std::optional<std::vector<int64_t>> cycle_;
};

/// v^l over ambient Z: +inf at 0, -inf off lZ, otherwise the maximal i with
/// l * n_i | a. DepthExceeded when a/l is divisible by every prefix modulus
/// of a cycle-free chain.
ValueElement valuate(const ValuationChain& chain, int64_t l, int64_t a);

/// Div predicate: j = +inf is unconditionally true; i > j is false;
/// otherwise q^{k * alpha_q} must divide |Z_pi ∩ lB_i : Z_pi ∩ lB_j|.
/// A -inf argument is clamped to level 0 (B_{-inf} is the whole group),
/// which is the unique monotone completion.
bool div_pred(const ValuationChain& chain, int64_t q, uint32_t k, const std::set<int64_t>& pi,
              int64_t l, ValueElement i, ValueElement j);

/// Ind predicate: j = +inf true, i > j false, otherwise
/// |Z_pi ∩ lB_i : Z_pi ∩ lB_j| >= k.
bool ind_pred(const ValuationChain& chain, uint64_t k, const std::set<int64_t>& pi,
              int64_t l, ValueElement i, ValueElement j);

enum class DistalityVerdict { Distal, NotDistal, UndeterminedBeyondPrefix };

struct DistalityReport {
    DistalityVerdict verdict;
    std::optional<uint64_t> bound;  // max quotient size seen (or proven, with a cycle)
};

/// Distality criterion: the theory is distal iff the quotient sizes
/// |B_i/B_{i+1}| are bounded. With a cycle the sizes are eventually periodic
/// and the exact bound is returned; a cycle-free prefix yields only the
/// bound seen so far.
DistalityReport distality_report(const ValuationChain& chain);

/// Chain built from the three-step recursion over distinct primes p0, p1, q:
/// block l contributes multipliers p_{sigma_l(0)}, p_{sigma_l(1)}, q. The
/// sigma list is treated as eventually constant (the last entry repeats), so
/// the result always carries a cycle of length 3.
struct SigmaChain {
    ValuationChain chain;
    int64_t p0, p1, q;
    std::vector<bool> swaps;  // sigma_l = transposition iff swaps[l]
};

SigmaChain build_sigma_chain(int64_t p0, int64_t p1, int64_t q,
                             const std::vector<bool>& sigma, uint32_t depth);

/// Comparison w(a) < w(b) for the s-adic valuation w (s = p0*p1*q) computed
/// from v_sigma data only: direct comparison when the v_sigma values are at
/// least 3 apart, otherwise through the selectors t_a, t_b (the unique
/// t in {p0,p1,q} with v_sigma(a) < v_sigma(t*a)).
bool w_compare(const SigmaChain& sc, int64_t a, int64_t b);

/// w(a) = max{i : s^i | a}, computed independently of any chain.
uint32_t direct_w(int64_t s, int64_t a);

struct RetractCheckResult {
    uint64_t agreements = 0;
    uint64_t total = 0;
    bool pass() const { return agreements == total; }
};

/// Compares w_compare against direct_w for all 0 < |a|,|b| <= range.
RetractCheckResult retract_check(const SigmaChain& sc, int64_t range);

} // namespace valz
