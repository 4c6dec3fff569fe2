#include "valz/congruence.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace valz {

namespace {

// Least-absolute-value solution of n*x ≡ a (mod M) for d = gcd(n,M) | a,
// from the Bezout certificate; the full set modulo M is x0 + t*M/d.
int64_t base_solution(int64_t n, int64_t a, int64_t M) {
    auto [g, coeffs] = ext_gcd({n, M});
    if (a % g != 0) throw InternalError("base_solution called on unsolvable congruence");
    int64_t period = M / g;
    __int128 x = static_cast<__int128>(coeffs[0]) * (a / g);
    int64_t r = static_cast<int64_t>(x % period);
    if (r < 0) r += period;
    return r;
}

int64_t signed_rhs(const Congruence& c) { return c.coeff < 0 ? -c.rhs : c.rhs; }
int64_t abs_coeff(const Congruence& c) { return c.coeff < 0 ? -c.coeff : c.coeff; }

void require_integers(const ValuationChain& chain, const char* op) {
    if (!chain.ambient().is_integers)
        throw Unsupported(std::string(op) + " is implemented over ambient Z");
}

} // namespace

bool member_satisfied(const Congruence& c, int64_t x, const ValuationChain& chain) {
    int64_t t = checked_add(checked_mul(c.coeff, x), -c.rhs);
    bool holds;
    if (c.level.is_pos_inf()) {
        holds = (t == 0);
    } else if (c.level.is_neg_inf()) {
        holds = true;  // v^l(t) >= -inf always
    } else {
        int64_t m = checked_mul(c.scale, chain.modulus_value_at(c.level.n));
        holds = (t % m == 0);
    }
    return c.negated ? !holds : holds;
}

SolutionCount solve_single(int64_t n, int64_t a, int64_t M, const AmbientGroup& A) {
    if (n == 0) throw DomainError("solve_single requires a nonzero coefficient");
    if (M < 1) throw DomainError("solve_single requires M >= 1");
    if (n < 0) {
        n = -n;
        a = -a;
    }
    int64_t d = gcd64(n, M);
    FactoredInt fd = factorize(d);

    SolutionCount out;
    out.boundary_modulus = factorize(M);

    // Solvable iff a ∈ d*Z_pi for pi = primes of n: per coordinate with
    // alpha_p > 0 this is p^{d(p)} | a; torsion outside pi imposes nothing.
    bool solvable = true;
    for (const auto& [p, e] : fd.factors) {
        if (A.alpha_at(p) == 0) continue;
        int64_t pe = 1;
        for (int i = 0; i < e; ++i) pe = checked_mul(pe, p);
        if (a % pe != 0) {
            solvable = false;
            break;
        }
    }
    if (!solvable) return out;

    out.solvable = true;
    out.count = 1;
    for (const auto& [p, e] : fd.factors) {
        int exp = A.alpha_at(p) * e;
        for (int i = 0; i < exp; ++i) out.count *= static_cast<uint64_t>(p);
    }

    if (A.is_integers) {
        out.witness = base_solution(n, a, M);
        if ((checked_mul(n, *out.witness) - a) % M != 0)
            throw InternalError("solve_single witness failed verification");
        return out;
    }

    // Diagonal witness for a general ambient: CRT over the per-prime
    // congruences n*x ≡ a (mod p^{e_p}), where e_p = M(p) on free
    // coordinates and min(e, M(p)) on torsion coordinates off the primes
    // of n.
    FactoredInt fM = factorize(M);
    FactoredInt fn = factorize(n);
    std::map<int64_t, int> target;
    for (const auto& [p, e] : fM.factors) {
        if (A.alpha_at(p) > 0) target[p] = std::max(target[p], e);
        auto it = A.torsion.find(p);
        if (it != A.torsion.end() && fn.exponent(p) == 0)
            for (int te : it->second) target[p] = std::max(target[p], std::min(te, e));
    }
    int64_t x = 0, mod = 1;
    for (const auto& [p, e] : target) {
        int64_t pe = 1;
        for (int i = 0; i < e; ++i) pe = checked_mul(pe, p);
        int64_t dp = gcd64(n, pe);
        if (a % dp != 0) throw InternalError("solve_single: inconsistent per-prime system");
        int64_t sol = base_solution(n, a, pe);
        int64_t period = pe / dp;
        // merge x (mod mod) with sol (mod period); moduli here are coprime
        // across primes but the running modulus may share p, so use general
        // CRT.
        int64_t g = gcd64(mod, period);
        if ((sol - x) % g != 0) throw InternalError("solve_single: CRT mismatch");
        int64_t lcm = checked_lcm(mod, period);
        // x' = x + mod * t with t ≡ (sol - x)/g * inv(mod/g) mod period/g
        int64_t step = period / g;
        if (step > 1) {
            auto [gg, cf] = ext_gcd({mod / g, step});
            (void)gg;
            int64_t t = mod_floor(checked_mul(mod_floor((sol - x) / g, step), mod_floor(cf[0], step)), step);
            x = mod_floor(checked_add(x, checked_mul(mod, t)), lcm);
        }
        mod = lcm;
    }
    out.witness = x;
    for (const auto& [p, e] : target) {
        int64_t pe = 1;
        for (int i = 0; i < e; ++i) pe = checked_mul(pe, p);
        if ((checked_mul(n, x) - a) % pe != 0)
            throw InternalError("solve_single witness failed verification");
    }
    return out;
}

Congruence rescale(const Congruence& c, int64_t t, const std::set<int64_t>& pi) {
    if (t < 1) throw DomainError("rescale requires t >= 1");
    if (!is_pi_number(t, pi)) throw DomainError("rescale factor must be a pi-number");
    Congruence out = c;
    out.coeff = checked_mul(c.coeff, t);
    out.rhs = checked_mul(c.rhs, t);
    out.scale = checked_mul(c.scale, t);
    return out;
}

std::pair<Congruence, SolutionCount> reduce_fixed_modulus(const std::vector<Congruence>& system,
                                                          const ValuationChain& chain) {
    require_integers(chain, "reduce_fixed_modulus");
    if (system.empty()) throw UsageError("reduce_fixed_modulus requires a nonempty system");
    const int64_t l = system.front().scale;
    const ValueElement lvl = system.front().level;
    if (!lvl.is_fin()) throw DomainError("reduce_fixed_modulus requires finite levels");
    for (const auto& c : system) {
        if (c.negated) throw DomainError("reduce_fixed_modulus requires positive members");
        if (c.scale != l || !(c.level == lvl))
            throw DomainError("reduce_fixed_modulus requires one shared modulus");
    }
    int64_t M = checked_mul(l, chain.modulus_value_at(lvl.n));

    std::vector<int64_t> coeffs;
    coeffs.reserve(system.size());
    for (const auto& c : system) coeffs.push_back(abs_coeff(c));
    auto [n, bez] = ext_gcd(coeffs);
    __int128 acc = 0;
    for (size_t r = 0; r < system.size(); ++r)
        acc += static_cast<__int128>(bez[r]) * signed_rhs(system[r]);
    if (acc > INT64_MAX || acc < INT64_MIN) throw ResourceLimit("combined right-hand side overflow");
    int64_t a = static_cast<int64_t>(acc);

    Congruence combined{n, a, l, lvl, false};
    SolutionCount count;
    count.boundary_modulus = factorize(M);

    // Part (b) companion: k = n/d, d_r = n_r/k. The system is solvable iff
    // d | a and the candidate a/d satisfies every companion member.
    int64_t d = gcd64(n, M);
    if (a % d != 0) return {combined, count};
    int64_t k = n / d;
    int64_t cand = a / d;
    for (size_t r = 0; r < system.size(); ++r) {
        int64_t dr = abs_coeff(system[r]) / k;
        if ((checked_mul(dr, cand) - signed_rhs(system[r])) % M != 0) return {combined, count};
    }

    count = solve_single(n, a, M, chain.ambient());
    for (const auto& c : system)
        if (!member_satisfied(c, *count.witness, chain))
            throw InternalError("reduced witness fails an input member");
    return {combined, count};
}

Congruence collapse(const Congruence& c, uint32_t target_level, int64_t u,
                    const ValuationChain& chain) {
    require_integers(chain, "collapse");
    if (c.negated || !c.level.is_fin()) throw DomainError("collapse requires a positive finite-level congruence");
    if (target_level >= c.level.n) throw DomainError("collapse target must be a strictly smaller level");
    if (u < 1) throw DomainError("collapse requires u >= 1");

    int64_t m = checked_mul(c.scale, chain.modulus_value_at(c.level.n));
    int64_t base = checked_mul(checked_mul(u, c.scale), chain.modulus_value_at(target_level));
    if (m % base != 0) throw DomainError("collapse target modulus must divide the original");

    int64_t ratio = m / base;
    FactoredInt fd = factorize(gcd64(abs_coeff(c), m));
    int64_t k = 1;
    for (const auto& [p, e] : fd.factors) {
        int vr = 0;
        int64_t r = ratio;
        while (r % p == 0) {
            r /= p;
            ++vr;
        }
        if (vr == 0) continue;
        if (vr < e)
            throw PreconditionError("collapse side condition fails at p = " + std::to_string(p) +
                                    ": p^" + std::to_string(e) + " does not divide the index ratio");
        for (int i = 0; i < e; ++i) k = checked_mul(k, p);
    }

    Congruence out = c;
    out.scale = checked_mul(checked_mul(k, u), c.scale);
    out.level = ValueElement::fin(target_level);
    return out;
}

namespace {

struct SplitSystem {
    std::vector<Congruence> pos_eq, neg_eq, pos, neg;
    uint32_t boundary = 0;
    int64_t scale = 1;  // unified lcm scale of the congruence members
};

SplitSystem split_and_unify(const CongruenceSystem& system) {
    SplitSystem s;
    for (const auto& c : system.members) {
        if (c.coeff == 0) throw DomainError("congruence coefficient must be nonzero");
        if (c.scale < 1) throw DomainError("congruence scale must be >= 1");
        if (c.level.is_neg_inf()) throw DomainError("congruence level must be finite or +inf");
        if (c.is_equation())
            (c.negated ? s.neg_eq : s.pos_eq).push_back(c);
        else if (c.negated)
            s.neg.push_back(c);
        else
            s.pos.push_back(c);
        if (c.level.is_fin()) {
            s.boundary = std::max(s.boundary, c.level.n);
            s.scale = checked_lcm(s.scale, c.scale);
        }
    }
    std::set<int64_t> all_primes;  // over Z every rescale factor is admissible
    auto unify = [&](Congruence& c) {
        int64_t t = s.scale / c.scale;
        if (t > 1) {
            for (const auto& [p, e] : factorize(t).factors) all_primes.insert(p);
            c = rescale(c, t, all_primes);
        }
    };
    for (auto& c : s.pos) unify(c);
    for (auto& c : s.neg) unify(c);
    return s;
}

// Count of a purely positive finite-level system sharing scale l, modulo
// l * n_{max level}, by the mixed-modulus recursion: merge the deepest
// level, collapse it one level down, repeat. The scaling u is chosen per
// prime of d so the collapse side conditions hold by construction.
uint64_t count_positive(std::vector<Congruence> members, int64_t l, const ValuationChain& chain) {
    if (members.empty()) return static_cast<uint64_t>(l);  // every residue modulo l*n_0
    uint32_t top = 0;
    for (const auto& c : members) top = std::max(top, c.level.n);

    std::vector<Congruence> top_group, rest;
    for (const auto& c : members)
        (c.level.n == top ? top_group : rest).push_back(c);

    auto [merged, cnt] = reduce_fixed_modulus(top_group, chain);
    if (!cnt.solvable) return 0;
    if (rest.empty()) return cnt.count;

    uint32_t next = 0;
    for (const auto& c : rest) next = std::max(next, c.level.n);

    int64_t m = checked_mul(l, chain.modulus_value_at(top));
    int64_t ratio = chain.modulus_value_at(top) / chain.modulus_value_at(next);
    FactoredInt fd = factorize(gcd64(abs_coeff(merged), m));
    int64_t u = 1;
    for (const auto& [p, e] : fd.factors) {
        int vr = 0;
        int64_t r = ratio;
        while (r % p == 0) {
            r /= p;
            ++vr;
        }
        if (vr > 0 && vr < e)
            for (int i = 0; i < vr; ++i) u = checked_mul(u, p);
    }

    Congruence dropped = collapse(merged, next, u, chain);
    int64_t ku = dropped.scale / l;
    std::set<int64_t> primes;
    for (const auto& [p, e] : factorize(ku).factors) primes.insert(p);

    std::vector<Congruence> reduced;
    reduced.push_back(dropped);
    for (const auto& c : rest) reduced.push_back(ku > 1 ? rescale(c, ku, primes) : c);
    return count_positive(std::move(reduced), dropped.scale, chain);
}

std::optional<int64_t> search_witness(const CongruenceSystem& system, const ValuationChain& chain,
                                      int64_t modulus, size_t excluded_points) {
    // Smallest |x|, positive preferred on ties. Any nonempty union of cosets
    // modulo the boundary meets [-(B), B] for B = modulus * (#excluded + 1).
    int64_t limit = checked_mul(modulus, static_cast<int64_t>(excluded_points) + 2);
    for (int64_t t = 0; t <= limit; ++t) {
        for (int64_t x : {t, -t}) {
            bool ok = true;
            for (const auto& c : system.members)
                if (!member_satisfied(c, x, chain)) {
                    ok = false;
                    break;
                }
            if (ok) return x;
            if (t == 0) break;
        }
    }
    return std::nullopt;
}

} // namespace

SolutionCount count_system(const CongruenceSystem& system, const ValuationChain& chain) {
    require_integers(chain, "count_system");
    SplitSystem s = split_and_unify(system);
    int64_t M = checked_mul(s.scale, chain.modulus_value_at(s.boundary));

    SolutionCount out;
    out.boundary_modulus = factorize(M);

    if (s.pos_eq.empty() && s.pos.empty())
        throw UsageError("count_system requires at least one positive member");

    // Equations pin at most one candidate point; the remaining members are
    // checked against it directly.
    if (!s.pos_eq.empty()) {
        std::optional<int64_t> candidate;
        for (const auto& e : s.pos_eq) {
            int64_t n = abs_coeff(e), a = signed_rhs(e);
            if (a % n != 0) return out;
            int64_t x = a / n;
            if (candidate && *candidate != x) return out;
            candidate = x;
        }
        for (const auto& c : system.members)
            if (!member_satisfied(c, *candidate, chain)) return out;
        out.solvable = true;
        out.count = 1;
        out.witness = candidate;
        return out;
    }

    if (s.neg.size() > 16)
        throw ResourceLimit("inclusion-exclusion capped at 16 negated members");

    // Inclusion-exclusion over subsets of negations; each subset is counted
    // as a positive system and lifted to the common boundary modulus.
    int64_t total = 0;
    size_t subsets = size_t{1} << s.neg.size();
    for (size_t mask = 0; mask < subsets; ++mask) {
        std::vector<Congruence> pos = s.pos;
        uint32_t level = 0;
        for (const auto& c : s.pos) level = std::max(level, c.level.n);
        for (size_t i = 0; i < s.neg.size(); ++i)
            if (mask & (size_t{1} << i)) {
                Congruence p = s.neg[i];
                p.negated = false;
                level = std::max(level, p.level.n);
                pos.push_back(p);
            }
        uint64_t cnt = count_positive(pos, s.scale, chain);
        int64_t lift = chain.modulus_value_at(s.boundary) / chain.modulus_value_at(level);
        int64_t term = checked_mul(static_cast<int64_t>(cnt), lift);
        total += (std::popcount(mask) % 2 == 0) ? term : -term;
    }
    if (total < 0) throw InternalError("inclusion-exclusion produced a negative count");

    out.count = static_cast<uint64_t>(total);
    out.solvable = total > 0;
    if (out.solvable) {
        out.witness = search_witness(system, chain, M, s.neg_eq.size());
        if (!out.witness) throw InternalError("positive count but no witness found");
    }
    return out;
}

std::optional<int64_t> witness(const CongruenceSystem& system, const ValuationChain& chain) {
    SolutionCount c = count_system(system, chain);
    return c.witness;
}

} // namespace valz
