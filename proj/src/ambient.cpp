#include "valz/ambient.hpp"

#include <algorithm>

namespace valz {

AmbientGroup AmbientGroup::general(std::map<int64_t, int> alpha,
                                   std::map<int64_t, std::vector<int>> torsion) {
    AmbientGroup a;
    for (auto it = alpha.begin(); it != alpha.end();) {
        if (!is_prime(it->first)) throw DomainError("alpha key must be prime");
        if (it->second < 0) throw DomainError("alpha exponent must be >= 0");
        it = it->second == 0 ? alpha.erase(it) : std::next(it);
    }
    for (const auto& [p, exps] : torsion) {
        if (!is_prime(p)) throw DomainError("torsion key must be prime");
        if (exps.empty()) throw DomainError("torsion factor list must be nonempty");
        for (int e : exps)
            if (e < 1) throw DomainError("torsion exponent must be >= 1");
    }
    a.alpha = std::move(alpha);
    a.torsion = std::move(torsion);
    return a;
}

std::vector<int64_t> FiniteQuotient::slot_moduli() const {
    std::vector<int64_t> mods;
    for (const auto& c : components) {
        int64_t m = 1;
        for (int i = 0; i < c.exp; ++i) m = checked_mul(m, c.prime);
        for (int i = 0; i < c.mult; ++i) mods.push_back(m);
    }
    return mods;
}

int64_t FiniteQuotient::order() const {
    int64_t o = 1;
    for (int64_t m : slot_moduli()) o = checked_mul(o, m);
    return o;
}

FiniteQuotient quotient_mod(const AmbientGroup& A, int64_t m) {
    if (m < 1) throw DomainError("quotient_mod requires m >= 1");
    FactoredInt fm = factorize(m);
    FiniteQuotient q;
    if (A.is_integers) {
        for (const auto& [p, e] : fm.factors)
            q.components.push_back({p, e, 1});
        return q;
    }
    for (const auto& [p, a] : A.alpha) {
        int e = fm.exponent(p);
        if (e > 0) q.components.push_back({p, e, a});
    }
    for (const auto& [p, exps] : A.torsion) {
        int mp = fm.exponent(p);
        for (int e : exps) {
            int cut = std::min(e, mp);
            if (cut > 0) q.components.push_back({p, cut, 1});
        }
    }
    return q;
}

std::optional<FactoredInt> pi_index(const AmbientGroup& A, const std::set<int64_t>& pi,
                                    int64_t m, int64_t mprime) {
    if (m < 1 || mprime < 1) throw DomainError("pi_index requires positive moduli");
    if (mprime % m != 0) throw DomainError("pi_index requires m | m'");
    FactoredInt out;
    if (A.is_integers) {
        out = factorize(mprime / m);
        return out;
    }
    FactoredInt fm = factorize(m);
    FactoredInt fmp = factorize(mprime);
    std::set<int64_t> primes;
    for (const auto& [p, _] : fmp.factors) primes.insert(p);

    int64_t value = 1;
    for (int64_t p : primes) {
        int d = fmp.exponent(p) - fm.exponent(p);
        int exp = A.alpha_at(p) * d;
        if (!pi.count(p)) {
            auto it = A.torsion.find(p);
            if (it != A.torsion.end())
                for (int e : it->second)
                    exp += std::min(e, fmp.exponent(p)) - std::min(e, fm.exponent(p));
        }
        if (exp > 0) {
            out.factors[p] = exp;
            for (int i = 0; i < exp; ++i) value = checked_mul(value, p);
        }
    }
    out.value = value;
    return out;
}

} // namespace valz
