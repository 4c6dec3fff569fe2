#include "valz/chain.hpp"

#include <algorithm>

namespace valz {

std::string ValueElement::str() const {
    switch (tag) {
        case Tag::NegInf: return "-inf";
        case Tag::PosInf: return "+inf";
        default: return std::to_string(n);
    }
}

ValuationChain::ValuationChain(AmbientGroup ambient, std::vector<int64_t> prefix,
                               std::optional<std::vector<int64_t>> cycle)
    : ambient_(std::move(ambient)), prefix_(std::move(prefix)), cycle_(std::move(cycle)) {
    for (int64_t m : prefix_)
        if (m < 2) throw DomainError("chain multipliers must be >= 2");
    if (cycle_) {
        if (cycle_->empty()) throw DomainError("cycle must be nonempty when present");
        for (int64_t m : *cycle_)
            if (m < 2) throw DomainError("chain multipliers must be >= 2");
    }
}

int64_t ValuationChain::multiplier_at(uint32_t i) const {
    if (i == 0) throw UsageError("multipliers are indexed from 1");
    if (i <= prefix_.size()) return prefix_[i - 1];
    if (!cycle_)
        throw DepthExceeded("level " + std::to_string(i) + " beyond prefix of a cycle-free chain");
    return (*cycle_)[(i - prefix_.size() - 1) % cycle_->size()];
}

int64_t ValuationChain::modulus_value_at(uint32_t i) const {
    if (!has_level(i))
        throw DepthExceeded("level " + std::to_string(i) + " beyond prefix of a cycle-free chain");
    int64_t n = 1;
    for (uint32_t j = 1; j <= i; ++j) n = checked_mul(n, multiplier_at(j));
    return n;
}

FactoredInt ValuationChain::modulus_at(uint32_t i) const {
    return factorize(modulus_value_at(i));
}

ValueElement valuate(const ValuationChain& chain, int64_t l, int64_t a) {
    if (l < 1) throw DomainError("valuate requires l >= 1");
    if (!chain.ambient().is_integers)
        throw Unsupported("valuate is defined over ambient Z");
    if (a == 0) return ValueElement::pos_inf();
    if (a % l != 0) return ValueElement::neg_inf();
    int64_t q = a / l;
    if (q < 0) q = -q;
    uint32_t i = 0;
    // q holds a / (l * n_i); dividing by the next multiplier walks one level.
    while (true) {
        int64_t m = chain.multiplier_at(i + 1);  // DepthExceeded when q survives the prefix
        if (q % m != 0) return ValueElement::fin(i);
        q /= m;
        ++i;
    }
}

namespace {

uint32_t clamp_level(ValueElement v) {
    // B_{-inf} is the whole group, i.e. level 0.
    return v.is_neg_inf() ? 0 : v.n;
}

std::optional<FactoredInt> level_index(const ValuationChain& chain, const std::set<int64_t>& pi,
                                       int64_t l, ValueElement i, ValueElement j) {
    uint32_t li = clamp_level(i);
    uint32_t lj = clamp_level(j);
    int64_t m = checked_mul(l, chain.modulus_value_at(li));
    int64_t mp = checked_mul(l, chain.modulus_value_at(lj));
    return pi_index(chain.ambient(), pi, m, mp);
}

} // namespace

bool div_pred(const ValuationChain& chain, int64_t q, uint32_t k, const std::set<int64_t>& pi,
              int64_t l, ValueElement i, ValueElement j) {
    if (l < 1) throw DomainError("div_pred requires l >= 1");
    if (j.is_pos_inf()) return true;
    if (j < i) return false;
    int need = static_cast<int>(k) * chain.ambient().alpha_at(q);
    if (need == 0) return true;
    auto idx = level_index(chain, pi, l, i, j);
    if (!idx) return true;  // q^need always divides an infinite index
    return idx->exponent(q) >= need;
}

bool ind_pred(const ValuationChain& chain, uint64_t k, const std::set<int64_t>& pi,
              int64_t l, ValueElement i, ValueElement j) {
    if (l < 1) throw DomainError("ind_pred requires l >= 1");
    if (j.is_pos_inf()) return true;
    if (j < i) return false;
    auto idx = level_index(chain, pi, l, i, j);
    if (!idx) return true;
    return static_cast<uint64_t>(idx->value) >= k;
}

DistalityReport distality_report(const ValuationChain& chain) {
    // Over Z the quotient |B_i/B_{i+1}| is exactly the multiplier m_{i+1};
    // general ambients go through pi_index over the full prime set. With a
    // cycle the sizes are eventually periodic: alpha contributions repeat
    // immediately and each torsion prime either saturates or is constant
    // along the cycle, so scanning prefix + (K+1) periods is exact.
    size_t prefix_len = chain.prefix().size();
    size_t horizon;
    if (chain.cycle()) {
        size_t cyc = chain.cycle()->size();
        size_t extra = 1;
        if (!chain.ambient().is_integers) {
            int64_t cycle_product = 1;
            for (int64_t m : *chain.cycle()) cycle_product = checked_mul(cycle_product, m);
            FactoredInt fc = factorize(cycle_product);
            for (const auto& [p, exps] : chain.ambient().torsion) {
                int growth = fc.exponent(p);
                if (growth == 0) continue;
                int emax = *std::max_element(exps.begin(), exps.end());
                extra = std::max<size_t>(extra, static_cast<size_t>((emax + growth - 1) / growth) + 1);
            }
        }
        horizon = prefix_len + cyc * (extra + 1);
    } else {
        horizon = prefix_len;
    }

    uint64_t bound = 0;
    for (size_t i = 0; i < horizon; ++i) {
        uint64_t size;
        if (chain.ambient().is_integers) {
            size = static_cast<uint64_t>(chain.multiplier_at(static_cast<uint32_t>(i + 1)));
        } else {
            auto idx = pi_index(chain.ambient(), {}, chain.modulus_value_at(static_cast<uint32_t>(i)),
                                chain.modulus_value_at(static_cast<uint32_t>(i + 1)));
            size = idx ? static_cast<uint64_t>(idx->value) : UINT64_MAX;
        }
        bound = std::max(bound, size);
    }

    if (chain.cycle()) return {DistalityVerdict::Distal, bound};
    return {DistalityVerdict::UndeterminedBeyondPrefix,
            chain.prefix().empty() ? std::nullopt : std::optional<uint64_t>(bound)};
}

SigmaChain build_sigma_chain(int64_t p0, int64_t p1, int64_t q,
                             const std::vector<bool>& sigma, uint32_t depth) {
    if (!is_prime(p0) || !is_prime(p1) || !is_prime(q))
        throw DomainError("sigma chain requires primes");
    if (p0 == p1 || p0 == q || p1 == q)
        throw DomainError("sigma chain requires pairwise distinct primes");
    if (sigma.empty()) throw UsageError("sigma list must be nonempty");

    // The list is sigma_0 .. sigma_{L-1} with the last entry repeating, so
    // the requested depth is always coverable; blocks beyond the list come
    // from the constant tail.
    size_t blocks = std::max(sigma.size(), static_cast<size_t>((depth + 2) / 3));
    std::vector<int64_t> prefix;
    for (size_t l = 0; l < blocks; ++l) {
        bool swap = sigma[std::min(l, sigma.size() - 1)];
        prefix.push_back(swap ? p1 : p0);
        prefix.push_back(swap ? p0 : p1);
        prefix.push_back(q);
    }
    bool last = sigma.back();
    std::vector<int64_t> cycle{last ? p1 : p0, last ? p0 : p1, q};
    return {ValuationChain(AmbientGroup::integers(), std::move(prefix), std::move(cycle)),
            p0, p1, q, sigma};
}

namespace {

// The unique t in {p0,p1,q} with v_sigma(a) < v_sigma(t*a). Existence and
// uniqueness follow from the chain construction; failure is a bug.
int64_t selector(const SigmaChain& sc, int64_t a, uint32_t va) {
    int64_t found = 0;
    for (int64_t t : {sc.p0, sc.p1, sc.q}) {
        ValueElement vt = valuate(sc.chain, 1, checked_mul(t, a));
        if (!vt.is_fin()) throw InternalError("sigma chain valuation not finite");
        if (vt.n > va) {
            if (found != 0) throw InternalError("sigma chain selector not unique");
            found = t;
        }
    }
    if (found == 0) throw InternalError("sigma chain selector missing");
    if (found != sc.chain.multiplier_at(va + 1))
        throw InternalError("sigma chain selector disagrees with chain");
    return found;
}

// Position of a within its 3-block: the selector equals the next multiplier,
// and the q-steps sit at indices divisible by 3, so t_a = q marks offset 2.
uint32_t block_of(const SigmaChain& sc, int64_t a, uint32_t va) {
    int64_t t = selector(sc, a, va);
    uint32_t offset = va % 3;
    if ((t == sc.q) != (offset == 2))
        throw InternalError("sigma chain selector inconsistent with block offset");
    return (va - offset) / 3;
}

} // namespace

bool w_compare(const SigmaChain& sc, int64_t a, int64_t b) {
    if (a == 0 || b == 0) throw DomainError("w_compare requires nonzero inputs");
    ValueElement va = valuate(sc.chain, 1, a);
    ValueElement vb = valuate(sc.chain, 1, b);
    if (!va.is_fin() || !vb.is_fin()) throw InternalError("sigma chain valuation not finite");
    int64_t gap = static_cast<int64_t>(va.n) - static_cast<int64_t>(vb.n);
    if (gap >= 3 || gap <= -3) return va.n < vb.n;
    return block_of(sc, a, va.n) < block_of(sc, b, vb.n);
}

uint32_t direct_w(int64_t s, int64_t a) {
    if (a == 0) throw DomainError("direct_w undefined at 0");
    if (a < 0) a = -a;
    uint32_t w = 0;
    while (a % s == 0) {
        a /= s;
        ++w;
    }
    return w;
}

RetractCheckResult retract_check(const SigmaChain& sc, int64_t range) {
    if (range < 1) throw DomainError("retract_check requires range >= 1");
    int64_t s = checked_mul(checked_mul(sc.p0, sc.p1), sc.q);

    // valuate, block and w depend only on |a|, so the four sign choices per
    // pair agree; they are counted explicitly below.
    size_t n = static_cast<size_t>(range);
    std::vector<uint32_t> v(n + 1), blk(n + 1), w(n + 1);
    for (size_t x = 1; x <= n; ++x) {
        ValueElement vx = valuate(sc.chain, 1, static_cast<int64_t>(x));
        if (!vx.is_fin()) throw InternalError("sigma chain valuation not finite");
        v[x] = vx.n;
        blk[x] = block_of(sc, static_cast<int64_t>(x), vx.n);
        w[x] = direct_w(s, static_cast<int64_t>(x));
    }

    RetractCheckResult res;
    for (size_t a = 1; a <= n; ++a) {
        for (size_t b = 1; b <= n; ++b) {
            int64_t gap = static_cast<int64_t>(v[a]) - static_cast<int64_t>(v[b]);
            bool engine = (gap >= 3 || gap <= -3) ? v[a] < v[b] : blk[a] < blk[b];
            res.agreements += (engine == (w[a] < w[b])) ? 4 : 0;
            res.total += 4;
        }
    }
    return res;
}

} // namespace valz
