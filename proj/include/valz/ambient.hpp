#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "valz/arith.hpp"

namespace valz {

/// Descriptor of the ambient abelian profinite group
///   A = prod_p Z_p^{alpha_p} x A_p,
/// with A_p a finite abelian p-group given by invariant factors.
///
/// The integers are a distinguished instance ("Z"): alpha_p = 1 for every
/// prime with no torsion. Its support is infinite, so it is carried as a
/// flag rather than a map.
struct AmbientGroup {
    bool is_integers = false;
    std::map<int64_t, int> alpha;                 // prime -> exponent >= 1 (zero entries dropped)
    std::map<int64_t, std::vector<int>> torsion;  // prime -> invariant factor exponents (each >= 1)

    static AmbientGroup integers() {
        AmbientGroup a;
        a.is_integers = true;
        return a;
    }

    static AmbientGroup general(std::map<int64_t, int> alpha,
                                std::map<int64_t, std::vector<int>> torsion);

    // alpha_p; 1 for every prime when the ambient is Z.
    int alpha_at(int64_t p) const {
        if (is_integers) return 1;
        auto it = alpha.find(p);
        return it == alpha.end() ? 0 : it->second;
    }

    bool operator==(const AmbientGroup&) const = default;
};

/// A finite quotient A/mA presented as prod (Z/p^e)^mult. Elements are
/// coordinate tuples of residues, one slot per cyclic factor.
struct FiniteQuotient {
    struct Component {
        int64_t prime;
        int exp;
        int mult;
        bool operator==(const Component&) const = default;
    };
    std::vector<Component> components;

    // Moduli p^e, one entry per slot (components expanded by multiplicity).
    std::vector<int64_t> slot_moduli() const;

    // Group order; ResourceLimit beyond 64 bits.
    int64_t order() const;

    bool operator==(const FiniteQuotient&) const = default;
};

/// The finite group A/mA with coordinatewise structure. Each Z_p factor
/// contributes Z/p^{m(p)}, each torsion factor Z/p^e contributes
/// Z/p^{min(e, m(p))}.
FiniteQuotient quotient_mod(const AmbientGroup& A, int64_t m);

/// The index |mA ∩ Z_pi : m'A ∩ Z_pi| for m | m', factored:
///   prod_p p^{alpha_p (m'(p) - m(p))} * prod_{p not in pi} |mA_p : m'A_p|.
/// nullopt stands for an infinite index; over the representable ambients
/// every such index is finite, the variant exists for interface fidelity.
std::optional<FactoredInt> pi_index(const AmbientGroup& A, const std::set<int64_t>& pi,
                                    int64_t m, int64_t mprime);

} // namespace valz
