#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "valz/errors.hpp"

namespace valz {

// Checked 64-bit helpers. Moduli in this library are desk-scale; anything
// that would leave the signed 64-bit range raises ResourceLimit instead of
// wrapping.
int64_t checked_mul(int64_t a, int64_t b);
int64_t checked_add(int64_t a, int64_t b);
int64_t gcd64(int64_t a, int64_t b);
int64_t checked_lcm(int64_t a, int64_t b);

// Floor-free remainder test: does m divide a (m > 0, any sign of a)?
inline bool divides(int64_t m, int64_t a) { return a % m == 0; }

// x mod m normalized to [0, m).
int64_t mod_floor(int64_t x, int64_t m);

bool is_prime(int64_t n);

/// A positive integer together with its prime factorization.
/// Invariant: value == prod(p^e) over factors, every key prime, every
/// exponent >= 1; the empty map denotes 1.
struct FactoredInt {
    int64_t value = 1;
    std::map<int64_t, int> factors;

    // Exponent of p in value (the function n(p)).
    int exponent(int64_t p) const {
        auto it = factors.find(p);
        return it == factors.end() ? 0 : it->second;
    }

    bool operator==(const FactoredInt&) const = default;
};

/// Canonical factorization by trial division with a small-prime sieve.
/// n = 0 is a domain error; n = 1 yields the empty product.
FactoredInt factorize(int64_t n);

/// gcd of |ns| with a Bezout certificate: sum(coeffs[r] * ns[r]) == gcd.
/// Certificates are not canonical; callers must only rely on the identity.
std::pair<int64_t, std::vector<int64_t>> ext_gcd(const std::vector<int64_t>& ns);

/// Largest e with p^e | n. n = 0 is a domain error (the chain layer
/// represents v(0) as +infinity), p must be prime.
int padic_val(int64_t n, int64_t p);

/// Splits n >= 1 as piPart * coPart where piPart is a pi-number and coPart
/// is coprime to every prime in pi.
std::pair<int64_t, int64_t> pi_split(int64_t n, const std::set<int64_t>& pi);

inline bool is_pi_number(int64_t n, const std::set<int64_t>& pi) {
    return n >= 1 && pi_split(n, pi).second == 1;
}

} // namespace valz
