#include "valz/arith.hpp"

#include <algorithm>
#include <numeric>

namespace valz {

int64_t checked_mul(int64_t a, int64_t b) {
    __int128 r = static_cast<__int128>(a) * b;
    if (r > INT64_MAX || r < INT64_MIN)
        throw ResourceLimit("64-bit overflow in multiplication");
    return static_cast<int64_t>(r);
}

int64_t checked_add(int64_t a, int64_t b) {
    __int128 r = static_cast<__int128>(a) + b;
    if (r > INT64_MAX || r < INT64_MIN)
        throw ResourceLimit("64-bit overflow in addition");
    return static_cast<int64_t>(r);
}

int64_t gcd64(int64_t a, int64_t b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

int64_t checked_lcm(int64_t a, int64_t b) {
    if (a == 0 || b == 0) return 0;
    int64_t g = gcd64(a, b);
    return checked_mul(a < 0 ? -a : a, (b < 0 ? -b : b) / g);
}

int64_t mod_floor(int64_t x, int64_t m) {
    int64_t r = x % m;
    return r < 0 ? r + m : r;
}

namespace {

// Primes below 2^16, enough to trial-divide any 64-bit value when combined
// with the odd-candidate fallback.
const std::vector<int32_t>& small_primes() {
    static const std::vector<int32_t> primes = [] {
        const int32_t limit = 1 << 16;
        std::vector<bool> composite(limit, false);
        std::vector<int32_t> ps;
        for (int32_t i = 2; i < limit; ++i) {
            if (composite[i]) continue;
            ps.push_back(i);
            for (int64_t j = static_cast<int64_t>(i) * i; j < limit; j += i)
                composite[static_cast<size_t>(j)] = true;
        }
        return ps;
    }();
    return primes;
}

} // namespace

bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int32_t p : small_primes()) {
        if (static_cast<int64_t>(p) * p > n) return true;
        if (n % p == 0) return n == p;
    }
    // n has no factor below 2^16, so any factor search continues on odd
    // candidates from there.
    for (int64_t c = (1 << 16) + 1; c * c <= n; c += 2)
        if (n % c == 0) return false;
    return true;
}

FactoredInt factorize(int64_t n) {
    if (n <= 0) throw DomainError("factorize requires n >= 1");
    FactoredInt out;
    out.value = n;
    for (int32_t p : small_primes()) {
        if (static_cast<int64_t>(p) * p > n) break;
        while (n % p == 0) {
            out.factors[p]++;
            n /= p;
        }
    }
    if (n > 1) {
        for (int64_t c = (1 << 16) + 1; c * c <= n; c += 2) {
            while (n % c == 0) {
                out.factors[c]++;
                n /= c;
            }
        }
        if (n > 1) out.factors[n]++;
    }
    return out;
}

namespace {

// Classic extended Euclid on nonnegative inputs: returns (g, x, y) with
// a*x + b*y = g.
struct EgcdResult {
    int64_t g, x, y;
};

EgcdResult egcd(int64_t a, int64_t b) {
    if (b == 0) return {a, 1, 0};
    EgcdResult sub = egcd(b, a % b);
    return {sub.g, sub.y, sub.x - (a / b) * sub.y};
}

} // namespace

std::pair<int64_t, std::vector<int64_t>> ext_gcd(const std::vector<int64_t>& ns) {
    if (ns.empty()) throw UsageError("ext_gcd requires a nonempty list");
    for (int64_t n : ns)
        if (n == 0) throw DomainError("ext_gcd requires nonzero entries");

    int64_t g = ns[0] < 0 ? -ns[0] : ns[0];
    std::vector<int64_t> coeffs{ns[0] < 0 ? int64_t{-1} : int64_t{1}};
    for (size_t i = 1; i < ns.size(); ++i) {
        int64_t m = ns[i] < 0 ? -ns[i] : ns[i];
        EgcdResult e = egcd(g, m);
        for (int64_t& c : coeffs) c = checked_mul(c, e.x);
        coeffs.push_back(ns[i] < 0 ? -e.y : e.y);
        g = e.g;
    }

    __int128 check = 0;
    for (size_t i = 0; i < ns.size(); ++i)
        check += static_cast<__int128>(coeffs[i]) * ns[i];
    if (check != g) throw InternalError("Bezout certificate failed verification");
    return {g, coeffs};
}

int padic_val(int64_t n, int64_t p) {
    if (n == 0) throw DomainError("padic_val undefined at 0");
    if (!is_prime(p)) throw DomainError("padic_val requires a prime");
    if (n < 0) n = -n;
    int e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

std::pair<int64_t, int64_t> pi_split(int64_t n, const std::set<int64_t>& pi) {
    if (n < 1) throw DomainError("pi_split requires n >= 1");
    int64_t piPart = 1;
    for (int64_t p : pi) {
        while (n % p == 0) {
            piPart = checked_mul(piPart, p);
            n /= p;
        }
    }
    return {piPart, n};
}

} // namespace valz
