#include <doctest.h>

#include <random>

#include "valz/arith.hpp"

using namespace valz;

TEST_CASE("factorize small values") {
    FactoredInt f = factorize(60);
    CHECK(f.factors == std::map<int64_t, int>{{2, 2}, {3, 1}, {5, 1}});
    CHECK(factorize(1).factors.empty());
    CHECK(factorize(1024).factors == std::map<int64_t, int>{{2, 10}});
    CHECK_THROWS_AS(factorize(0), DomainError);
}

TEST_CASE("factorize reassembles random values") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int64_t> dist(1, 1'000'000);
    for (int i = 0; i < 500; ++i) {
        int64_t n = dist(rng);
        FactoredInt f = factorize(n);
        int64_t prod = 1;
        for (const auto& [p, e] : f.factors) {
            CHECK(is_prime(p));
            CHECK(e >= 1);
            for (int j = 0; j < e; ++j) prod *= p;
        }
        CHECK(prod == n);
    }
}

TEST_CASE("ext_gcd certificates verify") {
    auto [g, coeffs] = ext_gcd({12, 8});
    CHECK(g == 4);
    CHECK(coeffs[0] * 12 + coeffs[1] * 8 == 4);

    auto [g1, c1] = ext_gcd({6});
    CHECK(g1 == 6);
    CHECK(c1 == std::vector<int64_t>{1});

    auto [g2, c2] = ext_gcd({2, 3});
    CHECK(g2 == 1);
    CHECK(c2[0] * 2 + c2[1] * 3 == 1);

    CHECK_THROWS_AS(ext_gcd({}), UsageError);
    CHECK_THROWS_AS(ext_gcd({4, 0}), DomainError);
}

TEST_CASE("ext_gcd random certificates") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int64_t> dist(-500, 500);
    std::uniform_int_distribution<int> len(1, 6);
    for (int i = 0; i < 300; ++i) {
        std::vector<int64_t> ns;
        for (int j = len(rng); j > 0; --j) {
            int64_t v = dist(rng);
            ns.push_back(v == 0 ? 1 : v);
        }
        auto [g, coeffs] = ext_gcd(ns);
        CHECK(g >= 1);
        int64_t sum = 0;
        for (size_t j = 0; j < ns.size(); ++j) {
            CHECK(ns[j] % g == 0);
            sum += coeffs[j] * ns[j];
        }
        CHECK(sum == g);
    }
}

TEST_CASE("padic_val") {
    CHECK(padic_val(12, 2) == 2);
    CHECK(padic_val(12, 3) == 1);
    CHECK(padic_val(7, 2) == 0);
    CHECK(padic_val(-24, 2) == 3);
    CHECK_THROWS_AS(padic_val(0, 2), DomainError);
    CHECK_THROWS_AS(padic_val(5, 4), DomainError);
}

TEST_CASE("pi_split") {
    CHECK(pi_split(60, {2, 5}) == std::pair<int64_t, int64_t>{20, 3});
    CHECK(pi_split(7, {2}) == std::pair<int64_t, int64_t>{1, 7});
    CHECK(pi_split(8, {2}) == std::pair<int64_t, int64_t>{8, 1});

    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int64_t> dist(1, 100'000);
    for (int i = 0; i < 300; ++i) {
        int64_t n = dist(rng);
        auto [pi, co] = pi_split(n, {2, 3, 7});
        CHECK(pi * co == n);
        CHECK(gcd64(pi, co) == 1);
        CHECK(co % 2 != 0);
        CHECK(co % 3 != 0);
        CHECK(co % 7 != 0);
        CHECK(is_pi_number(n, {2, 3, 7}) == (co == 1));
    }
}
