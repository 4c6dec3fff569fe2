#include <doctest.h>

#include <random>

#include "valz/ambient.hpp"

using namespace valz;

TEST_CASE("quotient_mod examples") {
    CHECK(quotient_mod(AmbientGroup::integers(), 6).order() == 6);

    AmbientGroup z2sq = AmbientGroup::general({{2, 2}}, {});
    CHECK(quotient_mod(z2sq, 4).order() == 16);

    AmbientGroup mixed = AmbientGroup::general({{2, 1}}, {{3, {1}}});
    FiniteQuotient q = quotient_mod(mixed, 6);
    CHECK(q.order() == 6);  // Z/2 x Z/3
    CHECK(q.slot_moduli() == std::vector<int64_t>{2, 3});

    CHECK(quotient_mod(AmbientGroup::integers(), 1).order() == 1);
    CHECK_THROWS_AS(quotient_mod(AmbientGroup::integers(), 0), DomainError);
}

TEST_CASE("pi_index examples") {
    auto idx = pi_index(AmbientGroup::integers(), {2}, 2, 8);
    REQUIRE(idx.has_value());
    CHECK(idx->value == 4);

    AmbientGroup z2sq = AmbientGroup::general({{2, 2}}, {});
    idx = pi_index(z2sq, {2}, 1, 2);
    REQUIRE(idx.has_value());
    CHECK(idx->value == 4);

    AmbientGroup mixed = AmbientGroup::general({{2, 1}}, {{3, {1}}});
    idx = pi_index(mixed, {3}, 2, 4);
    REQUIRE(idx.has_value());
    CHECK(idx->value == 2);

    CHECK_THROWS_AS(pi_index(AmbientGroup::integers(), {}, 4, 6), DomainError);
}

TEST_CASE("pi_index over Z is the modulus ratio for every pi") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int64_t> dist(1, 200);
    for (int i = 0; i < 200; ++i) {
        int64_t m = dist(rng);
        int64_t k = dist(rng);
        for (const std::set<int64_t>& pi : {std::set<int64_t>{}, {2}, {2, 3, 5}}) {
            auto idx = pi_index(AmbientGroup::integers(), pi, m, m * k);
            REQUIRE(idx.has_value());
            CHECK(idx->value == k);
        }
    }
}

TEST_CASE("quotient orders cross-check pi_index") {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int64_t> dist(1, 32);
    std::vector<AmbientGroup> ambients{
        AmbientGroup::integers(),
        AmbientGroup::general({{2, 2}, {3, 1}}, {}),
        AmbientGroup::general({{2, 1}}, {{3, {1, 2}}}),
        AmbientGroup::general({}, {{2, {3}}, {5, {1}}}),
    };
    for (const auto& A : ambients) {
        for (int i = 0; i < 200; ++i) {
            int64_t m = dist(rng);
            int64_t mp = m * dist(rng);
            if (mp > 1024) continue;
            auto idx = pi_index(A, {}, m, mp);
            REQUIRE(idx.has_value());
            CHECK(static_cast<int64_t>(quotient_mod(A, mp).order()) ==
                  idx->value * quotient_mod(A, m).order());
        }
    }
}

TEST_CASE("ambient validation") {
    CHECK_THROWS_AS(AmbientGroup::general({{4, 1}}, {}), DomainError);
    CHECK_THROWS_AS(AmbientGroup::general({}, {{3, {0}}}), DomainError);
    CHECK_THROWS_AS(AmbientGroup::general({}, {{3, {}}}), DomainError);
    // alpha = 0 entries are dropped, not errors
    CHECK(AmbientGroup::general({{2, 0}}, {}).alpha.empty());
}
