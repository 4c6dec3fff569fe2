#include <doctest.h>

#include <random>
#include <set>

#include "valz/congruence.hpp"

using namespace valz;

namespace {

ValuationChain two_adic() { return {AmbientGroup::integers(), {}, std::vector<int64_t>{2}}; }

// Solution residues of n*x ≡ a (mod M) by enumeration.
std::set<int64_t> enumerate(int64_t n, int64_t a, int64_t M) {
    std::set<int64_t> sols;
    for (int64_t x = 0; x < M; ++x)
        if (mod_floor(n * x - a, M) == 0) sols.insert(x);
    return sols;
}

Congruence pos(int64_t n, int64_t a, int64_t l, uint32_t level) {
    return {n, a, l, ValueElement::fin(level), false};
}
Congruence neg(int64_t n, int64_t a, int64_t l, uint32_t level) {
    return {n, a, l, ValueElement::fin(level), true};
}

} // namespace

TEST_CASE("solve_single over Z") {
    AmbientGroup Z = AmbientGroup::integers();

    SolutionCount r = solve_single(4, 2, 6, Z);
    CHECK(r.solvable);
    CHECK(r.count == 2);
    CHECK(enumerate(4, 2, 6) == std::set<int64_t>{2, 5});
    CHECK(mod_floor(4 * *r.witness - 2, 6) == 0);

    r = solve_single(1, 5, 8, Z);
    CHECK(r.solvable);
    CHECK(r.count == 1);
    CHECK(*r.witness == 5);

    r = solve_single(2, 1, 4, Z);
    CHECK_FALSE(r.solvable);
    CHECK(r.count == 0);
    CHECK_FALSE(r.witness.has_value());

    CHECK_THROWS_AS(solve_single(0, 1, 4, Z), DomainError);
}

TEST_CASE("solve_single general ambient count") {
    AmbientGroup z2sq = AmbientGroup::general({{2, 2}}, {});
    SolutionCount r = solve_single(2, 0, 4, z2sq);
    CHECK(r.solvable);
    CHECK(r.count == 4);  // 2^{alpha_2 * d(2)} = 2^2
    CHECK(r.witness.has_value());
}

TEST_CASE("rescale") {
    Congruence c = pos(2, 2, 1, 1);
    Congruence r = rescale(c, 3, {2, 3});
    CHECK(r == pos(6, 6, 3, 1));
    CHECK(rescale(c, 1, {}) == c);
    CHECK_THROWS_AS(rescale(c, 5, {2, 3}), DomainError);

    // Solution sets are untouched: check on [-100, 100].
    ValuationChain chain = two_adic();
    for (int64_t x = -100; x <= 100; ++x)
        CHECK(member_satisfied(c, x, chain) == member_satisfied(r, x, chain));
}

TEST_CASE("reduce_fixed_modulus merges to one congruence") {
    ValuationChain chain = two_adic();

    // {2x ≡ 2, 3x ≡ 3} mod 8
    auto [merged, count] = reduce_fixed_modulus({pos(2, 2, 1, 3), pos(3, 3, 1, 3)}, chain);
    CHECK(count.solvable);
    CHECK(count.count == 1);
    CHECK(*count.witness == 1);
    CHECK(enumerate(merged.coeff, merged.rhs, 8) == std::set<int64_t>{1});

    // singleton is returned as itself
    auto [same, c1] = reduce_fixed_modulus({pos(1, 3, 1, 3)}, chain);
    CHECK(same.coeff == 1);
    CHECK(mod_floor(same.rhs - 3, 8) == 0);
    CHECK(c1.count == 1);

    CHECK_THROWS_AS(reduce_fixed_modulus({}, chain), UsageError);
}

TEST_CASE("reduce_fixed_modulus with the k-rescaled companion") {
    // {4x ≡ 4, 12x ≡ 12} mod 6 has gcd 4, d = 2, k = 2.
    ValuationChain six(AmbientGroup::integers(), {}, std::vector<int64_t>{6});
    auto [merged, count] = reduce_fixed_modulus({pos(4, 4, 1, 1), pos(12, 12, 1, 1)}, six);
    CHECK(count.solvable);
    CHECK(count.count == 2);
    std::set<int64_t> expected{1, 4};
    CHECK(enumerate(merged.coeff, merged.rhs, 6) == expected);
    // companion {2x ≡ 4, 6x ≡ 12} mod 6 also has two solutions
    CHECK(enumerate(2, 4, 6).size() == 2);
    CHECK(enumerate(6, 12, 6).size() == 6);

    // unsolvable pair: {x ≡ 0, x ≡ 1} mod 6
    auto [m2, c2] = reduce_fixed_modulus({pos(1, 0, 1, 1), pos(1, 1, 1, 1)}, six);
    (void)m2;
    CHECK_FALSE(c2.solvable);
}

TEST_CASE("collapse") {
    ValuationChain chain = two_adic();

    // 2x ≡ 4 mod 8 collapsed toward 2Z: k = 2, collapsed modulus 4.
    Congruence c = pos(2, 4, 1, 3);
    Congruence dropped = collapse(c, 1, 1, chain);
    CHECK(dropped.scale == 2);
    CHECK(dropped.level == ValueElement::fin(1));
    // images modulo 2 agree
    std::set<int64_t> x = enumerate(2, 4, 8), y = enumerate(2, 4, 4);
    CHECK(x == std::set<int64_t>{2, 6});
    CHECK(y == std::set<int64_t>{0, 2});
    std::set<int64_t> xi, yi;
    for (int64_t v : x) xi.insert(mod_floor(v, 2));
    for (int64_t v : y) yi.insert(mod_floor(v, 2));
    CHECK(xi == yi);
    CHECK(x.size() == y.size());

    // unit coefficient: no-op modulo any divisor level
    Congruence unit = pos(3, 1, 1, 3);
    Congruence u1 = collapse(unit, 1, 1, chain);
    CHECK(u1.scale == 1);
    CHECK(u1.level == ValueElement::fin(1));

    // side-condition failure: d = 4, ratio 2
    Congruence bad = pos(4, 0, 1, 4);
    CHECK_THROWS_AS(collapse(bad, 3, 1, chain), PreconditionError);
}

TEST_CASE("count_system examples") {
    ValuationChain chain = two_adic();

    CongruenceSystem s1{{pos(1, 1, 1, 1), pos(1, 3, 1, 3)}};
    SolutionCount r = count_system(s1, chain);
    CHECK(r.count == 1);
    CHECK(r.boundary_modulus.value == 8);
    CHECK(*r.witness == 3);

    CongruenceSystem s2{{pos(1, 1, 1, 1), neg(1, 3, 1, 3)}};
    r = count_system(s2, chain);
    CHECK(r.count == 3);  // {1, 5, 7} mod 8
    CHECK(r.boundary_modulus.value == 8);

    CongruenceSystem s3{{pos(1, 0, 1, 0)}};
    r = count_system(s3, chain);
    CHECK(r.count == 1);
    CHECK(r.boundary_modulus.value == 1);

    CHECK_THROWS_AS(count_system(CongruenceSystem{{neg(1, 3, 1, 3)}}, chain), UsageError);
}

TEST_CASE("count_system with equations") {
    ValuationChain chain = two_adic();
    // 2x = 6 pins x = 3; the congruence x ≡ 1 mod B_1 holds at 3.
    CongruenceSystem s{{Congruence{2, 6, 1, ValueElement::pos_inf(), false}, pos(1, 1, 1, 1)}};
    SolutionCount r = count_system(s, chain);
    CHECK(r.solvable);
    CHECK(r.count == 1);
    CHECK(*r.witness == 3);

    // inconsistent equation
    CongruenceSystem s2{{Congruence{2, 7, 1, ValueElement::pos_inf(), false}}};
    CHECK_FALSE(count_system(s2, chain).solvable);
}

TEST_CASE("witness selection") {
    ValuationChain chain = two_adic();

    CHECK(*witness(CongruenceSystem{{pos(1, 1, 1, 1), pos(1, 3, 1, 3)}}, chain) == 3);
    CHECK_FALSE(witness(CongruenceSystem{{pos(2, 1, 1, 2)}}, chain).has_value());

    // {x ≡ 1 mod B_1, NOT x ≡ 1 mod B_2}: odd, not 1 mod 4. The smallest
    // absolute value is -1 (x = +1 fails), before 3.
    auto w = witness(CongruenceSystem{{pos(1, 1, 1, 1), neg(1, 1, 1, 2)}}, chain);
    CHECK(*w == -1);
}

TEST_CASE("count_system across scales") {
    // Members at different scales unify by lcm before merging.
    ValuationChain chain = two_adic();
    CongruenceSystem s{{pos(1, 0, 2, 1), pos(1, 4, 3, 1)}};
    // x ≡ 0 mod 4 and x ≡ 4 mod 6: brute count modulo lcm-scale boundary 12.
    SolutionCount r = count_system(s, chain);
    CHECK(r.boundary_modulus.value == 12);
    uint64_t expected = 0;
    for (int64_t x = 0; x < 12; ++x)
        expected += (mod_floor(x, 4) == 0 && mod_floor(x - 4, 6) == 0);
    CHECK(r.count == expected);
}

TEST_CASE("random systems match enumeration") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int64_t> coeff(-12, 12), rhs(-20, 20);
    std::uniform_int_distribution<uint32_t> lvl(0, 4);
    std::uniform_int_distribution<int> members(1, 4), scale(1, 4), chain_pick(0, 2);
    const std::vector<std::vector<int64_t>> cycles{{2}, {3}, {2, 3}};
    for (int t = 0; t < 400; ++t) {
        ValuationChain chain(AmbientGroup::integers(), {}, cycles[chain_pick(rng)]);
        CongruenceSystem s;
        bool has_pos = false;
        for (int m = members(rng); m > 0; --m) {
            int64_t n = coeff(rng);
            if (n == 0) n = 1;
            Congruence c{n, rhs(rng), scale(rng), ValueElement::fin(lvl(rng)),
                         (rng() & 3) == 0};
            has_pos = has_pos || !c.negated;
            s.members.push_back(c);
        }
        if (!has_pos) s.members.front().negated = false;
        SolutionCount r = count_system(s, chain);
        int64_t M = r.boundary_modulus.value;
        uint64_t expected = 0;
        for (int64_t x = 0; x < M; ++x) {
            bool ok = true;
            for (const auto& c : s.members) ok = ok && member_satisfied(c, x, chain);
            expected += ok;
        }
        CAPTURE(t);
        CHECK(r.count == expected);
        if (r.witness)
            for (const auto& c : s.members) CHECK(member_satisfied(c, *r.witness, chain));
    }
}
