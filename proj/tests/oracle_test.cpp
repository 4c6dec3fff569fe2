#include <doctest.h>

#include "valz/formula_parse.hpp"
#include "valz/oracle.hpp"

using namespace valz;

namespace {

ValuationChain two_adic() { return {AmbientGroup::integers(), {}, std::vector<int64_t>{2}}; }

Congruence pos(int64_t n, int64_t a, int64_t l, uint32_t level) {
    return {n, a, l, ValueElement::fin(level), false};
}

} // namespace

TEST_CASE("brute_count examples") {
    ValuationChain c = two_adic();
    CongruenceSystem s{{pos(1, 1, 1, 1), pos(1, 3, 1, 3)}};
    CHECK(brute_count(s, c) == 1);

    s = CongruenceSystem{{pos(2, 1, 1, 2)}};
    CHECK(brute_count(s, c) == 0);

    s = CongruenceSystem{{pos(1, 0, 1, 0)}};
    CHECK(brute_count(s, c) == 1);
}

TEST_CASE("brute_count is invariant under rescale") {
    ValuationChain c = two_adic();
    // 2x ≡ 2 mod 2B_1 versus 6x ≡ 6 mod 6B_1
    CongruenceSystem a{{pos(2, 2, 2, 1), pos(1, 1, 1, 1)}};
    CongruenceSystem b{{pos(6, 6, 6, 1), pos(1, 1, 1, 1)}};
    // counts live modulo different boundary moduli; densities agree
    int64_t ma = 4 * 1, mb = 12 * 1;
    CHECK(brute_count(a, c) * (mb / ma) == brute_count(b, c));
}

TEST_CASE("brute_decide examples") {
    ValuationChain c = two_adic();
    CHECK(brute_decide(parse_formula("E x:G. v[1](x - 1) >= 2 & v[1](x) = 0"), c, 16, 6));
    CHECK(brute_decide(parse_formula("A i:I. (i < 0 | i > 4) | Ind(2,{2},1; i, S(i))"), c, 16, 6));
    CHECK_FALSE(brute_decide(parse_formula("E x:G. x = 0 & v[1](x) = 3"), c, 16, 6));
    CHECK_FALSE(brute_decide(parse_formula("E x:G. v[1](x) >= 1 & v[1](x - 1) >= 1"), c, 16, 6));
}

TEST_CASE("brute_count_quotient examples") {
    FiniteQuotient q{{{2, 2, 2}}};  // (Z/4)^2
    CHECK(brute_count_quotient(2, 0, q, 4) == 4);
    CHECK(brute_count_quotient(1, 3, q, 16) == 1);
    CHECK(brute_count_quotient(2, std::vector<int64_t>{1, 0}, q, 4) == 0);
}
