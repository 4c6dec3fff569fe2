#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valz/congruence.hpp"
#include "valz/formula_ast.hpp"

namespace valz {

/// Evaluation-time registry for the extension relations on the value sort
/// (the slot for extra monotone relations / unary predicates). Empty by
/// default.
using ExtRelation = std::function<bool(const std::vector<ValueElement>&)>;
using ExtRegistry = std::map<std::string, ExtRelation>;

struct Assignment {
    std::map<std::string, int64_t> group;
    std::map<std::string, ValueElement> value;
};

/// Truth value of a quantifier-free formula under a full assignment over
/// (Z, chain). Unassigned free variables and quantifiers are usage errors.
bool evaluate_qf(const FormulaPtr& f, const Assignment& assign, const ValuationChain& chain,
                 const ExtRegistry* ext = nullptr);

/// Capture-safe substitution of a concrete value for a free variable.
FormulaPtr substitute_group(const FormulaPtr& f, const std::string& name, int64_t value);
FormulaPtr substitute_value(const FormulaPtr& f, const std::string& name, ValueElement value);

/// One branch of the existential normal form of a conjunction of literals
/// in a single group variable x: a congruence system plus the isolated
/// point constraints contributed by equations and disequations. Dead
/// branches (failed guards, contradictory equations) are dropped.
struct NormalizedBranch {
    CongruenceSystem system;                 // finite-level literals on x
    std::optional<int64_t> candidate;        // forced point from positive equations
    std::vector<int64_t> excluded;           // points removed by disequations
};

/// Normal form of "exists x. conjunction of literals" following the
/// elimination pipeline: equations pin candidate points, level +inf atoms
/// become equations, v = -inf atoms expand over residues, scales are
/// unified, and equalities split into >= and a negated successor bound.
/// Literals not mentioning x must be closed; false ones kill the branch.
std::vector<NormalizedBranch> normalize_exists(const std::vector<FormulaPtr>& literals,
                                               const std::string& var,
                                               const ValuationChain& chain,
                                               uint32_t value_bound);

struct DecideOptions {
    std::optional<uint32_t> value_bound;  // override the periodicity threshold
    size_t max_dnf_clauses = 1 << 14;
    const ExtRegistry* ext = nullptr;
};

/// Conservative bound T for value-sort search: fin(0..T) together with the
/// infinites covers every relevant value up to the chain's periodicity.
uint32_t default_value_bound(const FormulaPtr& sentence, const ValuationChain& chain);

/// Decides a sentence over (Z, chain). Group quantifiers run through the
/// congruence engine; value quantifiers are expanded over the bounded range
/// (requires an eventually periodic chain).
bool decide(const FormulaPtr& sentence, const ValuationChain& chain, const DecideOptions& opts = {});

/// Witness for a sentence of the shape "E x:G. body" (body free of group
/// quantifiers) when the sentence is true: the smallest-|x| witness,
/// positive on ties. Unsupported shapes raise Unsupported.
std::optional<int64_t> decide_witness(const FormulaPtr& sentence, const ValuationChain& chain,
                                      const DecideOptions& opts = {});

/// Quantifier elimination for "E x. phi(x, zbar)" with phi quantifier-free,
/// concrete value parameters and symbolic group parameters zbar: returns a
/// quantifier-free formula in zbar that evaluates identically for every
/// instantiation. Divisibility side conditions are rendered as v[d](term) >= 0.
FormulaPtr eliminate_group_quantifier(const FormulaPtr& exists_formula, const ValuationChain& chain,
                                      const DecideOptions& opts = {});

/// One valuation's share of a multi-valuation query.
struct ValuationSystem {
    ValuationChain chain;
    std::vector<Congruence> members;
    std::set<int64_t> support;  // pi_v
};

/// Joint solution of per-valuation congruence systems with pairwise
/// disjoint prime supports: each system is solved on its own chain and the
/// residue classes are combined by CRT. Returns the smallest nonnegative
/// combined witness, or the plain witness rule for a single valuation.
std::optional<int64_t> multi_decide(const std::vector<ValuationSystem>& systems);

} // namespace valz
