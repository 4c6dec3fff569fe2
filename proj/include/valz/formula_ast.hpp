#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "valz/chain.hpp"

namespace valz {

/// Linear combination sum(k_v * x_v) + c over group variables, kept
/// canonical: variables sorted by name, zero coefficients dropped.
struct GroupTerm {
    std::map<std::string, int64_t> coeffs;
    int64_t constant = 0;

    static GroupTerm var(const std::string& name) {
        GroupTerm t;
        t.coeffs[name] = 1;
        return t;
    }
    static GroupTerm lit(int64_t c) {
        GroupTerm t;
        t.constant = c;
        return t;
    }

    bool is_constant() const { return coeffs.empty(); }
    GroupTerm plus(const GroupTerm& o) const;
    GroupTerm minus(const GroupTerm& o) const;
    GroupTerm scaled(int64_t k) const;
    GroupTerm negated() const { return scaled(-1); }
    // Substitute an integer for a variable.
    GroupTerm substituted(const std::string& name, int64_t value) const;
    int64_t coeff_of(const std::string& name) const {
        auto it = coeffs.find(name);
        return it == coeffs.end() ? 0 : it->second;
    }
    // The term with the named variable removed (its coefficient dropped).
    GroupTerm without(const std::string& name) const;

    bool operator==(const GroupTerm&) const = default;
    auto operator<=>(const GroupTerm&) const = default;
};

struct ValueTerm;
using ValueTermPtr = std::shared_ptr<const ValueTerm>;

/// Value-sort term: variable, literal from I, successor application, or a
/// valuation v[l](group term).
struct ValueTerm {
    struct Var {
        std::string name;
        bool operator==(const Var&) const = default;
    };
    struct Lit {
        ValueElement value;
        bool operator==(const Lit&) const = default;
    };
    struct Succ {
        ValueTermPtr arg;
    };
    struct ValOf {
        int64_t scale;  // l >= 1
        GroupTerm term;
    };
    std::variant<Var, Lit, Succ, ValOf> node;

    static ValueTermPtr var(std::string name) {
        return std::make_shared<ValueTerm>(ValueTerm{Var{std::move(name)}});
    }
    static ValueTermPtr lit(ValueElement v) {
        return std::make_shared<ValueTerm>(ValueTerm{Lit{v}});
    }
    static ValueTermPtr succ(ValueTermPtr arg) {
        return std::make_shared<ValueTerm>(ValueTerm{Succ{std::move(arg)}});
    }
    static ValueTermPtr val_of(int64_t scale, GroupTerm term) {
        return std::make_shared<ValueTerm>(ValueTerm{ValOf{scale, std::move(term)}});
    }
};

enum class CmpOp { Eq, Le, Ge, Lt, Gt };

enum class Connective { Not, And, Or, Implies };
enum class QuantKind { Exists, Forall };
enum class Sort { Group, Value };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Two-sorted formula AST over the atoms
///   term = 0, vterm CMP vterm, Div(q,k,pi,l; a,b), Ind(k,pi,l; a,b)
/// plus an extension slot for user-registered value-sort relations,
/// closed under ~ & | -> and quantifiers over both sorts.
struct Formula {
    struct TermEq {
        GroupTerm term;  // term = 0
    };
    struct Cmp {
        ValueTermPtr lhs;
        CmpOp op;
        ValueTermPtr rhs;
    };
    struct Div {
        int64_t q;
        uint32_t k;
        std::set<int64_t> pi;
        int64_t l;
        ValueTermPtr a, b;
    };
    struct Ind {
        uint64_t k;
        std::set<int64_t> pi;
        int64_t l;
        ValueTermPtr a, b;
    };
    // Extension point: a named decidable relation on the value sort,
    // resolved through an evaluation-time registry. None ship by default.
    struct Ext {
        std::string name;
        std::vector<ValueTermPtr> args;
    };
    struct Unary {
        Connective op;  // Not
        FormulaPtr arg;
    };
    struct Binary {
        Connective op;  // And / Or / Implies
        FormulaPtr lhs, rhs;
    };
    struct Quant {
        QuantKind kind;
        Sort sort;
        std::string var;
        FormulaPtr body;
    };

    std::variant<TermEq, Cmp, Div, Ind, Ext, Unary, Binary, Quant> node;

    static FormulaPtr term_eq(GroupTerm t) {
        return std::make_shared<Formula>(Formula{TermEq{std::move(t)}});
    }
    static FormulaPtr cmp(ValueTermPtr l, CmpOp op, ValueTermPtr r) {
        return std::make_shared<Formula>(Formula{Cmp{std::move(l), op, std::move(r)}});
    }
    static FormulaPtr div(int64_t q, uint32_t k, std::set<int64_t> pi, int64_t l, ValueTermPtr a,
                          ValueTermPtr b) {
        return std::make_shared<Formula>(Formula{Div{q, k, std::move(pi), l, std::move(a), std::move(b)}});
    }
    static FormulaPtr ind(uint64_t k, std::set<int64_t> pi, int64_t l, ValueTermPtr a, ValueTermPtr b) {
        return std::make_shared<Formula>(Formula{Ind{k, std::move(pi), l, std::move(a), std::move(b)}});
    }
    static FormulaPtr ext(std::string name, std::vector<ValueTermPtr> args) {
        return std::make_shared<Formula>(Formula{Ext{std::move(name), std::move(args)}});
    }
    static FormulaPtr negation(FormulaPtr f) {
        return std::make_shared<Formula>(Formula{Unary{Connective::Not, std::move(f)}});
    }
    static FormulaPtr binary(Connective op, FormulaPtr l, FormulaPtr r) {
        return std::make_shared<Formula>(Formula{Binary{op, std::move(l), std::move(r)}});
    }
    static FormulaPtr conj(FormulaPtr l, FormulaPtr r) { return binary(Connective::And, l, r); }
    static FormulaPtr disj(FormulaPtr l, FormulaPtr r) { return binary(Connective::Or, l, r); }
    static FormulaPtr quant(QuantKind k, Sort s, std::string var, FormulaPtr body) {
        return std::make_shared<Formula>(Formula{Quant{k, s, std::move(var), std::move(body)}});
    }

    // 0 = 0 and its negation, used as boolean constants (both are grammar
    // forms, so printing stays round-trippable).
    static FormulaPtr truth() { return term_eq(GroupTerm{}); }
    static FormulaPtr falsity() { return negation(truth()); }
};

bool is_truth(const FormulaPtr& f);
bool is_falsity(const FormulaPtr& f);

/// Free variables by sort.
struct FreeVars {
    std::set<std::string> group;
    std::set<std::string> value;
};
FreeVars free_vars(const FormulaPtr& f);

bool is_quantifier_free(const FormulaPtr& f);

/// Structural equality (terms compared canonically).
bool ast_equal(const FormulaPtr& a, const FormulaPtr& b);
bool vterm_equal(const ValueTermPtr& a, const ValueTermPtr& b);

std::string print_term(const GroupTerm& t);
std::string print_vterm(const ValueTermPtr& t);
std::string print_formula(const FormulaPtr& f);

} // namespace valz
