#include "valz/formula.hpp"

#include <algorithm>
#include <bit>
#include <functional>

namespace valz {

namespace {

// ---------------------------------------------------------------------------
// Evaluation

int64_t eval_group_term(const GroupTerm& t, const Assignment& assign) {
    int64_t acc = t.constant;
    for (const auto& [name, k] : t.coeffs) {
        auto it = assign.group.find(name);
        if (it == assign.group.end())
            throw UsageError("unassigned group variable '" + name + "'");
        acc = checked_add(acc, checked_mul(k, it->second));
    }
    return acc;
}

ValueElement eval_vterm(const ValueTermPtr& t, const Assignment& assign,
                        const ValuationChain& chain) {
    return std::visit(
        [&](const auto& node) -> ValueElement {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ValueTerm::Var>) {
                auto it = assign.value.find(node.name);
                if (it == assign.value.end())
                    throw UsageError("unassigned value variable '" + node.name + "'");
                return it->second;
            } else if constexpr (std::is_same_v<T, ValueTerm::Lit>) {
                return node.value;
            } else if constexpr (std::is_same_v<T, ValueTerm::Succ>) {
                return eval_vterm(node.arg, assign, chain).successor();
            } else {
                return valuate(chain, node.scale, eval_group_term(node.term, assign));
            }
        },
        t->node);
}

bool eval_cmp(ValueElement a, CmpOp op, ValueElement b) {
    switch (op) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Ge: return a >= b;
        case CmpOp::Lt: return a < b;
        default: return a > b;
    }
}

// ---------------------------------------------------------------------------
// Substitution

ValueTermPtr subst_vterm_value(const ValueTermPtr& t, const std::string& name, ValueElement val) {
    return std::visit(
        [&](const auto& node) -> ValueTermPtr {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ValueTerm::Var>) {
                return node.name == name ? ValueTerm::lit(val) : t;
            } else if constexpr (std::is_same_v<T, ValueTerm::Succ>) {
                return ValueTerm::succ(subst_vterm_value(node.arg, name, val));
            } else {
                return t;
            }
        },
        t->node);
}

ValueTermPtr subst_vterm_group(const ValueTermPtr& t, const std::string& name, int64_t val) {
    return std::visit(
        [&](const auto& node) -> ValueTermPtr {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ValueTerm::Succ>) {
                return ValueTerm::succ(subst_vterm_group(node.arg, name, val));
            } else if constexpr (std::is_same_v<T, ValueTerm::ValOf>) {
                return ValueTerm::val_of(node.scale, node.term.substituted(name, val));
            } else {
                return t;
            }
        },
        t->node);
}

FormulaPtr subst(const FormulaPtr& f, Sort sort, const std::string& name,
                 const std::function<ValueTermPtr(const ValueTermPtr&)>& onVTerm,
                 const std::function<GroupTerm(const GroupTerm&)>& onTerm) {
    return std::visit(
        [&](const auto& node) -> FormulaPtr {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Formula::TermEq>) {
                return Formula::term_eq(onTerm(node.term));
            } else if constexpr (std::is_same_v<T, Formula::Cmp>) {
                return Formula::cmp(onVTerm(node.lhs), node.op, onVTerm(node.rhs));
            } else if constexpr (std::is_same_v<T, Formula::Div>) {
                return Formula::div(node.q, node.k, node.pi, node.l, onVTerm(node.a), onVTerm(node.b));
            } else if constexpr (std::is_same_v<T, Formula::Ind>) {
                return Formula::ind(node.k, node.pi, node.l, onVTerm(node.a), onVTerm(node.b));
            } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                std::vector<ValueTermPtr> args;
                for (const auto& a : node.args) args.push_back(onVTerm(a));
                return Formula::ext(node.name, std::move(args));
            } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                return Formula::negation(subst(node.arg, sort, name, onVTerm, onTerm));
            } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                return Formula::binary(node.op, subst(node.lhs, sort, name, onVTerm, onTerm),
                                       subst(node.rhs, sort, name, onVTerm, onTerm));
            } else {
                const auto& q = std::get<Formula::Quant>(f->node);
                if (q.sort == sort && q.var == name) return f;  // shadowed
                return Formula::quant(q.kind, q.sort, q.var,
                                      subst(q.body, sort, name, onVTerm, onTerm));
            }
        },
        f->node);
}

FormulaPtr subst_value_var(const FormulaPtr& f, const std::string& name, ValueElement val) {
    return subst(
        f, Sort::Value, name,
        [&](const ValueTermPtr& t) { return subst_vterm_value(t, name, val); },
        [&](const GroupTerm& t) { return t; });
}

FormulaPtr subst_group_var(const FormulaPtr& f, const std::string& name, int64_t val) {
    return subst(
        f, Sort::Group, name,
        [&](const ValueTermPtr& t) { return subst_vterm_group(t, name, val); },
        [&](const GroupTerm& t) { return t.substituted(name, val); });
}

// ---------------------------------------------------------------------------
// NNF / DNF

struct Literal {
    FormulaPtr atom;
    bool positive;
};

void dnf_rec(const FormulaPtr& f, bool positive, std::vector<std::vector<Literal>>& clauses,
             size_t cap) {
    if (const auto* u = std::get_if<Formula::Unary>(&f->node)) {
        dnf_rec(u->arg, !positive, clauses, cap);
        return;
    }
    if (const auto* b = std::get_if<Formula::Binary>(&f->node)) {
        // Under negation: ~(A & B) = ~A | ~B, ~(A -> B) = A & ~B.
        bool conj = (b->op == Connective::And) == positive && b->op != Connective::Implies;
        if (b->op == Connective::Implies) conj = !positive;
        FormulaPtr lhs = b->lhs;
        FormulaPtr rhs = b->rhs;
        bool lpos = positive, rpos = positive;
        if (b->op == Connective::Implies) {
            // A -> B  ==  ~A | B
            lpos = !positive;
        }
        if (conj) {
            std::vector<std::vector<Literal>> left, right;
            dnf_rec(lhs, lpos, left, cap);
            dnf_rec(rhs, rpos, right, cap);
            if (left.size() * right.size() > cap)
                throw ResourceLimit("DNF clause cap exceeded");
            for (const auto& l : left)
                for (const auto& r : right) {
                    std::vector<Literal> merged = l;
                    merged.insert(merged.end(), r.begin(), r.end());
                    clauses.push_back(std::move(merged));
                }
        } else {
            dnf_rec(lhs, lpos, clauses, cap);
            dnf_rec(rhs, rpos, clauses, cap);
            if (clauses.size() > cap) throw ResourceLimit("DNF clause cap exceeded");
        }
        return;
    }
    if (std::holds_alternative<Formula::Quant>(f->node))
        throw InternalError("quantifier reached DNF conversion");
    clauses.push_back({Literal{f, positive}});
}

std::vector<std::vector<Literal>> to_dnf(const FormulaPtr& f, size_t cap) {
    std::vector<std::vector<Literal>> clauses;
    dnf_rec(f, true, clauses, cap);
    if (clauses.size() > cap) throw ResourceLimit("DNF clause cap exceeded");
    return clauses;
}

// ---------------------------------------------------------------------------
// Branch normalization (shared by decision and elimination)

// n*x ≡ rhs (mod scale*B_level); rhs symbolic in the group parameters.
struct SymCongruence {
    int64_t coeff;
    GroupTerm rhs;
    int64_t scale;
    uint32_t level;
    bool negated;
};

// n*x = rhs (n > 0 after normalization).
struct SymEquation {
    int64_t coeff;
    GroupTerm rhs;
    bool negated;
};

struct SymBranch {
    std::vector<SymCongruence> cong;
    std::vector<SymEquation> eq;
    std::vector<FormulaPtr> guards;  // x-free literals, polarity folded in
};

bool vterm_mentions(const ValueTermPtr& t, const std::string& var) {
    return std::visit(
        [&](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ValueTerm::Succ>)
                return vterm_mentions(node.arg, var);
            else if constexpr (std::is_same_v<T, ValueTerm::ValOf>)
                return node.term.coeff_of(var) != 0;
            else
                return false;
        },
        t->node);
}

bool atom_mentions(const FormulaPtr& f, const std::string& var) {
    return std::visit(
        [&](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Formula::TermEq>)
                return node.term.coeff_of(var) != 0;
            else if constexpr (std::is_same_v<T, Formula::Cmp>)
                return vterm_mentions(node.lhs, var) || vterm_mentions(node.rhs, var);
            else if constexpr (std::is_same_v<T, Formula::Div> || std::is_same_v<T, Formula::Ind>)
                return vterm_mentions(node.a, var) || vterm_mentions(node.b, var);
            else if constexpr (std::is_same_v<T, Formula::Ext>) {
                for (const auto& a : node.args)
                    if (vterm_mentions(a, var)) return true;
                return false;
            } else {
                throw InternalError("non-atom reached literal normalization");
            }
        },
        f->node);
}

// A value-term side reduced for literal processing: either a concrete
// element, or v[l](n*x - rhs) with a nonzero x coefficient. Succ wrappers
// around the x side are peeled arithmetically by the caller.
struct VSide {
    bool concrete;
    ValueElement value;   // when concrete
    int64_t scale = 1;    // v[scale](coeff*x - rhs)
    int64_t coeff = 0;
    GroupTerm rhs;
    uint32_t succs = 0;   // S-applications wrapped around the valuation
};

std::vector<ValueElement> value_range(uint32_t bound) {
    std::vector<ValueElement> range;
    range.push_back(ValueElement::neg_inf());
    for (uint32_t i = 0; i <= bound; ++i) range.push_back(ValueElement::fin(i));
    range.push_back(ValueElement::pos_inf());
    return range;
}

class BranchNormalizer {
public:
    BranchNormalizer(const std::string& var, const ValuationChain& chain, uint32_t value_bound,
                     size_t branch_cap)
        : var_(var), chain_(chain), bound_(value_bound), cap_(branch_cap) {}

    // Expands one DNF clause into normalized branches. Dead branches are
    // dropped; remaining x-free literals are kept as guards.
    std::vector<SymBranch> run(const std::vector<Literal>& clause) {
        struct Pending {
            std::vector<Literal> todo;
            SymBranch out;
        };
        std::vector<Pending> work{{std::vector<Literal>(clause.rbegin(), clause.rend()), {}}};
        std::vector<SymBranch> done;
        while (!work.empty()) {
            if (work.size() + done.size() > cap_)
                throw ResourceLimit("normalization branch cap exceeded");
            Pending cur = std::move(work.back());
            work.pop_back();
            if (cur.todo.empty()) {
                done.push_back(std::move(cur.out));
                continue;
            }
            Literal lit = cur.todo.back();
            cur.todo.pop_back();
            // step() yields the alternative continuations of this literal
            // (usually one; residue expansions and case splits fan out).
            for (auto& alt : step(lit, cur.out)) {
                Pending next = cur;
                next.out = std::move(alt.branch);
                for (auto it = alt.extra.rbegin(); it != alt.extra.rend(); ++it)
                    next.todo.push_back(*it);
                work.push_back(std::move(next));
            }
        }
        return done;
    }

private:
    struct Alt {
        SymBranch branch;
        std::vector<Literal> extra;
    };

    const std::string& var_;
    const ValuationChain& chain_;
    uint32_t bound_;
    size_t cap_;

    [[noreturn]] static void dead_branch() { throw DeadBranch{}; }
    struct DeadBranch {};

    std::vector<Alt> step(const Literal& lit, const SymBranch& base) {
        try {
            return step_inner(lit, base);
        } catch (DeadBranch&) {
            return {};
        }
    }

    std::vector<Alt> step_inner(const Literal& lit, const SymBranch& base) {
        if (!atom_mentions(lit.atom, var_)) {
            SymBranch b = base;
            b.guards.push_back(lit.positive ? lit.atom : Formula::negation(lit.atom));
            return {{std::move(b), {}}};
        }
        if (const auto* eq = std::get_if<Formula::TermEq>(&lit.atom->node)) {
            // n*x + rest = 0  <=>  n*x = -rest
            int64_t n = eq->term.coeff_of(var_);
            GroupTerm rhs = eq->term.without(var_).negated();
            if (n < 0) {
                n = -n;
                rhs = rhs.negated();
            }
            SymBranch b = base;
            b.eq.push_back({n, std::move(rhs), !lit.positive});
            return {{std::move(b), {}}};
        }
        if (const auto* cmp = std::get_if<Formula::Cmp>(&lit.atom->node))
            return cmp_literal(*cmp, lit.positive, base);
        // Div / Ind / Ext with the variable inside an argument: case-split
        // each such valuation over the bounded range; the defining literals
        // re-enter normalization and the atom itself becomes x-free.
        return case_split(lit, base);
    }

    std::vector<Alt> case_split(const Literal& lit, const SymBranch& base) {
        ValueTermPtr target = find_open_vof(lit.atom);
        if (!target) throw InternalError("case split requested without an open valuation");
        const auto& vo = std::get<ValueTerm::ValOf>(target->node);
        std::vector<Alt> alts;
        for (ValueElement ι : value_range(bound_)) {
            Alt alt{base, {}};
            alt.extra.push_back(
                {Formula::cmp(ValueTerm::val_of(vo.scale, vo.term), CmpOp::Eq, ValueTerm::lit(ι)),
                 true});
            alt.extra.push_back({replace_vof(lit.atom, *target, ι), lit.positive});
            alts.push_back(std::move(alt));
        }
        return alts;
    }

    ValueTermPtr find_open_vof_in(const ValueTermPtr& t) {
        return std::visit(
            [&](const auto& node) -> ValueTermPtr {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, ValueTerm::Succ>)
                    return find_open_vof_in(node.arg);
                else if constexpr (std::is_same_v<T, ValueTerm::ValOf>)
                    return node.term.coeff_of(var_) != 0 ? t : nullptr;
                else
                    return nullptr;
            },
            t->node);
    }

    ValueTermPtr find_open_vof(const FormulaPtr& atom) {
        ValueTermPtr found;
        auto scan = [&](const ValueTermPtr& t) {
            if (!found) found = find_open_vof_in(t);
        };
        if (const auto* c = std::get_if<Formula::Cmp>(&atom->node)) {
            scan(c->lhs);
            scan(c->rhs);
        } else if (const auto* d = std::get_if<Formula::Div>(&atom->node)) {
            scan(d->a);
            scan(d->b);
        } else if (const auto* i = std::get_if<Formula::Ind>(&atom->node)) {
            scan(i->a);
            scan(i->b);
        } else if (const auto* e = std::get_if<Formula::Ext>(&atom->node)) {
            for (const auto& a : e->args) scan(a);
        }
        return found;
    }

    ValueTermPtr replace_in_vterm(const ValueTermPtr& t, const ValueTerm& target, ValueElement ι) {
        if (&*t == &target) return ValueTerm::lit(ι);
        return std::visit(
            [&](const auto& node) -> ValueTermPtr {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, ValueTerm::Succ>)
                    return ValueTerm::succ(replace_in_vterm(node.arg, target, ι));
                else
                    return t;
            },
            t->node);
    }

    FormulaPtr replace_vof(const FormulaPtr& atom, const ValueTerm& target, ValueElement ι) {
        auto rep = [&](const ValueTermPtr& t) { return replace_in_vterm(t, target, ι); };
        if (const auto* c = std::get_if<Formula::Cmp>(&atom->node))
            return Formula::cmp(rep(c->lhs), c->op, rep(c->rhs));
        if (const auto* d = std::get_if<Formula::Div>(&atom->node))
            return Formula::div(d->q, d->k, d->pi, d->l, rep(d->a), rep(d->b));
        if (const auto* i = std::get_if<Formula::Ind>(&atom->node))
            return Formula::ind(i->k, i->pi, i->l, rep(i->a), rep(i->b));
        const auto& e = std::get<Formula::Ext>(atom->node);
        std::vector<ValueTermPtr> args;
        for (const auto& a : e.args) args.push_back(rep(a));
        return Formula::ext(e.name, std::move(args));
    }

    // Classifies one side of a comparison. Concrete sides are evaluated by
    // the chain; x-free valuations of symbolic parameters and free value
    // variables are outside the implemented elimination mode.
    VSide classify(const ValueTermPtr& t) {
        uint32_t succs = 0;
        ValueTermPtr cur = t;
        while (const auto* s = std::get_if<ValueTerm::Succ>(&cur->node)) {
            ++succs;
            cur = s->arg;
        }
        if (const auto* lit = std::get_if<ValueTerm::Lit>(&cur->node)) {
            ValueElement v = lit->value;
            for (uint32_t i = 0; i < succs; ++i) v = v.successor();
            return {true, v, 1, 0, {}, 0};
        }
        if (std::get_if<ValueTerm::Var>(&cur->node))
            throw Unsupported("free value variables require the deferred symbolic mode");
        const auto& vo = std::get<ValueTerm::ValOf>(cur->node);
        int64_t n = vo.term.coeff_of(var_);
        if (n == 0) {
            if (!vo.term.is_constant())
                throw Unsupported(
                    "valuations of symbolic group parameters on a comparison side require the "
                    "deferred symbolic mode");
            ValueElement v = valuate(chain_, vo.scale, vo.term.constant);
            for (uint32_t i = 0; i < succs; ++i) v = v.successor();
            return {true, v, 1, 0, {}, 0};
        }
        VSide side;
        side.concrete = false;
        side.scale = vo.scale;
        side.coeff = n;
        side.rhs = vo.term.without(var_).negated();
        side.succs = succs;
        return side;
    }

    std::vector<Alt> cmp_literal(const Formula::Cmp& cmp, bool positive, const SymBranch& base) {
        VSide lhs = classify(cmp.lhs);
        VSide rhs = classify(cmp.rhs);
        CmpOp op = cmp.op;
        if (lhs.concrete && rhs.concrete)
            throw InternalError("closed comparison reached literal normalization");
        if (lhs.concrete && !rhs.concrete) {
            std::swap(lhs, rhs);
            op = op == CmpOp::Le ? CmpOp::Ge
                 : op == CmpOp::Ge ? CmpOp::Le
                 : op == CmpOp::Lt ? CmpOp::Gt
                 : op == CmpOp::Gt ? CmpOp::Lt
                                   : CmpOp::Eq;
        }
        if (!lhs.concrete && !rhs.concrete) {
            // Both sides open in x: pin the left valuation to each value in
            // the bounded range and retry with a concrete side.
            std::vector<Alt> alts;
            for (ValueElement pin : value_range(bound_)) {
                Alt alt{base, {}};
                auto vof = ValueTerm::val_of(lhs.scale,
                                             GroupTerm::var(var_).scaled(lhs.coeff).minus(lhs.rhs));
                alt.extra.push_back({Formula::cmp(vof, CmpOp::Eq, ValueTerm::lit(pin)), true});
                ValueElement shifted = pin;
                for (uint32_t i = 0; i < lhs.succs; ++i) shifted = shifted.successor();
                alt.extra.push_back(
                    {Formula::cmp(ValueTerm::lit(shifted), op, cmp.rhs), positive});
                alts.push_back(std::move(alt));
            }
            return alts;
        }

        // Fold polarity; != splits into < and >.
        if (!positive) {
            switch (op) {
                case CmpOp::Ge: op = CmpOp::Lt; break;
                case CmpOp::Le: op = CmpOp::Gt; break;
                case CmpOp::Lt: op = CmpOp::Ge; break;
                case CmpOp::Gt: op = CmpOp::Le; break;
                case CmpOp::Eq: {
                    std::vector<Alt> alts;
                    for (CmpOp split : {CmpOp::Lt, CmpOp::Gt}) {
                        for (auto& alt : emit(lhs, split, rhs.value, base)) alts.push_back(std::move(alt));
                    }
                    return alts;
                }
            }
        }
        return emit(lhs, op, rhs.value, base);
    }

    // Peels S applications off the open side: S^k(v) ⋈ ι becomes v ⋈' ι'
    // exactly. The weak operators fix the infinities (S is monotone and
    // idempotent at both endpoints), so only finite bounds move. Returns
    // false when the literal collapses to a constant (*as_constant then
    // holds its truth value).
    static bool peel(CmpOp& op, ValueElement& bound, uint32_t succs, bool* as_constant) {
        for (uint32_t s = 0; s < succs; ++s) {
            if (!bound.is_fin()) break;
            uint32_t k = bound.n;
            switch (op) {
                case CmpOp::Ge:
                    // S(v) >= fin(k)  <=>  v >= fin(k-1); at k = 0 both
                    // sides exclude exactly v = -inf.
                    bound = ValueElement::fin(k == 0 ? 0 : k - 1);
                    break;
                case CmpOp::Le:
                    if (k == 0) {
                        bound = ValueElement::neg_inf();  // v <= -inf
                        s = succs;
                        break;
                    }
                    bound = ValueElement::fin(k - 1);
                    break;
                case CmpOp::Eq:
                    if (k == 0) {
                        *as_constant = false;  // S never yields fin(0)
                        return false;
                    }
                    bound = ValueElement::fin(k - 1);
                    break;
                default:
                    throw InternalError("strict comparison reached S-peeling");
            }
        }
        return true;
    }

    std::vector<Alt> emit(const VSide& side, CmpOp op, ValueElement bound, const SymBranch& base) {
        // Strict ops become weak ones against the order neighbor (the plain
        // order on I, not the successor function).
        if (op == CmpOp::Lt) {
            if (bound.is_neg_inf()) dead_branch();
            if (bound.is_pos_inf()) {
                // S^k(v) < +inf  <=>  v != +inf: the argument is nonzero.
                SymBranch b = base;
                int64_t n = side.coeff;
                GroupTerm rhs = side.rhs;
                if (n < 0) { n = -n; rhs = rhs.negated(); }
                b.eq.push_back({n, std::move(rhs), true});
                return {{std::move(b), {}}};
            }
            op = CmpOp::Le;
            bound = bound.n == 0 ? ValueElement::neg_inf() : ValueElement::fin(bound.n - 1);
        } else if (op == CmpOp::Gt) {
            if (bound.is_pos_inf()) dead_branch();
            bound = bound.is_neg_inf() ? ValueElement::fin(0) : ValueElement::fin(bound.n + 1);
            op = CmpOp::Ge;
        }

        bool constant_truth = false;
        if (!peel(op, bound, side.succs, &constant_truth)) {
            if (constant_truth) return {{base, {}}};
            dead_branch();
        }
        ValueElement ι = bound;

        int64_t n = side.coeff;
        GroupTerm rhs = side.rhs;
        if (n < 0) { n = -n; rhs = rhs.negated(); }

        SymBranch b = base;
        switch (op) {
            case CmpOp::Ge:
                if (ι.is_neg_inf()) break;  // always true
                if (ι.is_pos_inf()) {
                    b.eq.push_back({n, rhs, false});
                    break;
                }
                b.cong.push_back({n, rhs, side.scale, ι.n, false});
                break;
            case CmpOp::Le:
                if (ι.is_pos_inf()) break;  // always true
                if (ι.is_neg_inf()) return minus_inf_expansion(n, rhs, side.scale, base);
                b.cong.push_back({n, rhs, side.scale, ι.n + 1, true});
                break;
            case CmpOp::Eq:
                if (ι.is_pos_inf()) {
                    b.eq.push_back({n, rhs, false});
                    break;
                }
                if (ι.is_neg_inf()) return minus_inf_expansion(n, rhs, side.scale, base);
                b.cong.push_back({n, rhs, side.scale, ι.n, false});
                b.cong.push_back({n, rhs, side.scale, ι.n + 1, true});
                break;
            default:
                throw InternalError("unreachable comparison op");
        }
        return {{std::move(b), {}}};
    }

    // v^l(t) = -inf  <=>  t lands on a nonzero residue c modulo l.
    std::vector<Alt> minus_inf_expansion(int64_t n, const GroupTerm& rhs, int64_t scale,
                                         const SymBranch& base) {
        std::vector<Alt> alts;
        for (int64_t c = 1; c < scale; ++c) {
            SymBranch b = base;
            b.cong.push_back({n, rhs.plus(GroupTerm::lit(c)), scale, 0, false});
            alts.push_back({std::move(b), {}});
        }
        return alts;  // empty when scale == 1: unsatisfiable
    }
};

// ---------------------------------------------------------------------------
// Existence of solutions for a normalized branch

Congruence to_concrete(const SymCongruence& c) {
    if (!c.rhs.is_constant()) throw UsageError("symbolic right-hand side in a concrete context");
    return {c.coeff, c.rhs.constant, c.scale, ValueElement::fin(c.level), c.negated};
}

// Symbolic solvability of a positive fixed-scale system: the atoms that
// must hold, plus the concrete solution count when they do.
struct SymCount {
    std::vector<FormulaPtr> conds;
    uint64_t count = 0;
    uint32_t level = 0;  // boundary level of the counted system
    bool dead = false;
};

FormulaPtr divisibility_atom(int64_t d, const GroupTerm& t) {
    // d | t rendered as v[d](t) >= 0.
    return Formula::cmp(ValueTerm::val_of(d, t), CmpOp::Ge, ValueTerm::lit(ValueElement::fin(0)));
}

class SymbolicEngine {
public:
    explicit SymbolicEngine(const ValuationChain& chain) : chain_(chain) {}

    // Mirrors the concrete mixed-modulus recursion with symbolic right-hand
    // sides: merge the deepest level by the Bezout reduction, emit its
    // solvability conditions, collapse one level down, recurse.
    SymCount count_positive(std::vector<SymCongruence> members, int64_t scale) {
        SymCount out;
        if (members.empty()) {
            out.count = static_cast<uint64_t>(scale);
            return out;
        }
        uint32_t top = 0;
        for (const auto& c : members) top = std::max(top, c.level);
        out.level = top;

        std::vector<SymCongruence> group, rest;
        for (auto& c : members) (c.level == top ? group : rest).push_back(std::move(c));

        int64_t M = checked_mul(scale, chain_.modulus_value_at(top));
        std::vector<int64_t> coeffs;
        for (auto& c : group) {
            if (c.coeff < 0) {
                c.coeff = -c.coeff;
                c.rhs = c.rhs.negated();
            }
            coeffs.push_back(c.coeff);
        }
        auto [n, bez] = ext_gcd(coeffs);
        GroupTerm a;
        for (size_t r = 0; r < group.size(); ++r) a = a.plus(group[r].rhs.scaled(bez[r]));

        int64_t d = gcd64(n, M);
        int64_t k = n / d;
        if (!push_cond(out, divisibility_cond(d, a))) return out;
        for (const auto& c : group) {
            int64_t dr = c.coeff / k;
            GroupTerm t = a.scaled(dr).minus(c.rhs.scaled(d));
            if (!push_cond(out, valuation_cond(checked_mul(d, scale), t, top))) return out;
        }

        if (rest.empty()) {
            out.count = static_cast<uint64_t>(d);
            return out;
        }

        uint32_t next = 0;
        for (const auto& c : rest) next = std::max(next, c.level);

        // Collapse factors as in the concrete recursion: u retains the
        // primes of d that appear in the level ratio below their full
        // exponent, kk restores d(p) for the fully collapsible ones.
        int64_t ratio = chain_.modulus_value_at(top) / chain_.modulus_value_at(next);
        FactoredInt fd = factorize(d);
        int64_t u = 1, kk = 1;
        for (const auto& [p, e] : fd.factors) {
            int vr = 0;
            int64_t r = ratio;
            while (r % p == 0) { r /= p; ++vr; }
            if (vr >= e) {
                for (int i = 0; i < e; ++i) kk = checked_mul(kk, p);
            } else {
                for (int i = 0; i < vr; ++i) u = checked_mul(u, p);
            }
        }
        int64_t ku = checked_mul(kk, u);
        std::vector<SymCongruence> reduced;
        reduced.push_back({n, a, checked_mul(ku, scale), next, false});
        for (auto& c : rest) {
            c.coeff = checked_mul(c.coeff, ku);
            c.rhs = c.rhs.scaled(ku);
            c.scale = checked_mul(c.scale, ku);
            reduced.push_back(std::move(c));
        }
        SymCount inner = count_positive(std::move(reduced), checked_mul(ku, scale));
        if (inner.dead) {
            out.dead = true;
            return out;
        }
        for (auto& c : inner.conds) out.conds.push_back(std::move(c));
        out.count = inner.count;
        return out;
    }

private:
    const ValuationChain& chain_;

    // nullptr: trivially true. falsity(): impossible.
    FormulaPtr divisibility_cond(int64_t d, const GroupTerm& t) {
        if (d == 1) return nullptr;
        if (t.is_constant()) return t.constant % d == 0 ? nullptr : Formula::falsity();
        return divisibility_atom(d, t);
    }

    FormulaPtr valuation_cond(int64_t scale, const GroupTerm& t, uint32_t level) {
        if (t == GroupTerm{}) return nullptr;  // v(0) = +inf
        if (t.is_constant()) {
            int64_t m = checked_mul(scale, chain_.modulus_value_at(level));
            return t.constant % m == 0 ? nullptr : Formula::falsity();
        }
        return Formula::cmp(ValueTerm::val_of(scale, t), CmpOp::Ge,
                            ValueTerm::lit(ValueElement::fin(level)));
    }

    static bool push_cond(SymCount& out, FormulaPtr cond) {
        if (!cond) return true;
        if (is_falsity(cond)) {
            out.dead = true;
            return false;
        }
        out.conds.push_back(std::move(cond));
        return true;
    }
};

// Existence formula for one normalized branch with symbolic right-hand
// sides (the sentence path hits the constant special case of the same
// code and folds to a boolean).
FormulaPtr branch_existence(const SymBranch& branch, const ValuationChain& chain) {
    FormulaPtr acc = Formula::truth();
    auto add = [&](const FormulaPtr& f) {
        if (is_falsity(acc) || is_truth(f)) return;
        if (is_falsity(f)) {
            acc = Formula::falsity();
        } else if (is_truth(acc)) {
            acc = f;
        } else {
            acc = Formula::conj(acc, f);
        }
    };
    for (const auto& g : branch.guards) add(g);
    if (is_falsity(acc)) return acc;

    // Positive equations pin the candidate a0/n0; everything else is
    // checked at that point through the multiply-through identity
    // v^l(n (a0/n0) - a) = v^{n0 l}(n a0 - n0 a).
    const SymEquation* pivot = nullptr;
    for (const auto& e : branch.eq)
        if (!e.negated) {
            pivot = &e;
            break;
        }
    if (pivot) {
        if (pivot->coeff != 1) {
            if (pivot->rhs.is_constant()) {
                if (pivot->rhs.constant % pivot->coeff != 0) return Formula::falsity();
            } else {
                add(divisibility_atom(pivot->coeff, pivot->rhs));
            }
        }
        for (const auto& e : branch.eq) {
            if (&e == pivot) continue;
            GroupTerm t = pivot->rhs.scaled(e.coeff).minus(e.rhs.scaled(pivot->coeff));
            FormulaPtr atom = Formula::term_eq(t);
            if (t.is_constant()) atom = t.constant == 0 ? Formula::truth() : Formula::falsity();
            add(e.negated ? Formula::negation(atom) : atom);
            if (is_falsity(acc)) return acc;
        }
        for (const auto& c : branch.cong) {
            GroupTerm t = pivot->rhs.scaled(c.coeff).minus(c.rhs.scaled(pivot->coeff));
            int64_t scale = checked_mul(pivot->coeff, c.scale);
            FormulaPtr atom;
            if (t == GroupTerm{}) {
                atom = Formula::truth();
            } else if (t.is_constant()) {
                int64_t m = checked_mul(scale, chain.modulus_value_at(c.level));
                atom = (t.constant % m == 0) ? Formula::truth() : Formula::falsity();
            } else {
                atom = Formula::cmp(ValueTerm::val_of(scale, t), CmpOp::Ge,
                                    ValueTerm::lit(ValueElement::fin(c.level)));
            }
            add(c.negated ? Formula::negation(atom) : atom);
            if (is_falsity(acc)) return acc;
        }
        return acc;
    }

    // No pinned point: congruence-only existence. Disequations never
    // shrink a coset to nothing, so only the congruences matter.
    std::vector<SymCongruence> pos, neg;
    int64_t scale = 1;
    uint32_t boundary = 0;
    for (const auto& c : branch.cong) {
        scale = checked_lcm(scale, c.scale);
        boundary = std::max(boundary, c.level);
    }
    for (const auto& c : branch.cong) {
        SymCongruence u = c;
        int64_t t = scale / c.scale;
        u.coeff = checked_mul(u.coeff, t);
        u.rhs = u.rhs.scaled(t);
        u.scale = scale;
        (u.negated ? neg : pos).push_back(std::move(u));
    }
    for (auto& c : neg) c.negated = false;
    // Vacuous member covering all of Z at the unified scale:
    // scale*x ≡ 0 (mod scale*B_0).
    if (pos.empty()) pos.push_back({scale, GroupTerm{}, scale, 0, false});

    if (neg.size() > 16) throw ResourceLimit("inclusion-exclusion capped at 16 negated members");

    SymbolicEngine engine(chain);
    struct Term {
        std::vector<FormulaPtr> conds;
        int64_t value;  // signed, lifted to the common boundary
    };
    std::vector<Term> terms;
    std::vector<FormulaPtr> atom_list;
    std::vector<std::string> atom_keys;
    auto key_of = [&](const FormulaPtr& f) { return print_formula(f); };

    size_t subsets = size_t{1} << neg.size();
    for (size_t mask = 0; mask < subsets; ++mask) {
        std::vector<SymCongruence> sys = pos;
        for (size_t i = 0; i < neg.size(); ++i)
            if (mask & (size_t{1} << i)) sys.push_back(neg[i]);
        SymCount sc = engine.count_positive(std::move(sys), scale);
        if (sc.dead) continue;
        int64_t lift = chain.modulus_value_at(boundary) / chain.modulus_value_at(sc.level);
        int64_t value = checked_mul(static_cast<int64_t>(sc.count), lift);
        if (std::popcount(mask) % 2 == 1) value = -value;
        for (const auto& cond : sc.conds) {
            std::string key = key_of(cond);
            if (std::find(atom_keys.begin(), atom_keys.end(), key) == atom_keys.end()) {
                atom_keys.push_back(key);
                atom_list.push_back(cond);
            }
        }
        terms.push_back({sc.conds, value});
    }

    // Decision tree over the distinct condition atoms: every leaf knows the
    // inclusion-exclusion total exactly.
    if (atom_list.size() > 20) throw ResourceLimit("too many elimination conditions");
    std::function<FormulaPtr(std::map<std::string, bool>&)> build =
        [&](std::map<std::string, bool>& assign) -> FormulaPtr {
        int64_t total = 0;
        const FormulaPtr* split = nullptr;
        for (const auto& term : terms) {
            bool alive = true;
            const FormulaPtr* pending = nullptr;
            for (const auto& cond : term.conds) {
                auto it = assign.find(print_formula(cond));
                if (it == assign.end()) {
                    pending = &cond;
                } else if (!it->second) {
                    alive = false;
                    break;
                }
            }
            if (!alive) continue;
            if (pending) {
                split = pending;
                break;
            }
            total += term.value;
        }
        if (!split) return total > 0 ? Formula::truth() : Formula::falsity();
        std::string key = print_formula(*split);
        assign[key] = true;
        FormulaPtr when_true = build(assign);
        assign[key] = false;
        FormulaPtr when_false = build(assign);
        assign.erase(key);
        if (is_truth(when_true) && is_truth(when_false)) return Formula::truth();
        if (is_falsity(when_true) && is_falsity(when_false)) return Formula::falsity();
        FormulaPtr lhs = is_falsity(when_true)
                             ? Formula::falsity()
                             : (is_truth(when_true) ? *split : Formula::conj(*split, when_true));
        FormulaPtr rhs = is_falsity(when_false)
                             ? Formula::falsity()
                             : (is_truth(when_false) ? Formula::negation(*split)
                                                     : Formula::conj(Formula::negation(*split), when_false));
        if (is_falsity(lhs)) return rhs;
        if (is_falsity(rhs)) return lhs;
        return Formula::disj(lhs, rhs);
    };
    std::map<std::string, bool> assign;
    FormulaPtr existence = build(assign);
    add(existence);
    return acc;
}

} // namespace

// ---------------------------------------------------------------------------
// Public interface

FormulaPtr substitute_group(const FormulaPtr& f, const std::string& name, int64_t value) {
    return subst_group_var(f, name, value);
}

FormulaPtr substitute_value(const FormulaPtr& f, const std::string& name, ValueElement value) {
    return subst_value_var(f, name, value);
}

bool evaluate_qf(const FormulaPtr& f, const Assignment& assign, const ValuationChain& chain,
                 const ExtRegistry* ext) {
    return std::visit(
        [&](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Formula::TermEq>) {
                return eval_group_term(node.term, assign) == 0;
            } else if constexpr (std::is_same_v<T, Formula::Cmp>) {
                return eval_cmp(eval_vterm(node.lhs, assign, chain), node.op,
                                eval_vterm(node.rhs, assign, chain));
            } else if constexpr (std::is_same_v<T, Formula::Div>) {
                return div_pred(chain, node.q, node.k, node.pi, node.l,
                                eval_vterm(node.a, assign, chain), eval_vterm(node.b, assign, chain));
            } else if constexpr (std::is_same_v<T, Formula::Ind>) {
                return ind_pred(chain, node.k, node.pi, node.l, eval_vterm(node.a, assign, chain),
                                eval_vterm(node.b, assign, chain));
            } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                if (!ext || !ext->count(node.name))
                    throw UsageError("extension relation '" + node.name + "' not registered");
                std::vector<ValueElement> args;
                for (const auto& a : node.args) args.push_back(eval_vterm(a, assign, chain));
                return ext->at(node.name)(args);
            } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                return !evaluate_qf(node.arg, assign, chain, ext);
            } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                bool l = evaluate_qf(node.lhs, assign, chain, ext);
                switch (node.op) {
                    case Connective::And: return l && evaluate_qf(node.rhs, assign, chain, ext);
                    case Connective::Or: return l || evaluate_qf(node.rhs, assign, chain, ext);
                    default: return !l || evaluate_qf(node.rhs, assign, chain, ext);
                }
            } else {
                throw UsageError("evaluate_qf requires a quantifier-free formula");
            }
        },
        f->node);
}

std::vector<NormalizedBranch> normalize_exists(const std::vector<FormulaPtr>& literals,
                                               const std::string& var, const ValuationChain& chain,
                                               uint32_t value_bound) {
    std::vector<Literal> clause;
    for (const auto& lit : literals) {
        FormulaPtr atom = lit;
        bool positive = true;
        while (const auto* u = std::get_if<Formula::Unary>(&atom->node)) {
            atom = u->arg;
            positive = !positive;
        }
        clause.push_back({atom, positive});
    }
    BranchNormalizer norm(var, chain, value_bound, 1 << 16);
    std::vector<NormalizedBranch> out;
    for (const auto& sym : norm.run(clause)) {
        // Closed guards and contradictory equations kill the branch.
        bool alive = true;
        for (const auto& g : sym.guards)
            if (!evaluate_qf(g, {}, chain)) {
                alive = false;
                break;
            }
        if (!alive) continue;
        NormalizedBranch nb;
        for (const auto& e : sym.eq) {
            if (!e.rhs.is_constant())
                throw UsageError("normalize_exists requires concrete right-hand sides");
            if (e.negated) {
                if (e.rhs.constant % e.coeff == 0) nb.excluded.push_back(e.rhs.constant / e.coeff);
                continue;
            }
            if (e.rhs.constant % e.coeff != 0) { alive = false; break; }
            int64_t x = e.rhs.constant / e.coeff;
            if (nb.candidate && *nb.candidate != x) { alive = false; break; }
            nb.candidate = x;
        }
        if (!alive) continue;
        for (const auto& c : sym.cong) nb.system.members.push_back(to_concrete(c));
        out.push_back(std::move(nb));
    }
    return out;
}

namespace {

// Existence check for one concrete normalized branch.
bool branch_nonempty(const NormalizedBranch& b, const ValuationChain& chain) {
    if (b.candidate) {
        for (const auto& m : b.system.members)
            if (!member_satisfied(m, *b.candidate, chain)) return false;
        for (int64_t x : b.excluded)
            if (x == *b.candidate) return false;
        return true;
    }
    CongruenceSystem sys = b.system;
    if (sys.members.empty() ||
        std::all_of(sys.members.begin(), sys.members.end(),
                    [](const Congruence& c) { return c.negated; }))
        sys.members.push_back({1, 0, 1, ValueElement::fin(0), false});
    // Excluded points cannot empty an infinite coset.
    return count_system(sys, chain).solvable;
}

std::optional<int64_t> branch_witness(const NormalizedBranch& b, const ValuationChain& chain) {
    if (b.candidate) return branch_nonempty(b, chain) ? b.candidate : std::nullopt;
    CongruenceSystem sys = b.system;
    for (int64_t x : b.excluded)
        sys.members.push_back({1, x, 1, ValueElement::pos_inf(), true});
    if (std::all_of(sys.members.begin(), sys.members.end(),
                    [](const Congruence& c) { return c.negated; }))
        sys.members.push_back({1, 0, 1, ValueElement::fin(0), false});
    return witness(sys, chain);
}

// Preference order for witnesses: smaller |x| first, positive on ties.
bool witness_better(int64_t a, int64_t b) {
    int64_t aa = a < 0 ? -a : a, ab = b < 0 ? -b : b;
    if (aa != ab) return aa < ab;
    return a > b;
}

class Eliminator {
public:
    Eliminator(const ValuationChain& chain, uint32_t value_bound, size_t max_dnf,
               const ExtRegistry* ext = nullptr)
        : chain_(chain), bound_(value_bound), max_dnf_(max_dnf), ext_(ext) {}

    // Removes every quantifier: value quantifiers by bounded expansion on
    // the way down, group quantifiers by symbolic elimination on the way up.
    FormulaPtr eliminate(const FormulaPtr& f) {
        return std::visit(
            [&](const auto& node) -> FormulaPtr {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Formula::Unary>) {
                    FormulaPtr a = eliminate(node.arg);
                    if (is_truth(a)) return Formula::falsity();
                    if (is_falsity(a)) return Formula::truth();
                    return Formula::negation(a);
                } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                    FormulaPtr l = eliminate(node.lhs);
                    // Fold eagerly so closed subproblems stay small.
                    if (node.op == Connective::And && is_falsity(l)) return l;
                    if (node.op == Connective::Or && is_truth(l)) return l;
                    FormulaPtr r = eliminate(node.rhs);
                    switch (node.op) {
                        case Connective::And:
                            if (is_truth(l)) return r;
                            if (is_falsity(r)) return r;
                            if (is_truth(r)) return l;
                            return Formula::conj(l, r);
                        case Connective::Or:
                            if (is_falsity(l)) return r;
                            if (is_truth(r)) return r;
                            if (is_falsity(r)) return l;
                            return Formula::disj(l, r);
                        default:
                            if (is_falsity(l) || is_truth(r)) return Formula::truth();
                            if (is_truth(l)) return r;
                            if (is_falsity(r)) return Formula::negation(l);
                            return Formula::binary(Connective::Implies, l, r);
                    }
                } else if constexpr (std::is_same_v<T, Formula::Quant>) {
                    if (node.sort == Sort::Value) return value_quant(node);
                    if (node.kind == QuantKind::Exists) return exists_group(node.var, eliminate(node.body));
                    FormulaPtr inner =
                        exists_group(node.var, eliminate(Formula::negation(node.body)));
                    if (is_truth(inner)) return Formula::falsity();
                    if (is_falsity(inner)) return Formula::truth();
                    return Formula::negation(inner);
                } else {
                    // Fold closed atoms so quantifier expansions stay small.
                    FreeVars fv = free_vars(f);
                    if (fv.group.empty() && fv.value.empty()) {
                        try {
                            return evaluate_qf(f, {}, chain_, ext_) ? Formula::truth()
                                                                    : Formula::falsity();
                        } catch (const DepthExceeded&) {
                        } catch (const UsageError&) {
                        }
                    }
                    return f;
                }
            },
            f->node);
    }

    // Existence over the group sort from a quantifier-free body.
    FormulaPtr exists_group(const std::string& var, const FormulaPtr& body) {
        auto clauses = to_dnf(body, max_dnf_);
        BranchNormalizer norm(var, chain_, bound_, max_dnf_ * 4);
        FormulaPtr acc = Formula::falsity();
        for (const auto& clause : clauses) {
            for (const auto& branch : norm.run(clause)) {
                FormulaPtr e = symbolic_or_concrete(branch);
                if (is_truth(e)) return e;
                if (is_falsity(e)) continue;
                acc = is_falsity(acc) ? e : Formula::disj(acc, e);
            }
        }
        return acc;
    }

private:
    const ValuationChain& chain_;
    uint32_t bound_;
    size_t max_dnf_;
    const ExtRegistry* ext_;

    FormulaPtr value_quant(const Formula::Quant& q) {
        if (!chain_.eventually_periodic())
            throw Unsupported("value-sort quantifiers require an eventually periodic chain");
        bool exists = q.kind == QuantKind::Exists;
        FormulaPtr acc = exists ? Formula::falsity() : Formula::truth();
        for (ValueElement ι : value_range(bound_)) {
            FormulaPtr inst = eliminate(subst_value_var(q.body, q.var, ι));
            if (exists) {
                if (is_truth(inst)) return inst;
                if (!is_falsity(inst)) acc = is_falsity(acc) ? inst : Formula::disj(acc, inst);
            } else {
                if (is_falsity(inst)) return inst;
                if (!is_truth(inst)) acc = is_truth(acc) ? inst : Formula::conj(acc, inst);
            }
        }
        return acc;
    }

    FormulaPtr symbolic_or_concrete(const SymBranch& branch) {
        bool concrete = true;
        for (const auto& c : branch.cong) concrete = concrete && c.rhs.is_constant();
        for (const auto& e : branch.eq) concrete = concrete && e.rhs.is_constant();
        for (const auto& g : branch.guards) {
            FreeVars fv = free_vars(g);
            concrete = concrete && fv.group.empty() && fv.value.empty();
        }
        if (!concrete) return branch_existence(branch, chain_);

        // Fully closed branch: route through the congruence engine.
        for (const auto& g : branch.guards)
            if (!evaluate_qf(g, {}, chain_, ext_)) return Formula::falsity();
        NormalizedBranch nb;
        for (const auto& e : branch.eq) {
            if (e.negated) {
                if (e.rhs.constant % e.coeff == 0) nb.excluded.push_back(e.rhs.constant / e.coeff);
                continue;
            }
            if (e.rhs.constant % e.coeff != 0) return Formula::falsity();
            int64_t x = e.rhs.constant / e.coeff;
            if (nb.candidate && *nb.candidate != x) return Formula::falsity();
            nb.candidate = x;
        }
        for (const auto& c : branch.cong) nb.system.members.push_back(to_concrete(c));
        return branch_nonempty(nb, chain_) ? Formula::truth() : Formula::falsity();
    }
};

uint32_t chain_depth_cap(const ValuationChain& chain) {
    // Deepest level whose modulus stays comfortably inside 64 bits.
    int64_t n = 1;
    uint32_t i = 0;
    while (chain.has_level(i + 1)) {
        __int128 next = static_cast<__int128>(n) * chain.multiplier_at(i + 1);
        if (next > (int64_t{1} << 45)) break;
        n = static_cast<int64_t>(next);
        ++i;
        if (i >= 512) break;
    }
    return i;
}

} // namespace

uint32_t default_value_bound(const FormulaPtr& sentence, const ValuationChain& chain) {
    uint64_t max_const = 0, succs = 0, div_k = 0, ind_log = 0, const_val = 0;
    std::function<void(const ValueTermPtr&)> walk_vterm = [&](const ValueTermPtr& t) {
        if (const auto* l = std::get_if<ValueTerm::Lit>(&t->node)) {
            if (l->value.is_fin()) max_const = std::max<uint64_t>(max_const, l->value.n);
        } else if (const auto* s = std::get_if<ValueTerm::Succ>(&t->node)) {
            ++succs;
            walk_vterm(s->arg);
        } else if (const auto* vo = std::get_if<ValueTerm::ValOf>(&t->node)) {
            // Constants inside valuations shift where the interesting
            // levels live; include their own valuations in the bound.
            if (chain.eventually_periodic()) {
                for (int64_t c : {vo->term.constant, vo->scale}) {
                    if (c == 0) continue;
                    ValueElement v = valuate(chain, 1, c);
                    if (v.is_fin()) const_val = std::max<uint64_t>(const_val, v.n);
                }
            }
        }
    };
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& f) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Formula::Cmp>) {
                    walk_vterm(node.lhs);
                    walk_vterm(node.rhs);
                } else if constexpr (std::is_same_v<T, Formula::Div>) {
                    div_k = std::max<uint64_t>(div_k, node.k);
                    walk_vterm(node.a);
                    walk_vterm(node.b);
                } else if constexpr (std::is_same_v<T, Formula::Ind>) {
                    ind_log = std::max<uint64_t>(ind_log, std::bit_width(node.k));
                    walk_vterm(node.a);
                    walk_vterm(node.b);
                } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                    for (const auto& a : node.args) walk_vterm(a);
                } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                    walk(node.arg);
                } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                    walk(node.lhs);
                    walk(node.rhs);
                } else if constexpr (std::is_same_v<T, Formula::Quant>) {
                    walk(node.body);
                }
            },
            f->node);
    };
    walk(sentence);

    uint64_t prefix = chain.prefix().size();
    uint64_t cycle = chain.cycle() ? chain.cycle()->size() : 1;
    uint64_t t = prefix + cycle * (1 + max_const + div_k + ind_log + succs + const_val + 2);
    return static_cast<uint32_t>(std::min<uint64_t>(t, chain_depth_cap(chain)));
}

bool decide(const FormulaPtr& sentence, const ValuationChain& chain, const DecideOptions& opts) {
    FreeVars fv = free_vars(sentence);
    if (!fv.group.empty() || !fv.value.empty())
        throw UsageError("decide requires a sentence without free variables");
    if (!chain.ambient().is_integers) throw Unsupported("decide runs over ambient Z");
    uint32_t bound = opts.value_bound ? *opts.value_bound : default_value_bound(sentence, chain);
    Eliminator elim(chain, bound, opts.max_dnf_clauses, opts.ext);
    FormulaPtr result = elim.eliminate(sentence);
    if (!is_quantifier_free(result)) throw InternalError("elimination left a quantifier behind");
    return evaluate_qf(result, {}, chain, opts.ext);
}

std::optional<int64_t> decide_witness(const FormulaPtr& sentence, const ValuationChain& chain,
                                      const DecideOptions& opts) {
    const auto* q = std::get_if<Formula::Quant>(&sentence->node);
    if (!q || q->kind != QuantKind::Exists || q->sort != Sort::Group)
        throw Unsupported("witness extraction needs a sentence of the shape E x:G. ...");
    uint32_t bound = opts.value_bound ? *opts.value_bound : default_value_bound(sentence, chain);
    Eliminator elim(chain, bound, opts.max_dnf_clauses, opts.ext);
    FormulaPtr body = elim.eliminate(q->body);
    FreeVars fv = free_vars(body);
    if (!fv.value.empty() || fv.group.size() > 1)
        throw Unsupported("witness extraction needs a single-variable body");

    std::optional<int64_t> best;
    for (const auto& clause : to_dnf(body, opts.max_dnf_clauses)) {
        std::vector<FormulaPtr> literals;
        for (const auto& lit : clause)
            literals.push_back(lit.positive ? lit.atom : Formula::negation(lit.atom));
        for (const auto& branch : normalize_exists(literals, q->var, chain, bound)) {
            auto w = branch_witness(branch, chain);
            if (w && (!best || witness_better(*w, *best))) best = w;
        }
    }
    return best;
}

FormulaPtr eliminate_group_quantifier(const FormulaPtr& exists_formula, const ValuationChain& chain,
                                      const DecideOptions& opts) {
    const auto* q = std::get_if<Formula::Quant>(&exists_formula->node);
    if (!q || q->kind != QuantKind::Exists || q->sort != Sort::Group)
        throw UsageError("eliminate_group_quantifier expects E x:G. phi");
    if (!is_quantifier_free(q->body))
        throw UsageError("eliminate_group_quantifier expects a quantifier-free body");
    FreeVars fv = free_vars(q->body);
    if (!fv.value.empty())
        throw Unsupported("symbolic value parameters require the deferred symbolic mode");
    if (!chain.ambient().is_integers)
        throw Unsupported("eliminate_group_quantifier runs over ambient Z");

    uint32_t bound = opts.value_bound ? *opts.value_bound : default_value_bound(exists_formula, chain);
    Eliminator elim(chain, bound, opts.max_dnf_clauses, opts.ext);
    FormulaPtr out = elim.exists_group(q->var, q->body);
    if (!is_quantifier_free(out)) throw InternalError("elimination left a quantifier behind");
    return out;
}

std::optional<int64_t> multi_decide(const std::vector<ValuationSystem>& systems) {
    if (systems.empty()) throw UsageError("multi_decide requires at least one valuation");
    for (size_t i = 0; i < systems.size(); ++i) {
        if (!systems[i].chain.ambient().is_integers)
            throw Unsupported("multi_decide runs over ambient Z");
        for (size_t j = i + 1; j < systems.size(); ++j)
            for (int64_t p : systems[i].support)
                if (systems[j].support.count(p))
                    throw DomainError("prime supports must be pairwise disjoint");
        auto check = [&](int64_t m) {
            if (!is_pi_number(m, systems[i].support))
                throw DomainError("chain multipliers must be supported by pi_v");
        };
        for (int64_t m : systems[i].chain.prefix()) check(m);
        if (systems[i].chain.cycle())
            for (int64_t m : *systems[i].chain.cycle()) check(m);
    }

    if (systems.size() == 1)
        return witness(CongruenceSystem{systems[0].members}, systems[0].chain);

    // Global candidate points from positive equations, if any.
    std::optional<int64_t> candidate;
    bool have_equation = false;
    for (const auto& s : systems)
        for (const auto& c : s.members)
            if (c.is_equation() && !c.negated) {
                have_equation = true;
                int64_t n = c.coeff < 0 ? -c.coeff : c.coeff;
                int64_t a = c.coeff < 0 ? -c.rhs : c.rhs;
                if (a % n != 0) return std::nullopt;
                int64_t x = a / n;
                if (candidate && *candidate != x) return std::nullopt;
                candidate = x;
            }
    auto satisfies_all = [&](int64_t x) {
        for (const auto& s : systems)
            for (const auto& c : s.members)
                if (!member_satisfied(c, x, s.chain)) return false;
        return true;
    };
    if (have_equation) return satisfies_all(*candidate) ? candidate : std::nullopt;

    // Residue classes per valuation, CRT-combined across valuations.
    struct ClassSet {
        int64_t modulus;
        std::vector<int64_t> residues;
    };
    std::vector<ClassSet> classes;
    size_t combinations = 1;
    size_t excluded_points = 0;
    for (const auto& s : systems) {
        int64_t scale = 1;
        uint32_t boundary = 0;
        for (const auto& c : s.members) {
            if (c.is_equation()) {
                ++excluded_points;  // negated equation: point exclusion
                continue;
            }
            scale = checked_lcm(scale, c.scale);
            boundary = std::max(boundary, c.level.n);
        }
        ClassSet cs{checked_mul(scale, s.chain.modulus_value_at(boundary)), {}};
        for (int64_t r = 0; r < cs.modulus; ++r) {
            bool ok = true;
            for (const auto& c : s.members) {
                if (c.is_equation()) continue;
                if (!member_satisfied(c, r, s.chain)) {
                    ok = false;
                    break;
                }
            }
            if (ok) cs.residues.push_back(r);
        }
        if (cs.residues.empty()) return std::nullopt;
        combinations *= cs.residues.size();
        if (combinations > (size_t{1} << 20)) throw ResourceLimit("too many class combinations");
        classes.push_back(std::move(cs));
    }

    // Engine-side cross-check: the per-valuation class count must match the
    // counting recursion whenever the system fits its contract.
    for (size_t i = 0; i < systems.size(); ++i) {
        bool has_positive = false;
        for (const auto& c : systems[i].members)
            if (!c.negated && !c.is_equation()) has_positive = true;
        if (!has_positive) continue;
        SolutionCount sc = count_system(CongruenceSystem{systems[i].members}, systems[i].chain);
        if (sc.count != classes[i].residues.size())
            throw InternalError("count_system disagrees with residue enumeration");
    }

    std::vector<std::pair<int64_t, int64_t>> merged{{0, 1}};  // (residue, modulus)
    for (const auto& cs : classes) {
        std::vector<std::pair<int64_t, int64_t>> next;
        for (const auto& [r0, m0] : merged) {
            for (int64_t r : cs.residues) {
                int64_t g = gcd64(m0, cs.modulus);
                if (mod_floor(r - r0, g) != 0) continue;
                int64_t lcm = checked_lcm(m0, cs.modulus);
                int64_t step = cs.modulus / g;
                int64_t x = r0;
                if (step > 1) {
                    auto [gg, cf] = ext_gcd({m0 / g, step});
                    (void)gg;
                    int64_t t = mod_floor(
                        checked_mul(mod_floor((r - r0) / g, step), mod_floor(cf[0], step)), step);
                    x = mod_floor(checked_add(r0, checked_mul(m0, t)), lcm);
                }
                next.push_back({x, lcm});
            }
        }
        merged = std::move(next);
        if (merged.empty()) return std::nullopt;
    }

    // Smallest nonnegative combined witness; negated-equation exclusions
    // bump within the class.
    std::optional<int64_t> best;
    for (const auto& [r, m] : merged) {
        for (int64_t j = 0; j <= static_cast<int64_t>(excluded_points); ++j) {
            int64_t x = checked_add(r, checked_mul(j, m));
            if (satisfies_all(x)) {
                if (!best || x < *best) best = x;
                break;
            }
        }
    }
    if (best && !satisfies_all(*best)) throw InternalError("multi_decide witness failed verification");
    return best;
}

} // namespace valz
