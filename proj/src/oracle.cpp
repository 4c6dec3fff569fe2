#include "valz/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace valz {

namespace {

// Membership via the valuation itself: v^l(n*x - a) >= level, negation
// flips. This is a different route than the engine's divisibility test.
bool oracle_member(const Congruence& c, int64_t x, const ValuationChain& chain) {
    int64_t t = checked_add(checked_mul(c.coeff, x), -c.rhs);
    bool holds = valuate(chain, c.scale, t) >= c.level;
    return c.negated ? !holds : holds;
}

// Boundary modulus: unified scale (lcm) times the deepest finite level.
int64_t system_modulus(const CongruenceSystem& system, const ValuationChain& chain) {
    int64_t scale = 1;
    uint32_t level = 0;
    for (const auto& c : system.members) {
        if (!c.level.is_fin()) continue;
        scale = checked_lcm(scale, c.scale);
        level = std::max(level, c.level.n);
    }
    return checked_mul(scale, chain.modulus_value_at(level));
}

} // namespace

uint64_t brute_count(const CongruenceSystem& system, const ValuationChain& chain) {
    int64_t M = system_modulus(system, chain);
    if (M > (int64_t{1} << 24)) throw ResourceLimit("brute_count modulus beyond 2^24");
    uint64_t count = 0;
    for (int64_t x = 0; x < M; ++x) {
        bool ok = true;
        for (const auto& c : system.members)
            if (!oracle_member(c, x, chain)) {
                ok = false;
                break;
            }
        count += ok;
    }
    return count;
}

namespace {

struct Env {
    std::map<std::string, int64_t> group;
    std::map<std::string, ValueElement> value;
};

class BruteDecider {
public:
    BruteDecider(const ValuationChain& chain, int64_t group_bound, uint32_t value_bound)
        : chain_(chain), group_bound_(group_bound), value_bound_(value_bound) {}

    bool run(const FormulaPtr& sentence) {
        global_modulus_ = sentence_modulus(sentence);
        Env env;
        return eval(sentence, env);
    }

private:
    const ValuationChain& chain_;
    int64_t group_bound_;
    uint32_t value_bound_;
    int64_t global_modulus_ = 1;
    uint64_t evaluations_ = 0;

    void tick() {
        if (++evaluations_ > 50'000'000) throw ResourceLimit("brute_decide evaluation cap");
    }

    // lcm of the moduli l*n_i over every valuation atom; where the level is
    // not a literal the bounded value range caps it.
    int64_t sentence_modulus(const FormulaPtr& f) {
        int64_t m = 1;
        uint32_t depth_cap = 0;
        {
            int64_t n = 1;
            while (chain_.has_level(depth_cap + 1)) {
                __int128 next = static_cast<__int128>(n) * chain_.multiplier_at(depth_cap + 1);
                if (next > (int64_t{1} << 24)) break;
                n = static_cast<int64_t>(next);
                ++depth_cap;
                if (depth_cap > 128) break;
            }
        }
        uint32_t level_cap = std::min(value_bound_ + 1, depth_cap);

        std::function<uint32_t(const ValueTermPtr&)> literal_level = [&](const ValueTermPtr& t) {
            if (const auto* l = std::get_if<ValueTerm::Lit>(&t->node))
                return l->value.is_fin() ? l->value.n + 1 : uint32_t{0};
            if (const auto* s = std::get_if<ValueTerm::Succ>(&t->node))
                return literal_level(s->arg);
            return level_cap;
        };
        std::function<void(const ValueTermPtr&, uint32_t)> scan_vterm =
            [&](const ValueTermPtr& t, uint32_t level) {
                if (const auto* s = std::get_if<ValueTerm::Succ>(&t->node)) {
                    scan_vterm(s->arg, level);
                } else if (const auto* vo = std::get_if<ValueTerm::ValOf>(&t->node)) {
                    uint32_t lev = std::min(level, depth_cap);
                    m = checked_lcm(m, checked_mul(vo->scale, chain_.modulus_value_at(lev)));
                }
            };
        std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
            std::visit(
                [&](const auto& node) {
                    using T = std::decay_t<decltype(node)>;
                    if constexpr (std::is_same_v<T, Formula::Cmp>) {
                        scan_vterm(node.lhs, literal_level(node.rhs));
                        scan_vterm(node.rhs, literal_level(node.lhs));
                    } else if constexpr (std::is_same_v<T, Formula::Div> ||
                                         std::is_same_v<T, Formula::Ind>) {
                        scan_vterm(node.a, level_cap);
                        scan_vterm(node.b, level_cap);
                    } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                        for (const auto& a : node.args) scan_vterm(a, level_cap);
                    } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                        walk(node.arg);
                    } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                        walk(node.lhs);
                        walk(node.rhs);
                    } else if constexpr (std::is_same_v<T, Formula::Quant>) {
                        walk(node.body);
                    }
                },
                g->node);
        };
        walk(f);
        if (m > (int64_t{1} << 24)) throw ResourceLimit("brute_decide modulus beyond 2^24");
        return m;
    }

    int64_t eval_term(const GroupTerm& t, const Env& env) {
        int64_t acc = t.constant;
        for (const auto& [name, k] : t.coeffs) {
            auto it = env.group.find(name);
            if (it == env.group.end()) throw UsageError("unbound group variable " + name);
            acc = checked_add(acc, checked_mul(k, it->second));
        }
        return acc;
    }

    ValueElement eval_vterm(const ValueTermPtr& t, const Env& env) {
        if (const auto* v = std::get_if<ValueTerm::Var>(&t->node)) {
            auto it = env.value.find(v->name);
            if (it == env.value.end()) throw UsageError("unbound value variable " + v->name);
            return it->second;
        }
        if (const auto* l = std::get_if<ValueTerm::Lit>(&t->node)) return l->value;
        if (const auto* s = std::get_if<ValueTerm::Succ>(&t->node))
            return eval_vterm(s->arg, env).successor();
        const auto& vo = std::get<ValueTerm::ValOf>(t->node);
        return valuate(chain_, vo.scale, eval_term(vo.term, env));
    }

    // Candidate points for a group variable: zeros of the linear terms it
    // occurs in, where the remaining variables are already bound.
    void collect_candidates(const FormulaPtr& f, const std::string& var, const Env& env,
                            std::vector<int64_t>& out, size_t& equation_atoms) {
        auto from_term = [&](const GroupTerm& t) {
            int64_t n = t.coeff_of(var);
            if (n == 0) return;
            ++equation_atoms;
            GroupTerm rest = t.without(var);
            for (const auto& [name, _] : rest.coeffs)
                if (!env.group.count(name)) return;  // inner variable, handled deeper
            int64_t value = eval_term(rest, env);
            if (value % n == 0) out.push_back(-(value / n));
        };
        std::function<void(const ValueTermPtr&)> scan_vterm = [&](const ValueTermPtr& t) {
            if (const auto* s = std::get_if<ValueTerm::Succ>(&t->node)) scan_vterm(s->arg);
            if (const auto* vo = std::get_if<ValueTerm::ValOf>(&t->node)) from_term(vo->term);
        };
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Formula::TermEq>) {
                    from_term(node.term);
                } else if constexpr (std::is_same_v<T, Formula::Cmp>) {
                    scan_vterm(node.lhs);
                    scan_vterm(node.rhs);
                } else if constexpr (std::is_same_v<T, Formula::Div> ||
                                     std::is_same_v<T, Formula::Ind>) {
                    scan_vterm(node.a);
                    scan_vterm(node.b);
                } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                    for (const auto& a : node.args) scan_vterm(a);
                } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                    collect_candidates(node.arg, var, env, out, equation_atoms);
                } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                    collect_candidates(node.lhs, var, env, out, equation_atoms);
                    collect_candidates(node.rhs, var, env, out, equation_atoms);
                } else if constexpr (std::is_same_v<T, Formula::Quant>) {
                    collect_candidates(node.body, var, env, out, equation_atoms);
                }
            },
            f->node);
    }

    bool eval(const FormulaPtr& f, Env& env) {
        tick();
        return std::visit(
            [&](const auto& node) -> bool {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Formula::TermEq>) {
                    return eval_term(node.term, env) == 0;
                } else if constexpr (std::is_same_v<T, Formula::Cmp>) {
                    ValueElement a = eval_vterm(node.lhs, env);
                    ValueElement b = eval_vterm(node.rhs, env);
                    switch (node.op) {
                        case CmpOp::Eq: return a == b;
                        case CmpOp::Le: return a <= b;
                        case CmpOp::Ge: return a >= b;
                        case CmpOp::Lt: return a < b;
                        default: return a > b;
                    }
                } else if constexpr (std::is_same_v<T, Formula::Div>) {
                    return div_pred(chain_, node.q, node.k, node.pi, node.l,
                                    eval_vterm(node.a, env), eval_vterm(node.b, env));
                } else if constexpr (std::is_same_v<T, Formula::Ind>) {
                    return ind_pred(chain_, node.k, node.pi, node.l, eval_vterm(node.a, env),
                                    eval_vterm(node.b, env));
                } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                    throw Unsupported("extension relations are outside the oracle fragment");
                } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                    return !eval(node.arg, env);
                } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                    bool l = eval(node.lhs, env);
                    switch (node.op) {
                        case Connective::And: return l && eval(node.rhs, env);
                        case Connective::Or: return l || eval(node.rhs, env);
                        default: return !l || eval(node.rhs, env);
                    }
                } else {
                    return quantifier(node, env);
                }
            },
            f->node);
    }

    bool quantifier(const Formula::Quant& q, Env& env) {
        bool exists = q.kind == QuantKind::Exists;
        if (q.sort == Sort::Value) {
            std::vector<ValueElement> range{ValueElement::neg_inf()};
            for (uint32_t i = 0; i <= value_bound_; ++i) range.push_back(ValueElement::fin(i));
            range.push_back(ValueElement::pos_inf());
            for (ValueElement probe : range) {
                bool r = with_value(q, probe, env);
                if (exists && r) return true;
                if (!exists && !r) return false;
            }
            return !exists;
        }
        std::vector<int64_t> points;
        size_t equation_atoms = 0;
        collect_candidates(q.body, q.var, env, points, equation_atoms);
        for (int64_t r = 0; r < global_modulus_; ++r)
            for (size_t t = 0; t <= equation_atoms; ++t)
                points.push_back(checked_add(r, checked_mul(static_cast<int64_t>(t), global_modulus_)));
        for (int64_t x = -group_bound_; x <= group_bound_; ++x) points.push_back(x);
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        for (int64_t x : points) {
            bool r = with_group(q, x, env);
            if (exists && r) return true;
            if (!exists && !r) return false;
        }
        return !exists;
    }

    bool with_value(const Formula::Quant& q, ValueElement v, Env& env) {
        auto saved = env.value.find(q.var) != env.value.end()
                         ? std::optional<ValueElement>(env.value[q.var])
                         : std::nullopt;
        env.value[q.var] = v;
        bool r = eval(q.body, env);
        if (saved)
            env.value[q.var] = *saved;
        else
            env.value.erase(q.var);
        return r;
    }

    bool with_group(const Formula::Quant& q, int64_t x, Env& env) {
        auto saved = env.group.find(q.var) != env.group.end()
                         ? std::optional<int64_t>(env.group[q.var])
                         : std::nullopt;
        env.group[q.var] = x;
        bool r = eval(q.body, env);
        if (saved)
            env.group[q.var] = *saved;
        else
            env.group.erase(q.var);
        return r;
    }
};

} // namespace

bool brute_decide(const FormulaPtr& sentence, const ValuationChain& chain, int64_t group_bound,
                  uint32_t value_bound) {
    return BruteDecider(chain, group_bound, value_bound).run(sentence);
}

uint64_t brute_count_quotient(int64_t n, const std::vector<int64_t>& a, const FiniteQuotient& Q,
                              int64_t mprime) {
    std::vector<int64_t> mods = Q.slot_moduli();
    if (a.size() != mods.size()) throw UsageError("element arity does not match the quotient");
    int64_t order = Q.order();
    if (order > (int64_t{1} << 20)) throw ResourceLimit("quotient order beyond 2^20");

    // Per-slot subgroup modulus: mprime * (Z/p^e) = p^{min(e, mprime(p))} (Z/p^e).
    FactoredInt fm = factorize(mprime);
    std::vector<int64_t> sub;
    for (const auto& c : Q.components) {
        int cut = std::min(c.exp, fm.exponent(c.prime));
        int64_t s = 1;
        for (int i = 0; i < cut; ++i) s = checked_mul(s, c.prime);
        for (int i = 0; i < c.mult; ++i) sub.push_back(s);
    }

    std::vector<int64_t> x(mods.size(), 0);
    uint64_t count = 0;
    while (true) {
        bool ok = true;
        for (size_t s = 0; s < mods.size(); ++s) {
            int64_t diff = mod_floor(checked_mul(n, x[s]) - a[s], mods[s]);
            if (diff % sub[s] != 0) {
                ok = false;
                break;
            }
        }
        count += ok;
        size_t s = 0;
        while (s < mods.size() && ++x[s] == mods[s]) x[s++] = 0;
        if (s == mods.size()) break;
    }
    return count;
}

uint64_t brute_count_quotient(int64_t n, int64_t a, const FiniteQuotient& Q, int64_t mprime) {
    return brute_count_quotient(n, std::vector<int64_t>(Q.slot_moduli().size(), a), Q, mprime);
}

} // namespace valz
