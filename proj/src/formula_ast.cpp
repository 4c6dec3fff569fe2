#include "valz/formula_ast.hpp"

#include <sstream>

namespace valz {

GroupTerm GroupTerm::plus(const GroupTerm& o) const {
    GroupTerm out = *this;
    out.constant = checked_add(out.constant, o.constant);
    for (const auto& [v, k] : o.coeffs) {
        int64_t c = checked_add(out.coeff_of(v), k);
        if (c == 0)
            out.coeffs.erase(v);
        else
            out.coeffs[v] = c;
    }
    return out;
}

GroupTerm GroupTerm::minus(const GroupTerm& o) const { return plus(o.scaled(-1)); }

GroupTerm GroupTerm::scaled(int64_t k) const {
    GroupTerm out;
    if (k == 0) return out;
    out.constant = checked_mul(constant, k);
    for (const auto& [v, c] : coeffs) out.coeffs[v] = checked_mul(c, k);
    return out;
}

GroupTerm GroupTerm::substituted(const std::string& name, int64_t value) const {
    auto it = coeffs.find(name);
    if (it == coeffs.end()) return *this;
    GroupTerm out = *this;
    out.coeffs.erase(name);
    out.constant = checked_add(out.constant, checked_mul(it->second, value));
    return out;
}

GroupTerm GroupTerm::without(const std::string& name) const {
    GroupTerm out = *this;
    out.coeffs.erase(name);
    return out;
}

bool is_truth(const FormulaPtr& f) {
    const auto* eq = std::get_if<Formula::TermEq>(&f->node);
    return eq && eq->term == GroupTerm{};
}

bool is_falsity(const FormulaPtr& f) {
    const auto* u = std::get_if<Formula::Unary>(&f->node);
    return u && is_truth(u->arg);
}

namespace {

void term_vars(const GroupTerm& t, std::set<std::string>& out) {
    for (const auto& [v, _] : t.coeffs) out.insert(v);
}

void vterm_vars(const ValueTermPtr& t, FreeVars& out) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ValueTerm::Var>) {
                out.value.insert(node.name);
            } else if constexpr (std::is_same_v<T, ValueTerm::Succ>) {
                vterm_vars(node.arg, out);
            } else if constexpr (std::is_same_v<T, ValueTerm::ValOf>) {
                term_vars(node.term, out.group);
            }
        },
        t->node);
}

void collect_free(const FormulaPtr& f, FreeVars& out, std::set<std::string>& boundG,
                  std::set<std::string>& boundI) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Formula::TermEq>) {
                std::set<std::string> vs;
                term_vars(node.term, vs);
                for (const auto& v : vs)
                    if (!boundG.count(v)) out.group.insert(v);
            } else if constexpr (std::is_same_v<T, Formula::Cmp>) {
                FreeVars raw;
                vterm_vars(node.lhs, raw);
                vterm_vars(node.rhs, raw);
                for (const auto& v : raw.group)
                    if (!boundG.count(v)) out.group.insert(v);
                for (const auto& v : raw.value)
                    if (!boundI.count(v)) out.value.insert(v);
            } else if constexpr (std::is_same_v<T, Formula::Div> || std::is_same_v<T, Formula::Ind>) {
                FreeVars raw;
                vterm_vars(node.a, raw);
                vterm_vars(node.b, raw);
                for (const auto& v : raw.group)
                    if (!boundG.count(v)) out.group.insert(v);
                for (const auto& v : raw.value)
                    if (!boundI.count(v)) out.value.insert(v);
            } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                FreeVars raw;
                for (const auto& a : node.args) vterm_vars(a, raw);
                for (const auto& v : raw.group)
                    if (!boundG.count(v)) out.group.insert(v);
                for (const auto& v : raw.value)
                    if (!boundI.count(v)) out.value.insert(v);
            } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                collect_free(node.arg, out, boundG, boundI);
            } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                collect_free(node.lhs, out, boundG, boundI);
                collect_free(node.rhs, out, boundG, boundI);
            } else if constexpr (std::is_same_v<T, Formula::Quant>) {
                auto& bound = node.sort == Sort::Group ? boundG : boundI;
                bool fresh = bound.insert(node.var).second;
                collect_free(node.body, out, boundG, boundI);
                if (fresh) bound.erase(node.var);
            }
        },
        f->node);
}

} // namespace

FreeVars free_vars(const FormulaPtr& f) {
    FreeVars out;
    std::set<std::string> bg, bi;
    collect_free(f, out, bg, bi);
    return out;
}

bool is_quantifier_free(const FormulaPtr& f) {
    return std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Formula::Unary>)
                return is_quantifier_free(node.arg);
            else if constexpr (std::is_same_v<T, Formula::Binary>)
                return is_quantifier_free(node.lhs) && is_quantifier_free(node.rhs);
            else if constexpr (std::is_same_v<T, Formula::Quant>)
                return false;
            else
                return true;
        },
        f->node);
}

bool vterm_equal(const ValueTermPtr& a, const ValueTermPtr& b) {
    if (a->node.index() != b->node.index()) return false;
    if (const auto* v = std::get_if<ValueTerm::Var>(&a->node))
        return v->name == std::get<ValueTerm::Var>(b->node).name;
    if (const auto* l = std::get_if<ValueTerm::Lit>(&a->node))
        return l->value == std::get<ValueTerm::Lit>(b->node).value;
    if (const auto* s = std::get_if<ValueTerm::Succ>(&a->node))
        return vterm_equal(s->arg, std::get<ValueTerm::Succ>(b->node).arg);
    const auto& va = std::get<ValueTerm::ValOf>(a->node);
    const auto& vb = std::get<ValueTerm::ValOf>(b->node);
    return va.scale == vb.scale && va.term == vb.term;
}

bool ast_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a->node.index() != b->node.index()) return false;
    if (const auto* t = std::get_if<Formula::TermEq>(&a->node))
        return t->term == std::get<Formula::TermEq>(b->node).term;
    if (const auto* c = std::get_if<Formula::Cmp>(&a->node)) {
        const auto& o = std::get<Formula::Cmp>(b->node);
        return c->op == o.op && vterm_equal(c->lhs, o.lhs) && vterm_equal(c->rhs, o.rhs);
    }
    if (const auto* d = std::get_if<Formula::Div>(&a->node)) {
        const auto& o = std::get<Formula::Div>(b->node);
        return d->q == o.q && d->k == o.k && d->pi == o.pi && d->l == o.l &&
               vterm_equal(d->a, o.a) && vterm_equal(d->b, o.b);
    }
    if (const auto* i = std::get_if<Formula::Ind>(&a->node)) {
        const auto& o = std::get<Formula::Ind>(b->node);
        return i->k == o.k && i->pi == o.pi && i->l == o.l && vterm_equal(i->a, o.a) &&
               vterm_equal(i->b, o.b);
    }
    if (const auto* e = std::get_if<Formula::Ext>(&a->node)) {
        const auto& o = std::get<Formula::Ext>(b->node);
        if (e->name != o.name || e->args.size() != o.args.size()) return false;
        for (size_t i = 0; i < e->args.size(); ++i)
            if (!vterm_equal(e->args[i], o.args[i])) return false;
        return true;
    }
    if (const auto* u = std::get_if<Formula::Unary>(&a->node))
        return ast_equal(u->arg, std::get<Formula::Unary>(b->node).arg);
    if (const auto* bin = std::get_if<Formula::Binary>(&a->node)) {
        const auto& o = std::get<Formula::Binary>(b->node);
        return bin->op == o.op && ast_equal(bin->lhs, o.lhs) && ast_equal(bin->rhs, o.rhs);
    }
    const auto& q = std::get<Formula::Quant>(a->node);
    const auto& o = std::get<Formula::Quant>(b->node);
    return q.kind == o.kind && q.sort == o.sort && q.var == o.var && ast_equal(q.body, o.body);
}

std::string print_term(const GroupTerm& t) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [v, k] : t.coeffs) {
        if (first) {
            if (k == 1)
                out << v;
            else if (k == -1)
                out << "-" << v;
            else
                out << k << "*" << v;
            first = false;
            continue;
        }
        int64_t a = k < 0 ? -k : k;
        out << (k < 0 ? " - " : " + ");
        if (a == 1)
            out << v;
        else
            out << a << "*" << v;
    }
    if (first) {
        out << t.constant;
    } else if (t.constant != 0) {
        int64_t a = t.constant < 0 ? -t.constant : t.constant;
        out << (t.constant < 0 ? " - " : " + ") << a;
    }
    return out.str();
}

std::string print_vterm(const ValueTermPtr& t) {
    return std::visit(
        [&](const auto& node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, ValueTerm::Var>) {
                return node.name;
            } else if constexpr (std::is_same_v<T, ValueTerm::Lit>) {
                return node.value.str();
            } else if constexpr (std::is_same_v<T, ValueTerm::Succ>) {
                return "S(" + print_vterm(node.arg) + ")";
            } else {
                return "v[" + std::to_string(node.scale) + "](" + print_term(node.term) + ")";
            }
        },
        t->node);
}

namespace {

std::string cmp_str(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Le: return "<=";
        case CmpOp::Ge: return ">=";
        case CmpOp::Lt: return "<";
        default: return ">";
    }
}

std::string prime_set(const std::set<int64_t>& pi) {
    std::string out = "{";
    bool first = true;
    for (int64_t p : pi) {
        if (!first) out += ",";
        out += std::to_string(p);
        first = false;
    }
    return out + "}";
}

// Precedence: quantifier body and -> lowest, then |, then &, then ~.
int precedence(const FormulaPtr& f) {
    if (const auto* b = std::get_if<Formula::Binary>(&f->node)) {
        switch (b->op) {
            case Connective::Implies: return 1;
            case Connective::Or: return 2;
            default: return 3;
        }
    }
    if (std::holds_alternative<Formula::Quant>(f->node)) return 1;
    if (std::holds_alternative<Formula::Unary>(f->node)) return 4;
    return 5;
}

std::string print_at(const FormulaPtr& f, int min_prec) {
    std::string body = std::visit(
        [&](const auto& node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Formula::TermEq>) {
                return print_term(node.term) + " = 0";
            } else if constexpr (std::is_same_v<T, Formula::Cmp>) {
                return print_vterm(node.lhs) + " " + cmp_str(node.op) + " " + print_vterm(node.rhs);
            } else if constexpr (std::is_same_v<T, Formula::Div>) {
                return "Div(" + std::to_string(node.q) + "," + std::to_string(node.k) + "," +
                       prime_set(node.pi) + "," + std::to_string(node.l) + "; " +
                       print_vterm(node.a) + ", " + print_vterm(node.b) + ")";
            } else if constexpr (std::is_same_v<T, Formula::Ind>) {
                return "Ind(" + std::to_string(node.k) + "," + prime_set(node.pi) + "," +
                       std::to_string(node.l) + "; " + print_vterm(node.a) + ", " +
                       print_vterm(node.b) + ")";
            } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                std::string out = "Rel[" + node.name + "](";
                for (size_t i = 0; i < node.args.size(); ++i) {
                    if (i) out += ", ";
                    out += print_vterm(node.args[i]);
                }
                return out + ")";
            } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                return "~" + print_at(node.arg, 4);
            } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                const char* op = node.op == Connective::And   ? " & "
                                 : node.op == Connective::Or  ? " | "
                                                              : " -> ";
                int prec = precedence(f);
                // & and | associate left; -> associates right.
                int lmin = node.op == Connective::Implies ? prec + 1 : prec;
                int rmin = node.op == Connective::Implies ? prec : prec + 1;
                return print_at(node.lhs, lmin) + op + print_at(node.rhs, rmin);
            } else {
                const auto& q = std::get<Formula::Quant>(f->node);
                return std::string(q.kind == QuantKind::Exists ? "E " : "A ") + q.var + ":" +
                       (q.sort == Sort::Group ? "G" : "I") + ". " + print_at(q.body, 1);
            }
        },
        f->node);
    return precedence(f) < min_prec ? "(" + body + ")" : body;
}

} // namespace

std::string print_formula(const FormulaPtr& f) { return print_at(f, 0); }

} // namespace valz
