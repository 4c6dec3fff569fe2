#include "valz/formula_parse.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <optional>

namespace valz {

namespace {

enum class Tok {
    Int, Ident, PosInf, NegInf,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Comma, Semi, Colon, Dot,
    Plus, Minus, Star,
    Eq, Le, Ge, Lt, Gt,
    Not, And, Or, Implies,
    End
};

struct Token {
    Tok kind;
    int64_t value = 0;
    std::string text;
    size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }
    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        current_ = {Tok::End, 0, "", i_};
        if (i_ >= text_.size()) return;
        size_t start = i_;
        char c = text_[i_];
        auto single = [&](Tok k) {
            ++i_;
            current_ = {k, 0, std::string(1, c), start};
        };
        if (std::isdigit(static_cast<unsigned char>(c))) {
            int64_t v = 0;
            while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
                if (v > (INT64_MAX - 9) / 10) throw ParseError("integer literal too large", start);
                v = v * 10 + (text_[i_] - '0');
                ++i_;
            }
            current_ = {Tok::Int, v, text_.substr(start, i_ - start), start};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
                ++i_;
            current_ = {Tok::Ident, 0, text_.substr(start, i_ - start), start};
            return;
        }
        switch (c) {
            case '+':
                if (text_.compare(i_, 4, "+inf") == 0) {
                    i_ += 4;
                    current_ = {Tok::PosInf, 0, "+inf", start};
                    return;
                }
                single(Tok::Plus);
                return;
            case '-':
                if (text_.compare(i_, 4, "-inf") == 0) {
                    i_ += 4;
                    current_ = {Tok::NegInf, 0, "-inf", start};
                    return;
                }
                if (text_.compare(i_, 2, "->") == 0) {
                    i_ += 2;
                    current_ = {Tok::Implies, 0, "->", start};
                    return;
                }
                single(Tok::Minus);
                return;
            case '<':
                if (text_.compare(i_, 2, "<=") == 0) {
                    i_ += 2;
                    current_ = {Tok::Le, 0, "<=", start};
                    return;
                }
                single(Tok::Lt);
                return;
            case '>':
                if (text_.compare(i_, 2, ">=") == 0) {
                    i_ += 2;
                    current_ = {Tok::Ge, 0, ">=", start};
                    return;
                }
                single(Tok::Gt);
                return;
            case '(': single(Tok::LParen); return;
            case ')': single(Tok::RParen); return;
            case '[': single(Tok::LBracket); return;
            case ']': single(Tok::RBracket); return;
            case '{': single(Tok::LBrace); return;
            case '}': single(Tok::RBrace); return;
            case ',': single(Tok::Comma); return;
            case ';': single(Tok::Semi); return;
            case ':': single(Tok::Colon); return;
            case '.': single(Tok::Dot); return;
            case '*': single(Tok::Star); return;
            case '=': single(Tok::Eq); return;
            case '~': single(Tok::Not); return;
            case '&': single(Tok::And); return;
            case '|': single(Tok::Or); return;
            default: throw ParseError(std::string("unexpected character '") + c + "'", start);
        }
    }

    const std::string& text_;
    size_t i_ = 0;
    Token current_;
};

bool is_reserved(const std::string& s) {
    return s == "E" || s == "A" || s == "S" || s == "v" || s == "Div" || s == "Ind" ||
           s == "Rel" || s == "G" || s == "I";
}

// An operand of a comparison before its sort is resolved. Single
// identifiers and nonnegative integers stay ambiguous until the atom is
// assembled.
struct Operand {
    enum class Kind { GroupExpr, ValueTerm, Ident, Int } kind;
    GroupTerm group;
    ValueTermPtr vterm;
    std::string ident;
    int64_t number = 0;
    size_t pos = 0;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    FormulaPtr parse() {
        FormulaPtr f = formula();
        if (lex_.peek().kind != Tok::End)
            throw ParseError("trailing input after formula", lex_.peek().pos);
        return f;
    }

private:
    Lexer lex_;
    std::map<std::string, Sort> bound_;

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, lex_.peek().pos); }

    Token expect(Tok kind, const char* what) {
        if (lex_.peek().kind != kind) fail(std::string("expected ") + what);
        return lex_.take();
    }

    bool ident_is(const char* s) {
        return lex_.peek().kind == Tok::Ident && lex_.peek().text == s;
    }

    // formula := implies-chain
    FormulaPtr formula() {
        FormulaPtr lhs = or_chain();
        if (lex_.peek().kind == Tok::Implies) {
            lex_.take();
            return Formula::binary(Connective::Implies, lhs, formula());
        }
        return lhs;
    }

    FormulaPtr or_chain() {
        FormulaPtr f = and_chain();
        while (lex_.peek().kind == Tok::Or) {
            lex_.take();
            f = Formula::binary(Connective::Or, f, and_chain());
        }
        return f;
    }

    FormulaPtr and_chain() {
        FormulaPtr f = unary();
        while (lex_.peek().kind == Tok::And) {
            lex_.take();
            f = Formula::binary(Connective::And, f, unary());
        }
        return f;
    }

    FormulaPtr unary() {
        if (lex_.peek().kind == Tok::Not) {
            lex_.take();
            return Formula::negation(unary());
        }
        if ((ident_is("E") || ident_is("A"))) return quantifier();
        if (lex_.peek().kind == Tok::LParen) {
            lex_.take();
            FormulaPtr f = formula();
            expect(Tok::RParen, "')'");
            return f;
        }
        return atom();
    }

    FormulaPtr quantifier() {
        Token head = lex_.take();
        QuantKind kind = head.text == "E" ? QuantKind::Exists : QuantKind::Forall;
        Token var = expect(Tok::Ident, "variable name");
        if (is_reserved(var.text))
            throw ParseError("'" + var.text + "' is reserved", var.pos);
        expect(Tok::Colon, "':'");
        Token sortTok = expect(Tok::Ident, "sort G or I");
        Sort sort;
        if (sortTok.text == "G")
            sort = Sort::Group;
        else if (sortTok.text == "I")
            sort = Sort::Value;
        else
            throw ParseError("expected sort G or I", sortTok.pos);
        expect(Tok::Dot, "'.'");

        std::optional<Sort> previous;
        if (auto it = bound_.find(var.text); it != bound_.end()) previous = it->second;
        bound_[var.text] = sort;
        FormulaPtr body = formula();
        if (previous)
            bound_[var.text] = *previous;
        else
            bound_.erase(var.text);
        return Formula::quant(kind, sort, var.text, body);
    }

    FormulaPtr atom() {
        if (ident_is("Div")) return div_atom();
        if (ident_is("Ind")) return ind_atom();
        if (ident_is("Rel")) return ext_atom();
        Operand lhs = operand();
        Tok opTok = lex_.peek().kind;
        CmpOp op;
        switch (opTok) {
            case Tok::Eq: op = CmpOp::Eq; break;
            case Tok::Le: op = CmpOp::Le; break;
            case Tok::Ge: op = CmpOp::Ge; break;
            case Tok::Lt: op = CmpOp::Lt; break;
            case Tok::Gt: op = CmpOp::Gt; break;
            default: fail("expected a comparison operator");
        }
        size_t opPos = lex_.peek().pos;
        lex_.take();
        Operand rhs = operand();
        return make_atom(lhs, op, rhs, opPos);
    }

    // Sort resolution: a clearly value-sorted side (vterm syntax or an
    // identifier bound at sort I) makes the atom a value comparison; a
    // clearly group-sorted side forces the equation form "term = 0".
    // "x = 0" with x unresolved defaults to the group equation.
    FormulaPtr make_atom(const Operand& lhs, CmpOp op, const Operand& rhs, size_t opPos) {
        auto forced_value = [&](const Operand& o) {
            return o.kind == Operand::Kind::ValueTerm ||
                   (o.kind == Operand::Kind::Ident && sort_of(o.ident) == Sort::Value);
        };
        auto forced_group = [&](const Operand& o) {
            return o.kind == Operand::Kind::GroupExpr ||
                   (o.kind == Operand::Kind::Ident && sort_of(o.ident) == Sort::Group);
        };
        bool value_atom;
        if (forced_value(lhs) || forced_value(rhs))
            value_atom = true;
        else if (forced_group(lhs) || forced_group(rhs))
            value_atom = false;
        else
            value_atom = !(op == CmpOp::Eq && rhs.kind == Operand::Kind::Int && rhs.number == 0);

        if (value_atom) return Formula::cmp(to_vterm(lhs), op, to_vterm(rhs));

        if (op != CmpOp::Eq || rhs.kind != Operand::Kind::Int || rhs.number != 0)
            throw ParseError("group atoms must have the form term = 0", opPos);
        return Formula::term_eq(to_group(lhs));
    }

    std::optional<Sort> sort_of(const std::string& name) {
        auto it = bound_.find(name);
        if (it != bound_.end()) return it->second;
        return std::nullopt;
    }

    ValueTermPtr to_vterm(const Operand& o) {
        switch (o.kind) {
            case Operand::Kind::ValueTerm: return o.vterm;
            case Operand::Kind::Ident:
                if (sort_of(o.ident) == Sort::Group)
                    throw SortError("group variable '" + o.ident + "' used in a value position");
                return ValueTerm::var(o.ident);
            case Operand::Kind::Int:
                if (o.number < 0 || o.number > UINT32_MAX)
                    throw ParseError("value literal out of range", o.pos);
                return ValueTerm::lit(ValueElement::fin(static_cast<uint32_t>(o.number)));
            default:
                throw SortError("group term used in a value position");
        }
    }

    GroupTerm to_group(const Operand& o) {
        switch (o.kind) {
            case Operand::Kind::GroupExpr: return o.group;
            case Operand::Kind::Ident:
                if (sort_of(o.ident) == Sort::Value)
                    throw SortError("value variable '" + o.ident + "' used in a group position");
                return GroupTerm::var(o.ident);
            case Operand::Kind::Int: return GroupTerm::lit(o.number);
            default:
                throw SortError("value term used in a group position");
        }
    }

    bool at_clear_vterm() {
        if (lex_.peek().kind == Tok::PosInf || lex_.peek().kind == Tok::NegInf) return true;
        return ident_is("S") || ident_is("v");
    }

    Operand operand() {
        size_t pos = lex_.peek().pos;
        if (at_clear_vterm()) {
            Operand o;
            o.kind = Operand::Kind::ValueTerm;
            o.vterm = vterm();
            o.pos = pos;
            return o;
        }
        return group_like(pos);
    }

    // Additive expression over INT, IDENT, INT*unary and unary minus. A lone
    // identifier or nonnegative literal stays ambiguous.
    Operand group_like(size_t pos) {
        struct Piece {
            GroupTerm term;
            bool plain_ident = false;
            bool plain_int = false;
            std::string ident;
            int64_t number = 0;
        };
        auto unary_piece = [&](auto&& self) -> Piece {
            if (lex_.peek().kind == Tok::Minus) {
                lex_.take();
                Piece p = self(self);
                p.term = p.term.negated();
                p.plain_ident = p.plain_int = false;
                return p;
            }
            if (lex_.peek().kind == Tok::Int) {
                Token t = lex_.take();
                if (lex_.peek().kind == Tok::Star) {
                    lex_.take();
                    Piece p = self(self);
                    p.term = p.term.scaled(t.value);
                    p.plain_ident = p.plain_int = false;
                    return p;
                }
                Piece p;
                p.term = GroupTerm::lit(t.value);
                p.plain_int = true;
                p.number = t.value;
                return p;
            }
            if (lex_.peek().kind == Tok::Ident) {
                Token t = lex_.take();
                if (is_reserved(t.text)) throw ParseError("'" + t.text + "' is reserved", t.pos);
                Piece p;
                p.term = GroupTerm::var(t.text);
                p.plain_ident = true;
                p.ident = t.text;
                return p;
            }
            fail("expected a term");
        };

        Piece first = unary_piece(unary_piece);
        bool extended = false;
        GroupTerm acc = first.term;
        while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
            // "-inf" never reaches here: the lexer folds it into one token.
            bool minus = lex_.take().kind == Tok::Minus;
            Piece next = unary_piece(unary_piece);
            acc = minus ? acc.minus(next.term) : acc.plus(next.term);
            extended = true;
        }

        Operand o;
        o.pos = pos;
        if (!extended && first.plain_ident) {
            o.kind = Operand::Kind::Ident;
            o.ident = first.ident;
        } else if (!extended && first.plain_int) {
            o.kind = Operand::Kind::Int;
            o.number = first.number;
        } else {
            o.kind = Operand::Kind::GroupExpr;
            o.group = acc;
        }
        return o;
    }

    ValueTermPtr vterm() {
        if (lex_.peek().kind == Tok::PosInf) {
            lex_.take();
            return ValueTerm::lit(ValueElement::pos_inf());
        }
        if (lex_.peek().kind == Tok::NegInf) {
            lex_.take();
            return ValueTerm::lit(ValueElement::neg_inf());
        }
        if (ident_is("S")) {
            lex_.take();
            expect(Tok::LParen, "'('");
            ValueTermPtr arg = vterm();
            expect(Tok::RParen, "')'");
            return ValueTerm::succ(arg);
        }
        if (ident_is("v")) {
            lex_.take();
            expect(Tok::LBracket, "'['");
            Token l = expect(Tok::Int, "scale");
            if (l.value < 1) throw ParseError("scale must be >= 1", l.pos);
            expect(Tok::RBracket, "']'");
            expect(Tok::LParen, "'('");
            Operand t = group_like(lex_.peek().pos);
            expect(Tok::RParen, "')'");
            return ValueTerm::val_of(l.value, to_group(t));
        }
        if (lex_.peek().kind == Tok::Int) {
            Token t = lex_.take();
            if (t.value > UINT32_MAX) throw ParseError("value literal out of range", t.pos);
            return ValueTerm::lit(ValueElement::fin(static_cast<uint32_t>(t.value)));
        }
        Token t = expect(Tok::Ident, "value term");
        if (is_reserved(t.text)) throw ParseError("'" + t.text + "' is reserved", t.pos);
        if (sort_of(t.text) == Sort::Group)
            throw SortError("group variable '" + t.text + "' used in a value position");
        return ValueTerm::var(t.text);
    }

    std::set<int64_t> prime_set() {
        expect(Tok::LBrace, "'{'");
        std::set<int64_t> pi;
        if (lex_.peek().kind != Tok::RBrace) {
            while (true) {
                Token p = expect(Tok::Int, "prime");
                if (!is_prime(p.value)) throw ParseError("prime set entries must be prime", p.pos);
                pi.insert(p.value);
                if (lex_.peek().kind != Tok::Comma) break;
                lex_.take();
            }
        }
        expect(Tok::RBrace, "'}'");
        return pi;
    }

    FormulaPtr div_atom() {
        lex_.take();
        expect(Tok::LParen, "'('");
        Token q = expect(Tok::Int, "prime q");
        if (!is_prime(q.value)) throw ParseError("Div requires a prime q", q.pos);
        expect(Tok::Comma, "','");
        Token k = expect(Tok::Int, "exponent k");
        expect(Tok::Comma, "','");
        std::set<int64_t> pi = prime_set();
        expect(Tok::Comma, "','");
        Token l = expect(Tok::Int, "scale l");
        if (l.value < 1) throw ParseError("scale must be >= 1", l.pos);
        expect(Tok::Semi, "';'");
        ValueTermPtr a = vterm();
        expect(Tok::Comma, "','");
        ValueTermPtr b = vterm();
        expect(Tok::RParen, "')'");
        if (k.value < 0 || k.value > UINT32_MAX) throw ParseError("exponent out of range", k.pos);
        return Formula::div(q.value, static_cast<uint32_t>(k.value), std::move(pi), l.value, a, b);
    }

    FormulaPtr ind_atom() {
        lex_.take();
        expect(Tok::LParen, "'('");
        Token k = expect(Tok::Int, "bound k");
        expect(Tok::Comma, "','");
        std::set<int64_t> pi = prime_set();
        expect(Tok::Comma, "','");
        Token l = expect(Tok::Int, "scale l");
        if (l.value < 1) throw ParseError("scale must be >= 1", l.pos);
        expect(Tok::Semi, "';'");
        ValueTermPtr a = vterm();
        expect(Tok::Comma, "','");
        ValueTermPtr b = vterm();
        expect(Tok::RParen, "')'");
        return Formula::ind(static_cast<uint64_t>(k.value), std::move(pi), l.value, a, b);
    }

    FormulaPtr ext_atom() {
        lex_.take();
        expect(Tok::LBracket, "'['");
        Token name = expect(Tok::Ident, "relation name");
        expect(Tok::RBracket, "']'");
        expect(Tok::LParen, "'('");
        std::vector<ValueTermPtr> args;
        if (lex_.peek().kind != Tok::RParen) {
            while (true) {
                args.push_back(vterm());
                if (lex_.peek().kind != Tok::Comma) break;
                lex_.take();
            }
        }
        expect(Tok::RParen, "')'");
        return Formula::ext(name.text, std::move(args));
    }
};

// Whole-formula sort check: every variable must be used at one sort only.
void check_sorts(const FormulaPtr& f, std::map<std::string, Sort>& sorts) {
    auto record = [&](const std::string& name, Sort s) {
        auto [it, fresh] = sorts.emplace(name, s);
        if (!fresh && it->second != s)
            throw SortError("variable '" + name + "' used at both sorts");
    };
    std::function<void(const ValueTermPtr&)> walk_vterm = [&](const ValueTermPtr& t) {
        if (const auto* v = std::get_if<ValueTerm::Var>(&t->node)) {
            record(v->name, Sort::Value);
        } else if (const auto* s = std::get_if<ValueTerm::Succ>(&t->node)) {
            walk_vterm(s->arg);
        } else if (const auto* vo = std::get_if<ValueTerm::ValOf>(&t->node)) {
            for (const auto& [name, _] : vo->term.coeffs) record(name, Sort::Group);
        }
    };
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Formula::TermEq>) {
                for (const auto& [name, _] : node.term.coeffs) record(name, Sort::Group);
            } else if constexpr (std::is_same_v<T, Formula::Cmp>) {
                walk_vterm(node.lhs);
                walk_vterm(node.rhs);
            } else if constexpr (std::is_same_v<T, Formula::Div> || std::is_same_v<T, Formula::Ind>) {
                walk_vterm(node.a);
                walk_vterm(node.b);
            } else if constexpr (std::is_same_v<T, Formula::Ext>) {
                for (const auto& a : node.args) walk_vterm(a);
            } else if constexpr (std::is_same_v<T, Formula::Unary>) {
                check_sorts(node.arg, sorts);
            } else if constexpr (std::is_same_v<T, Formula::Binary>) {
                check_sorts(node.lhs, sorts);
                check_sorts(node.rhs, sorts);
            } else if constexpr (std::is_same_v<T, Formula::Quant>) {
                // Quantifiers shadow; a clash across scopes is harmless but
                // rejecting it keeps diagnostics simple.
                record(node.var, node.sort);
                check_sorts(node.body, sorts);
            }
        },
        f->node);
}

} // namespace

FormulaPtr parse_formula(const std::string& text) {
    Parser p(text);
    FormulaPtr f = p.parse();
    std::map<std::string, Sort> sorts;
    check_sorts(f, sorts);
    return f;
}

} // namespace valz
