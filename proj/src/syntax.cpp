#include "weblin/syntax.hpp"

#include <cctype>
#include <unordered_map>

namespace weblin {

ParseError::ParseError(std::size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message), offset_(offset), detail_(message)
{
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr run()
    {
        skip_space();
        if (pos_ == text_.size()) throw ParseError(pos_, "empty input");
        Expr e = expr();
        skip_space();
        if (pos_ != text_.size()) throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            if (pos_ == text_.size()) throw ParseError(pos_, std::string("expected '") + c + "' before end of input");
            throw ParseError(pos_, std::string("expected '") + c + "'");
        }
    }

    Expr expr()
    {
        std::vector<Expr> terms{term()};
        for (;;) {
            if (accept('+'))
                terms.push_back(term());
            else if (accept('-'))
                terms.push_back(raw::neg(term()));
            else
                break;
        }
        return raw::add(std::move(terms));
    }

    Expr term()
    {
        std::vector<Expr> factors{unary()};
        for (;;) {
            if (accept('*')) {
                factors.push_back(unary());
            } else if (accept('/')) {
                Expr num = raw::mul(std::move(factors));
                factors = {raw::div(num, unary())};
            } else {
                break;
            }
        }
        return raw::mul(std::move(factors));
    }

    Expr unary()
    {
        if (accept('-')) return raw::neg(unary());
        return power();
    }

    Expr power()
    {
        Expr base = atom();
        if (accept('^')) return raw::pow(base, unary());
        return base;
    }

    Expr atom()
    {
        skip_space();
        if (pos_ == text_.size()) throw ParseError(pos_, "unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::islower(static_cast<unsigned char>(c))) return identifier();
        if (c == '(') {
            ++pos_;
            Expr inner = expr();
            expect(')');
            return inner;
        }
        throw ParseError(pos_, std::string("unexpected '") + c + "'");
    }

    Expr number()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        std::string_view lexeme = text_.substr(start, pos_ - start);
        if (lexeme == "." || lexeme.front() == '.' || lexeme.back() == '.') throw ParseError(start, "malformed number");
        return constant(parse_rational(lexeme));
    }

    Expr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const unsigned char ch = static_cast<unsigned char>(text_[pos_]);
            if (!(std::islower(ch) || std::isdigit(ch) || ch == '_')) break;
            ++pos_;
        }
        const std::string name(text_.substr(start, pos_ - start));
        skip_space();
        const bool call = pos_ < text_.size() && text_[pos_] == '(';
        if (name == "sqrt" || name == "exp" || name == "log") {
            if (!call) throw ParseError(pos_, "expected '(' after " + name);
            ++pos_;
            Expr arg = expr();
            expect(')');
            if (name == "sqrt") return raw::pow(arg, constant(Rational(1, 2)));
            return name == "exp" ? raw::exp(arg) : raw::log(arg);
        }
        if (call) throw ParseError(start, "unknown function '" + name + "'");
        if (name == "x") return var_x();
        if (name == "y") return var_y();
        return parameter(name);
    }
};

constexpr int prec_add = 1;
constexpr int prec_mul = 2;
constexpr int prec_neg = 3;
constexpr int prec_pow = 4;
constexpr int prec_atom = 5;

struct Printed {
    std::string text;
    int prec;
};

class Printer {
public:
    const Printed& print(Expr e)
    {
        if (auto it = memo_.find(e.node()); it != memo_.end()) return it->second;
        Printed p = build(e);
        return memo_.emplace(e.node(), std::move(p)).first->second;
    }

    std::string at_least(Expr e, int min)
    {
        const Printed& p = print(e);
        return p.prec >= min ? p.text : "(" + p.text + ")";
    }

private:
    std::unordered_map<const Node*, Printed> memo_;

    static bool is_negative_term(Expr t)
    {
        if (t.is_constant()) return sgn(t.value()) < 0;
        if (t.kind() == Kind::neg) return true;
        return t.kind() == Kind::mul && t.is_canonical_node() && t.children()[0].is_constant() && sgn(t.children()[0].value()) < 0;
    }

    // Text of -t for a term that is_negative_term.
    std::string negated(Expr t)
    {
        if (t.is_constant()) return print(constant(-t.value())).text;
        if (t.kind() == Kind::neg) return at_least(t.children()[0], prec_mul);
        return product(t, true);
    }

    std::string product(Expr e, bool drop_sign)
    {
        auto ch = e.children();
        Rational c = 1;
        std::size_t i = 0;
        if (ch[0].is_constant()) {
            c = ch[0].value();
            i = 1;
        }
        std::vector<std::string> num, den;
        const mpz_class p = abs(c.get_num());
        const mpz_class q = c.get_den();
        if (p != 1) num.push_back(p.get_str());
        if (q != 1) den.push_back(q.get_str());
        for (; i < ch.size(); ++i) {
            Expr f = ch[i];
            if (f.kind() == Kind::pow && f.children()[1].is_constant() && sgn(f.children()[1].value()) < 0) {
                Expr inv = pow(f.children()[0], constant(-f.children()[1].value()));
                den.push_back(at_least(inv, prec_neg));
            } else {
                num.push_back(at_least(f, prec_neg));
            }
        }
        std::string text = num.empty() ? "1" : join(num, "*");
        if (!den.empty()) text += "/" + (den.size() == 1 ? den[0] : "(" + join(den, "*") + ")");
        if (sgn(c) < 0 && !drop_sign) text = "-" + text;
        return text;
    }

    static std::string join(const std::vector<std::string>& parts, const char* sep)
    {
        std::string out;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += sep;
            out += parts[i];
        }
        return out;
    }

    Printed build(Expr e)
    {
        auto ch = e.children();
        switch (e.kind()) {
        case Kind::constant: {
            const Rational& v = e.value();
            if (is_integer(v)) return {v.get_num().get_str(), sgn(v) < 0 ? prec_neg : prec_atom};
            return {v.get_num().get_str() + "/" + v.get_den().get_str(), prec_mul};
        }
        case Kind::variable:
        case Kind::parameter: return {e.name(), prec_atom};
        case Kind::function: {
            std::string name = e.name();
            auto j = e.jet();
            if (j[0] + j[1] > 0) name += "_" + std::string(static_cast<std::size_t>(j[0]), 'x') + std::string(static_cast<std::size_t>(j[1]), 'y');
            return {name, prec_atom};
        }
        case Kind::add: {
            std::string text = at_least(ch[0], prec_add);
            for (std::size_t i = 1; i < ch.size(); ++i) {
                if (is_negative_term(ch[i]))
                    text += " - " + negated(ch[i]);
                else
                    text += " + " + at_least(ch[i], prec_mul);
            }
            return {text, prec_add};
        }
        case Kind::mul: {
            if (e.is_canonical_node()) return {product(e, false), prec_mul};
            std::string text = at_least(ch[0], prec_mul);
            for (std::size_t i = 1; i < ch.size(); ++i) text += "*" + at_least(ch[i], prec_neg);
            return {text, prec_mul};
        }
        case Kind::div: return {at_least(ch[0], prec_mul) + "/" + at_least(ch[1], prec_neg), prec_mul};
        case Kind::neg: return {"-" + at_least(ch[0], prec_neg), prec_neg};
        case Kind::pow:
            if (ch[1].is_constant() && ch[1].value() == Rational(1, 2)) return {"sqrt(" + print(ch[0]).text + ")", prec_atom};
            if (e.is_canonical_node() && ch[1].is_constant() && sgn(ch[1].value()) < 0)
                return {"1/" + at_least(pow(ch[0], constant(-ch[1].value())), prec_neg), prec_mul};
            return {at_least(ch[0], prec_atom) + "^" + at_least(ch[1], prec_neg), prec_pow};
        case Kind::exp: return {"exp(" + print(ch[0]).text + ")", prec_atom};
        case Kind::log: return {"log(" + print(ch[0]).text + ")", prec_atom};
        }
        return {"?", prec_atom};
    }
};

} // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

std::string format(Expr e)
{
    Printer printer;
    return printer.print(e).text;
}

} // namespace weblin
