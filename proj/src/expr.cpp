#include "weblin/expr.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace weblin {

namespace {

enum Flag : std::uint8_t {
    dep_x = 1,
    dep_y = 2,
    has_param = 4,
    has_func = 8,
    has_transc = 16,
    has_frac_pow = 32,
    canonical = 64,
    canonical_node = 128,
};

} // namespace

struct Node {
    Kind kind = Kind::constant;
    std::uint8_t flags = 0;
    std::array<int, 2> jet{0, 0};
    std::uint32_t id = 0;
    std::uint64_t hash = 0;
    Rational value;
    std::string name;
    std::vector<Expr> children;
};

namespace {

constexpr std::uint64_t mix(std::uint64_t h)
{
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

std::uint64_t hash_mpz(mpz_srcptr z)
{
    std::uint64_t h = mix(0x51ed270b27c4e1a3ULL ^ static_cast<std::uint64_t>(mpz_sgn(z) + 1));
    const std::size_t n = mpz_size(z);
    for (std::size_t i = 0; i < n; ++i) h = mix(h ^ static_cast<std::uint64_t>(mpz_getlimbn(z, static_cast<mp_size_t>(i))));
    return h;
}

std::uint64_t compute_hash(const Node& n)
{
    std::uint64_t h = mix(0x2545f4914f6cdd1dULL + static_cast<std::uint64_t>(n.kind));
    switch (n.kind) {
    case Kind::constant:
        h = mix(h ^ hash_mpz(n.value.get_num_mpz_t()));
        h = mix(h ^ hash_mpz(n.value.get_den_mpz_t()));
        break;
    case Kind::variable:
    case Kind::parameter:
    case Kind::function:
        h = mix(h ^ std::hash<std::string>{}(n.name));
        h = mix(h ^ static_cast<std::uint64_t>(n.jet[0] * 131 + n.jet[1]));
        break;
    default:
        break;
    }
    for (const Expr& c : n.children) h = mix(h ^ c.hash()) + 0x9e3779b97f4a7c15ULL;
    return h;
}

struct NodePtrHash {
    std::size_t operator()(const Node* n) const { return static_cast<std::size_t>(n->hash); }
};

struct NodePtrEq {
    bool operator()(const Node* a, const Node* b) const
    {
        if (a->hash != b->hash || a->kind != b->kind || a->flags != b->flags) return false;
        if (a->kind == Kind::constant && a->value != b->value) return false;
        if (a->name != b->name || a->jet != b->jet) return false;
        return a->children == b->children;
    }
};

class Pool {
public:
    Expr intern(Node&& candidate)
    {
        candidate.hash = compute_hash(candidate);
        std::lock_guard lock(mutex_);
        if (auto it = table_.find(&candidate); it != table_.end()) return Expr(*it);
        candidate.id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(std::move(candidate));
        const Node* stored = &nodes_.back();
        table_.insert(stored);
        return Expr(stored);
    }

    std::size_t size()
    {
        std::lock_guard lock(mutex_);
        return nodes_.size();
    }

    bool lookup_partial(std::uint64_t key, Expr& out)
    {
        std::lock_guard lock(cache_mutex_);
        auto it = partial_cache_.find(key);
        if (it == partial_cache_.end()) return false;
        out = it->second;
        return true;
    }

    void store_partial(std::uint64_t key, Expr value)
    {
        std::lock_guard lock(cache_mutex_);
        partial_cache_.emplace(key, value);
    }

private:
    std::mutex mutex_;
    std::deque<Node> nodes_;
    std::unordered_set<const Node*, NodePtrHash, NodePtrEq> table_;
    std::mutex cache_mutex_;
    std::unordered_map<std::uint64_t, Expr> partial_cache_;
};

Pool& pool()
{
    static Pool instance;
    return instance;
}

bool is_integer_constant(Expr e) { return e.is_constant() && is_integer(e.value()); }

Expr make_node(Kind kind, std::vector<Expr> children, bool smart)
{
    Node n;
    n.kind = kind;
    std::uint8_t flags = smart ? (canonical | canonical_node) : 0;
    for (const Expr& c : children) {
        const std::uint8_t cf = c.node()->flags;
        flags |= static_cast<std::uint8_t>(cf & ~(canonical | canonical_node));
        if (!(cf & canonical)) flags &= static_cast<std::uint8_t>(~canonical);
    }
    if (kind == Kind::exp || kind == Kind::log) flags |= has_transc;
    if (kind == Kind::pow && !is_integer_constant(children[1])) flags |= has_frac_pow;
    n.flags = flags;
    n.children = std::move(children);
    return pool().intern(std::move(n));
}

int rank(Kind k)
{
    switch (k) {
    case Kind::constant: return 0;
    case Kind::variable: return 1;
    case Kind::parameter: return 2;
    case Kind::function: return 3;
    default: return 4;
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Expr accessors

Expr::Expr() : node_(integer(0).node_) {}

Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
std::span<const Expr> Expr::children() const { return node_->children; }
std::array<int, 2> Expr::jet() const { return node_->jet; }
std::uint64_t Expr::hash() const { return node_->hash; }
std::uint32_t Expr::id() const { return node_->id; }
bool Expr::is_zero() const { return is_constant() && sgn(node_->value) == 0; }
bool Expr::is_one() const { return is_constant() && node_->value == 1; }
bool Expr::is_constant(long v) const { return is_constant() && node_->value == v; }
bool Expr::depends_on(Var v) const { return node_->flags & (v == Var::x ? dep_x : dep_y); }
bool Expr::has_parameters() const { return node_->flags & has_param; }
bool Expr::has_functions() const { return node_->flags & has_func; }
bool Expr::has_transcendental() const { return node_->flags & has_transc; }
bool Expr::has_fractional_power() const { return node_->flags & has_frac_pow; }
bool Expr::is_canonical() const { return node_->flags & canonical; }
bool Expr::is_canonical_node() const { return node_->flags & canonical_node; }

bool structural_less(Expr a, Expr b)
{
    if (a == b) return false;
    const int ra = rank(a.kind()), rb = rank(b.kind());
    if (ra != rb) return ra < rb;
    switch (a.kind()) {
    case Kind::constant: return a.value() < b.value();
    case Kind::variable:
    case Kind::parameter: return a.name() < b.name();
    case Kind::function:
        if (a.name() != b.name()) return a.name() < b.name();
        return a.jet() < b.jet();
    default: break;
    }
    if (a.hash() != b.hash()) return a.hash() < b.hash();
    if (a.kind() != b.kind()) return a.kind() < b.kind();
    auto ca = a.children(), cb = b.children();
    if (ca.size() != cb.size()) return ca.size() < cb.size();
    for (std::size_t i = 0; i < ca.size(); ++i) {
        if (ca[i] == cb[i]) continue;
        return structural_less(ca[i], cb[i]);
    }
    return a.is_canonical() < b.is_canonical();
}

// ---------------------------------------------------------------------------
// Atoms

Expr constant(const Rational& q)
{
    Node n;
    n.kind = Kind::constant;
    n.value = q;
    n.value.canonicalize();
    n.flags = canonical | canonical_node;
    return pool().intern(std::move(n));
}

Expr integer(long v) { return constant(Rational(v)); }

Expr variable(Var v)
{
    Node n;
    n.kind = Kind::variable;
    n.name = v == Var::x ? "x" : "y";
    n.flags = static_cast<std::uint8_t>(canonical | canonical_node | (v == Var::x ? dep_x : dep_y));
    return pool().intern(std::move(n));
}

Expr var_x() { return variable(Var::x); }
Expr var_y() { return variable(Var::y); }

Expr parameter(std::string_view name)
{
    if (name == "x" || name == "y") throw std::invalid_argument("x and y are variables, not parameters");
    Node n;
    n.kind = Kind::parameter;
    n.name = std::string(name);
    n.flags = canonical | canonical_node | has_param;
    return pool().intern(std::move(n));
}

Expr function(std::string_view name, int dx, int dy)
{
    Node n;
    n.kind = Kind::function;
    n.name = std::string(name);
    n.jet = {dx, dy};
    n.flags = canonical | canonical_node | has_func | dep_x | dep_y;
    return pool().intern(std::move(n));
}

// ---------------------------------------------------------------------------
// Raw constructors

namespace raw {

Expr add(std::vector<Expr> terms)
{
    if (terms.empty()) throw std::invalid_argument("raw::add needs terms");
    if (terms.size() == 1) return terms.front();
    return make_node(Kind::add, std::move(terms), false);
}

Expr mul(std::vector<Expr> factors)
{
    if (factors.empty()) throw std::invalid_argument("raw::mul needs factors");
    if (factors.size() == 1) return factors.front();
    return make_node(Kind::mul, std::move(factors), false);
}

Expr div(Expr a, Expr b) { return make_node(Kind::div, {a, b}, false); }
Expr neg(Expr a) { return make_node(Kind::neg, {a}, false); }
Expr pow(Expr base, Expr exponent) { return make_node(Kind::pow, {base, exponent}, false); }
Expr exp(Expr a) { return make_node(Kind::exp, {a}, false); }
Expr log(Expr a) { return make_node(Kind::log, {a}, false); }

} // namespace raw

// ---------------------------------------------------------------------------
// Canonicalizing constructors

namespace {

Expr scaled(const Rational& c, Expr core)
{
    if (c == 1) return core;
    std::vector<Expr> children{constant(c)};
    if (core.kind() == Kind::mul && core.is_canonical_node()) {
        for (Expr f : core.children()) children.push_back(f);
    } else {
        children.push_back(core);
    }
    return make_node(Kind::mul, std::move(children), true);
}

struct TermCollector {
    Rational constant_part = 0;
    std::vector<std::pair<Expr, Rational>> terms;
    std::unordered_map<const Node*, std::size_t> index;

    void add_term(Expr core, const Rational& c)
    {
        if (auto it = index.find(core.node()); it != index.end()) {
            terms[it->second].second += c;
        } else {
            index.emplace(core.node(), terms.size());
            terms.emplace_back(core, c);
        }
    }

    void visit(Expr t, const Rational& scale)
    {
        if (!t.is_canonical() && t.kind() != Kind::add && t.kind() != Kind::neg) t = canonicalize(t);
        switch (t.kind()) {
        case Kind::constant: constant_part += scale * t.value(); break;
        case Kind::add:
            for (Expr c : t.children()) visit(c, scale);
            break;
        case Kind::neg: visit(t.children()[0], -scale); break;
        case Kind::mul:
            if (t.is_canonical_node() && t.children()[0].is_constant()) {
                auto ch = t.children();
                const Rational c = ch[0].value();
                Expr core = ch.size() == 2 ? ch[1] : make_node(Kind::mul, std::vector<Expr>(ch.begin() + 1, ch.end()), true);
                if (core.kind() == Kind::add)
                    visit(core, scale * c);
                else
                    add_term(core, scale * c);
            } else {
                add_term(t, scale);
            }
            break;
        default: add_term(t, scale); break;
        }
    }
};

struct FactorCollector {
    Rational coeff = 1;
    bool zero = false;
    std::vector<std::pair<Expr, Expr>> factors;
    std::unordered_map<const Node*, std::size_t> index;
    std::vector<Expr> exp_args;

    void accumulate(Expr base, Expr exponent)
    {
        if (auto it = index.find(base.node()); it != index.end()) {
            auto& slot = factors[it->second].second;
            slot = add(slot, exponent);
        } else {
            index.emplace(base.node(), factors.size());
            factors.emplace_back(base, exponent);
        }
    }

    // `power` is always an integer.
    void visit(Expr f, long power)
    {
        if (!f.is_canonical() && f.kind() != Kind::mul && f.kind() != Kind::neg && f.kind() != Kind::div) f = canonicalize(f);
        switch (f.kind()) {
        case Kind::constant:
            if (sgn(f.value()) == 0) {
                if (power > 0)
                    zero = true;
                else
                    accumulate(f, integer(power));
            } else {
                coeff *= rational_pow(f.value(), power);
            }
            break;
        case Kind::mul:
            for (Expr c : f.children()) visit(c, power);
            break;
        case Kind::neg:
            if (power % 2 != 0) coeff = -coeff;
            visit(f.children()[0], power);
            break;
        case Kind::div:
            visit(f.children()[0], power);
            visit(f.children()[1], -power);
            break;
        case Kind::pow: {
            Expr base = f.children()[0], e = f.children()[1];
            if (is_integer_constant(e) && e.value().get_num().fits_slong_p()) {
                visit(base, power * e.value().get_num().get_si());
            } else {
                accumulate(base, power == 1 ? e : mul(integer(power), e));
            }
            break;
        }
        case Kind::exp: {
            Expr u = f.children()[0];
            exp_args.push_back(power == 1 ? u : mul(integer(power), u));
            break;
        }
        default: accumulate(f, integer(power)); break;
        }
    }
};

Expr base_of(Expr e) { return e.kind() == Kind::pow ? e.children()[0] : e; }

Expr build_product(FactorCollector& fc, int depth);

Expr finish_product(Rational coeff, std::vector<Expr> out, int depth)
{
    if (sgn(coeff) == 0) return integer(0);
    if (depth < 2) {
        // a power result may re-expose a base that already appears
        std::unordered_set<const Node*> seen;
        bool duplicate = false;
        for (Expr f : out)
            if (!seen.insert(base_of(f).node()).second) duplicate = true;
        if (duplicate) {
            FactorCollector again;
            again.coeff = coeff;
            for (Expr f : out) again.visit(f, 1);
            return build_product(again, depth + 1);
        }
    }
    std::sort(out.begin(), out.end(), structural_less);
    if (out.empty()) return constant(coeff);
    if (coeff == 1 && out.size() == 1) return out.front();
    std::vector<Expr> children;
    children.reserve(out.size() + 1);
    if (coeff != 1) children.push_back(constant(coeff));
    children.insert(children.end(), out.begin(), out.end());
    return make_node(Kind::mul, std::move(children), true);
}

Expr build_product(FactorCollector& fc, int depth)
{
    if (fc.zero) return integer(0);
    Rational coeff = fc.coeff;
    std::vector<Expr> out;
    auto absorb = [&](Expr p) {
        if (p.is_constant()) {
            coeff *= p.value();
        } else if (p.kind() == Kind::mul && p.is_canonical_node()) {
            for (Expr c : p.children()) {
                if (c.is_constant())
                    coeff *= c.value();
                else
                    out.push_back(c);
            }
        } else {
            out.push_back(p);
        }
    };
    for (auto& [base, e] : fc.factors) absorb(pow(base, e));
    if (!fc.exp_args.empty()) absorb(exp(add(fc.exp_args)));
    return finish_product(coeff, std::move(out), depth);
}

} // namespace

Expr add(std::span<const Expr> terms)
{
    TermCollector tc;
    for (Expr t : terms) tc.visit(t, Rational(1));
    std::vector<Expr> out;
    for (auto& [core, c] : tc.terms)
        if (sgn(c) != 0) out.push_back(scaled(c, core));
    std::sort(out.begin(), out.end(), structural_less);
    if (out.empty()) return constant(tc.constant_part);
    if (sgn(tc.constant_part) == 0 && out.size() == 1) return out.front();
    std::vector<Expr> children;
    children.reserve(out.size() + 1);
    if (sgn(tc.constant_part) != 0) children.push_back(constant(tc.constant_part));
    children.insert(children.end(), out.begin(), out.end());
    return make_node(Kind::add, std::move(children), true);
}

Expr add(Expr a, Expr b)
{
    if (a.is_zero()) return b.is_canonical() ? b : add(std::span<const Expr>(&b, 1));
    if (b.is_zero()) return a.is_canonical() ? a : add(std::span<const Expr>(&a, 1));
    const Expr terms[] = {a, b};
    return add(std::span<const Expr>(terms));
}

Expr mul(std::span<const Expr> factors)
{
    FactorCollector fc;
    for (Expr f : factors) {
        fc.visit(f, 1);
        if (fc.zero) return integer(0);
    }
    return build_product(fc, 0);
}

Expr mul(Expr a, Expr b)
{
    if (a.is_one() && b.is_canonical()) return b;
    if (b.is_one() && a.is_canonical()) return a;
    if (a.is_zero() || b.is_zero()) return integer(0);
    const Expr f[] = {a, b};
    return mul(std::span<const Expr>(f));
}

Expr mul(Expr a, Expr b, Expr c)
{
    const Expr f[] = {a, b, c};
    return mul(std::span<const Expr>(f));
}

Expr sub(Expr a, Expr b) { return add(a, mul(integer(-1), b)); }
Expr neg(Expr a) { return mul(integer(-1), a); }
Expr div(Expr a, Expr b) { return mul(a, pow(b, integer(-1))); }

Expr pow(Expr base, Expr e)
{
    if (e.is_zero()) return integer(1);
    if (e.is_one()) return base.is_canonical() ? base : mul(std::span<const Expr>(&base, 1));
    if (base.is_one()) return integer(1);
    if (base.is_constant() && e.is_constant()) {
        const Rational& b = base.value();
        const Rational& q = e.value();
        if (sgn(b) == 0) {
            if (sgn(q) > 0) return integer(0);
            return make_node(Kind::pow, {base, e}, true); // kept as a visible singularity
        }
        if (is_integer(q) && q.get_num().fits_slong_p()) return constant(rational_pow(b, q.get_num().get_si()));
        if (q.get_den().fits_ulong_p() && q.get_num().fits_slong_p()) {
            Rational root;
            if ((sgn(b) > 0 || q.get_den().get_ui() % 2 == 1) && exact_root(b, q.get_den().get_ui(), root))
                return constant(rational_pow(root, q.get_num().get_si()));
        }
        return make_node(Kind::pow, {base, e}, true);
    }
    if (is_integer_constant(e) && e.value().get_num().fits_slong_p()) {
        const long k = e.value().get_num().get_si();
        switch (base.kind()) {
        case Kind::mul:
        case Kind::div:
        case Kind::neg: {
            FactorCollector fc;
            fc.visit(base, k);
            return build_product(fc, 0);
        }
        case Kind::pow: return pow(base.children()[0], mul(base.children()[1], e));
        default: break;
        }
    }
    if (base.kind() == Kind::exp) return exp(mul(base.children()[0], e));
    return make_node(Kind::pow, {base, e}, true);
}

Expr pow(Expr base, const Rational& exponent) { return pow(base, constant(exponent)); }
Expr pow(Expr base, long exponent) { return pow(base, integer(exponent)); }
Expr sqrt(Expr a) { return pow(a, Rational(1, 2)); }

Expr exp(Expr a)
{
    if (a.is_zero()) return integer(1);
    if (a.kind() == Kind::log) return a.children()[0];
    return make_node(Kind::exp, {a}, true);
}

Expr log(Expr a)
{
    if (a.is_one()) return integer(0);
    if (a.kind() == Kind::exp) return a.children()[0];
    return make_node(Kind::log, {a}, true);
}

// ---------------------------------------------------------------------------
// Traversals

namespace {

template <class Visit>
void for_each_node(Expr root, Visit&& visit)
{
    std::unordered_set<const Node*> seen;
    std::vector<Expr> stack{root};
    while (!stack.empty()) {
        Expr e = stack.back();
        stack.pop_back();
        if (!seen.insert(e.node()).second) continue;
        visit(e);
        for (Expr c : e.children()) stack.push_back(c);
    }
}

Expr rebuild(Expr e, std::unordered_map<const Node*, Expr>& memo, const std::map<std::string, Expr>* replacements)
{
    if (auto it = memo.find(e.node()); it != memo.end()) return it->second;
    Expr out = e;
    auto child = [&](std::size_t i) { return rebuild(e.children()[i], memo, replacements); };
    switch (e.kind()) {
    case Kind::constant:
    case Kind::function: break;
    case Kind::variable:
    case Kind::parameter:
        if (replacements) {
            if (auto it = replacements->find(e.name()); it != replacements->end()) out = it->second;
        }
        break;
    case Kind::add: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < e.children().size(); ++i) terms.push_back(child(i));
        out = add(terms);
        break;
    }
    case Kind::mul: {
        std::vector<Expr> factors;
        for (std::size_t i = 0; i < e.children().size(); ++i) factors.push_back(child(i));
        out = mul(factors);
        break;
    }
    case Kind::div: out = div(child(0), child(1)); break;
    case Kind::neg: out = neg(child(0)); break;
    case Kind::pow: out = pow(child(0), child(1)); break;
    case Kind::exp: out = exp(child(0)); break;
    case Kind::log: out = log(child(0)); break;
    }
    memo.emplace(e.node(), out);
    return out;
}

} // namespace

Expr simplify(Expr e)
{
    std::unordered_map<const Node*, Expr> memo;
    Expr out = rebuild(e, memo, nullptr);
    if (out == e) return e;
    return dag_size(out) <= dag_size(e) ? out : e;
}

Expr canonicalize(Expr e)
{
    std::unordered_map<const Node*, Expr> memo;
    return rebuild(e, memo, nullptr);
}

bool has_constant_singularity(Expr e)
{
    bool found = false;
    for_each_node(e, [&](Expr n) {
        if (n.kind() == Kind::pow && n.children()[0].is_zero() && n.children()[1].is_constant() && sgn(n.children()[1].value()) < 0)
            found = true;
        if (n.kind() == Kind::div && n.children()[1].is_zero()) found = true;
    });
    return found;
}

std::size_t dag_size(Expr e)
{
    std::size_t count = 0;
    for_each_node(e, [&](Expr) { ++count; });
    return count;
}

Expr partial(Expr e, Var v)
{
    if (!e.depends_on(v)) return integer(0);
    const std::uint64_t key = (static_cast<std::uint64_t>(e.id()) << 1) | (v == Var::y ? 1u : 0u);
    Expr cached;
    if (pool().lookup_partial(key, cached)) return cached;

    auto d = [v](Expr c) { return partial(c, v); };
    Expr out;
    auto ch = e.children();
    switch (e.kind()) {
    case Kind::constant:
    case Kind::parameter: out = integer(0); break;
    case Kind::variable: out = integer(e.name() == (v == Var::x ? "x" : "y") ? 1 : 0); break;
    case Kind::function: {
        auto j = e.jet();
        out = v == Var::x ? function(e.name(), j[0] + 1, j[1]) : function(e.name(), j[0], j[1] + 1);
        break;
    }
    case Kind::add: {
        std::vector<Expr> terms;
        for (Expr c : ch)
            if (c.depends_on(v)) terms.push_back(d(c));
        out = add(terms);
        break;
    }
    case Kind::mul: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < ch.size(); ++i) {
            if (!ch[i].depends_on(v)) continue;
            std::vector<Expr> factors;
            factors.reserve(ch.size());
            for (std::size_t j = 0; j < ch.size(); ++j)
                if (j != i) factors.push_back(ch[j]);
            factors.push_back(d(ch[i]));
            terms.push_back(mul(factors));
        }
        out = add(terms);
        break;
    }
    case Kind::div: {
        Expr a = ch[0], b = ch[1];
        out = sub(div(d(a), b), div(mul(a, d(b)), pow(b, 2L)));
        break;
    }
    case Kind::neg: out = neg(d(ch[0])); break;
    case Kind::pow: {
        Expr b = ch[0], x = ch[1];
        if (!x.depends_on(Var::x) && !x.depends_on(Var::y)) {
            out = mul(x, pow(b, sub(x, integer(1))), d(b));
        } else {
            Expr inner = add(mul(d(x), log(b)), mul(x, d(b), pow(b, -1L)));
            out = mul(e.is_canonical() ? e : pow(b, x), inner);
        }
        break;
    }
    case Kind::exp: out = mul(e.is_canonical() ? e : exp(ch[0]), d(ch[0])); break;
    case Kind::log: out = div(d(ch[0]), ch[0]); break;
    }
    pool().store_partial(key, out);
    return out;
}

Expr substitute(Expr e, const std::map<std::string, Expr>& replacements)
{
    std::unordered_map<const Node*, Expr> memo;
    return rebuild(e, memo, &replacements);
}

Expr abstract_exponentials(Expr e, std::vector<std::string>& names)
{
    e = canonicalize(e);
    std::vector<Expr> exps;
    for_each_node(e, [&](Expr n) {
        if (n.kind() == Kind::exp) exps.push_back(n);
    });
    std::sort(exps.begin(), exps.end(), structural_less);
    names.clear();
    // exp(c w) with integer c becomes E_w^c so that exp(x) and exp(-x) stay related
    std::unordered_map<const Node*, Expr> atoms;
    auto atom = [&](Expr core) {
        if (auto it = atoms.find(core.node()); it != atoms.end()) return it->second;
        names.push_back("exp#" + std::to_string(names.size()));
        return atoms.emplace(core.node(), parameter(names.back())).first->second;
    };
    std::unordered_map<const Node*, Expr> memo;
    for (Expr n : exps) {
        const Expr u = n.children()[0];
        std::vector<Expr> terms;
        if (u.kind() == Kind::add && u.is_canonical_node())
            terms.assign(u.children().begin(), u.children().end());
        else
            terms.push_back(u);
        std::vector<Expr> factors;
        for (Expr t : terms) {
            if (t.kind() == Kind::mul && t.is_canonical_node() && t.children()[0].is_constant() && is_integer_constant(t.children()[0]) &&
                t.children()[0].value().get_num().fits_slong_p()) {
                auto ch = t.children();
                const Expr core = mul(std::vector<Expr>(ch.begin() + 1, ch.end()));
                factors.push_back(pow(atom(core), ch[0].value().get_num().get_si()));
            } else {
                factors.push_back(atom(t));
            }
        }
        memo.emplace(n.node(), mul(factors));
    }
    return rebuild(e, memo, nullptr);
}

std::vector<std::string> parameters(Expr e)
{
    std::vector<std::string> names;
    if (!e.has_parameters()) return names;
    for_each_node(e, [&](Expr n) {
        if (n.kind() == Kind::parameter) names.push_back(n.name());
    });
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

int max_function_order(Expr e, std::string_view name)
{
    int best = -1;
    if (!e.has_functions()) return best;
    for_each_node(e, [&](Expr n) {
        if (n.kind() == Kind::function && n.name() == name) best = std::max(best, n.jet()[0] + n.jet()[1]);
    });
    return best;
}

std::size_t pool_size() { return pool().size(); }

} // namespace weblin
