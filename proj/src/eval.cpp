#include "weblin/eval.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <unordered_map>

namespace weblin {

const char* to_string(EvalFailure f)
{
    switch (f) {
    case EvalFailure::singular: return "singular";
    case EvalFailure::domain: return "domain";
    case EvalFailure::not_exact: return "not_exact";
    case EvalFailure::unbound: return "unbound";
    case EvalFailure::abstract_function: return "abstract_function";
    }
    return "?";
}

bool exact_eligible(Expr e) { return !e.has_transcendental() && !e.has_fractional_power() && !e.has_functions(); }

Program::Program(std::vector<Expr> roots)
{
    std::unordered_map<const Node*, std::uint32_t> index;
    std::vector<std::string> params;
    for (Expr r : roots)
        for (auto& p : parameters(r)) params.push_back(p);
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());
    symbols_ = {"x", "y"};
    symbols_.insert(symbols_.end(), params.begin(), params.end());

    // iterative post-order
    std::vector<std::pair<Expr, bool>> stack;
    for (Expr root : roots) {
        stack.emplace_back(root, false);
        while (!stack.empty()) {
            auto [e, expanded] = stack.back();
            stack.pop_back();
            if (index.count(e.node())) continue;
            if (!expanded) {
                stack.emplace_back(e, true);
                for (Expr c : e.children())
                    if (!index.count(c.node())) stack.emplace_back(c, false);
                continue;
            }
            Instr in{e.kind()};
            switch (e.kind()) {
            case Kind::constant:
                in.slot = static_cast<std::int32_t>(constants_.size());
                constants_.push_back(e.value());
                constants_double_.push_back(e.value().get_d());
                break;
            case Kind::variable:
            case Kind::parameter:
                in.slot = static_cast<std::int32_t>(std::find(symbols_.begin(), symbols_.end(), e.name()) - symbols_.begin());
                break;
            default:
                in.first = static_cast<std::uint32_t>(args_.size());
                in.count = static_cast<std::uint32_t>(e.children().size());
                for (Expr c : e.children()) args_.push_back(index.at(c.node()));
                break;
            }
            std::int64_t k = INT64_MIN;
            if (e.kind() == Kind::pow) {
                Expr ex = e.children()[1];
                if (ex.is_constant() && is_integer(ex.value()) && ex.value().get_num().fits_slong_p()) k = ex.value().get_num().get_si();
            }
            integer_exponents_.push_back(k);
            index.emplace(e.node(), static_cast<std::uint32_t>(code_.size()));
            code_.push_back(in);
        }
        roots_.push_back(index.at(root.node()));
    }
}

namespace {

// MPFR caches constants per thread; worker threads release theirs on exit.
struct MpfrCacheRelease {
    ~MpfrCacheRelease() { mpfr_free_cache2(MPFR_FREE_LOCAL_CACHE); }
};
thread_local MpfrCacheRelease mpfr_cache_release;

std::vector<std::optional<Rational>> bind(const std::vector<std::string>& symbols, const Bindings& bindings)
{
    std::vector<std::optional<Rational>> values;
    for (auto& s : symbols) {
        auto it = bindings.find(s);
        if (it == bindings.end()) {
            values.push_back(std::nullopt);
        } else {
            Rational v = it->second;
            v.canonicalize();
            values.push_back(v);
        }
    }
    return values;
}

[[noreturn]] void fail(EvalFailure reason, const std::string& what) { throw EvalError(reason, what); }

} // namespace

std::vector<Rational> Program::run_exact(const Bindings& bindings) const
{
    const auto sym = bind(symbols_, bindings);
    std::vector<Rational> v(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& in = code_[i];
        const std::uint32_t* a = args_.data() + in.first;
        switch (in.kind) {
        case Kind::constant: v[i] = constants_[static_cast<std::size_t>(in.slot)]; break;
        case Kind::variable:
        case Kind::parameter:
            if (!sym[static_cast<std::size_t>(in.slot)]) fail(EvalFailure::unbound, "unbound symbol " + symbols_[static_cast<std::size_t>(in.slot)]);
            v[i] = *sym[static_cast<std::size_t>(in.slot)];
            break;
        case Kind::function: fail(EvalFailure::abstract_function, "abstract function has no value");
        case Kind::add:
            v[i] = v[a[0]];
            for (std::uint32_t j = 1; j < in.count; ++j) v[i] += v[a[j]];
            break;
        case Kind::mul:
            v[i] = v[a[0]];
            for (std::uint32_t j = 1; j < in.count; ++j) v[i] *= v[a[j]];
            break;
        case Kind::div:
            if (sgn(v[a[1]]) == 0) fail(EvalFailure::singular, "division by zero");
            v[i] = v[a[0]] / v[a[1]];
            break;
        case Kind::neg: v[i] = -v[a[0]]; break;
        case Kind::pow: {
            const Rational& b = v[a[0]];
            const Rational& e = v[a[1]];
            if (sgn(b) == 0) {
                if (sgn(e) <= 0) fail(EvalFailure::singular, "zero to a non-positive power");
                v[i] = 0;
                break;
            }
            if (!e.get_num().fits_slong_p() || !e.get_den().fits_ulong_p()) fail(EvalFailure::not_exact, "exponent too large");
            const long p = e.get_num().get_si();
            const unsigned long q = e.get_den().get_ui();
            if (q == 1) {
                v[i] = rational_pow(b, p);
                break;
            }
            if (sgn(b) < 0 && q % 2 == 0) fail(EvalFailure::domain, "even root of a negative number");
            Rational root;
            if (!exact_root(abs(b), q, root)) fail(EvalFailure::not_exact, "irrational root");
            if (sgn(b) < 0) root = -root;
            v[i] = rational_pow(root, p);
            break;
        }
        case Kind::exp:
            if (sgn(v[a[0]]) != 0) fail(EvalFailure::not_exact, "exp of a non-zero rational");
            v[i] = 1;
            break;
        case Kind::log:
            if (sgn(v[a[0]]) <= 0) fail(EvalFailure::domain, "log of a non-positive number");
            if (v[a[0]] != 1) fail(EvalFailure::not_exact, "log of a rational other than 1");
            v[i] = 0;
            break;
        }
    }
    std::vector<Rational> out;
    for (auto r : roots_) out.push_back(v[r]);
    return out;
}

std::vector<BigFloat> Program::run_float(const Bindings& bindings, mpfr_prec_t precision, BigFloat* scale) const
{
    (void)&mpfr_cache_release;
    const auto sym = bind(symbols_, bindings);
    std::vector<BigFloat> v(code_.size(), BigFloat(precision));
    BigFloat biggest(0.0, precision);
    BigFloat tmp(precision);
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& in = code_[i];
        const std::uint32_t* a = args_.data() + in.first;
        mpfr_ptr r = v[i].get();
        switch (in.kind) {
        case Kind::constant: mpfr_set_q(r, constants_[static_cast<std::size_t>(in.slot)].get_mpq_t(), MPFR_RNDN); break;
        case Kind::variable:
        case Kind::parameter:
            if (!sym[static_cast<std::size_t>(in.slot)]) fail(EvalFailure::unbound, "unbound symbol " + symbols_[static_cast<std::size_t>(in.slot)]);
            mpfr_set_q(r, sym[static_cast<std::size_t>(in.slot)]->get_mpq_t(), MPFR_RNDN);
            break;
        case Kind::function: fail(EvalFailure::abstract_function, "abstract function has no value");
        case Kind::add:
            mpfr_set(r, v[a[0]].get(), MPFR_RNDN);
            for (std::uint32_t j = 1; j < in.count; ++j) mpfr_add(r, r, v[a[j]].get(), MPFR_RNDN);
            break;
        case Kind::mul:
            mpfr_set(r, v[a[0]].get(), MPFR_RNDN);
            for (std::uint32_t j = 1; j < in.count; ++j) mpfr_mul(r, r, v[a[j]].get(), MPFR_RNDN);
            break;
        case Kind::div:
            if (v[a[1]].is_zero()) fail(EvalFailure::singular, "division by zero");
            mpfr_div(r, v[a[0]].get(), v[a[1]].get(), MPFR_RNDN);
            break;
        case Kind::neg: mpfr_neg(r, v[a[0]].get(), MPFR_RNDN); break;
        case Kind::pow: {
            const BigFloat& b = v[a[0]];
            const std::int64_t k = integer_exponents_[i];
            if (k != INT64_MIN) {
                if (b.is_zero() && k <= 0) fail(EvalFailure::singular, "zero to a non-positive power");
                mpfr_pow_si(r, b.get(), static_cast<long>(k), MPFR_RNDN);
                break;
            }
            const BigFloat& e = v[a[1]];
            if (b.is_zero()) {
                if (e.sign() <= 0) fail(EvalFailure::singular, "zero to a non-positive power");
                mpfr_set_zero(r, 1);
                break;
            }
            if (b.sign() < 0) {
                const Instr& ei = code_[a[1]];
                if (ei.kind != Kind::constant) fail(EvalFailure::domain, "negative base with a variable exponent");
                const Rational& q = constants_[static_cast<std::size_t>(ei.slot)];
                if (q.get_den() % 2 == 0) fail(EvalFailure::domain, "even root of a negative number");
                mpfr_neg(tmp.get(), b.get(), MPFR_RNDN);
                mpfr_pow(r, tmp.get(), e.get(), MPFR_RNDN);
                if (q.get_num() % 2 != 0) mpfr_neg(r, r, MPFR_RNDN);
                break;
            }
            mpfr_pow(r, b.get(), e.get(), MPFR_RNDN);
            break;
        }
        case Kind::exp: mpfr_exp(r, v[a[0]].get(), MPFR_RNDN); break;
        case Kind::log:
            if (v[a[0]].sign() <= 0) fail(EvalFailure::domain, "log of a non-positive number");
            mpfr_log(r, v[a[0]].get(), MPFR_RNDN);
            break;
        }
        if (!v[i].is_finite()) fail(EvalFailure::domain, "non-finite intermediate");
        if (scale) {
            if (mpfr_cmpabs(r, biggest.get()) > 0) mpfr_abs(biggest.get(), r, MPFR_RNDN);
        }
    }
    if (scale) *scale = biggest;
    std::vector<BigFloat> out;
    for (auto r : roots_) out.push_back(v[r]);
    return out;
}

bool Program::run_double(std::span<const double> symbols, std::span<double> out) const
{
    std::vector<double> v(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& in = code_[i];
        const std::uint32_t* a = args_.data() + in.first;
        double r = 0;
        switch (in.kind) {
        case Kind::constant: r = constants_double_[static_cast<std::size_t>(in.slot)]; break;
        case Kind::variable:
        case Kind::parameter:
            if (static_cast<std::size_t>(in.slot) >= symbols.size()) return false;
            r = symbols[static_cast<std::size_t>(in.slot)];
            break;
        case Kind::function: return false;
        case Kind::add:
            r = v[a[0]];
            for (std::uint32_t j = 1; j < in.count; ++j) r += v[a[j]];
            break;
        case Kind::mul:
            r = v[a[0]];
            for (std::uint32_t j = 1; j < in.count; ++j) r *= v[a[j]];
            break;
        case Kind::div:
            if (v[a[1]] == 0) return false;
            r = v[a[0]] / v[a[1]];
            break;
        case Kind::neg: r = -v[a[0]]; break;
        case Kind::pow: {
            const double b = v[a[0]];
            const std::int64_t k = integer_exponents_[i];
            if (k != INT64_MIN) {
                if (b == 0 && k <= 0) return false;
                r = std::pow(b, static_cast<double>(k));
                break;
            }
            const double e = v[a[1]];
            if (b < 0) {
                const Instr& ei = code_[a[1]];
                if (ei.kind != Kind::constant) return false;
                const Rational& q = constants_[static_cast<std::size_t>(ei.slot)];
                if (q.get_den() % 2 == 0) return false;
                r = std::pow(-b, e);
                if (q.get_num() % 2 != 0) r = -r;
                break;
            }
            if (b == 0 && e <= 0) return false;
            r = std::pow(b, e);
            break;
        }
        case Kind::exp: r = std::exp(v[a[0]]); break;
        case Kind::log:
            if (v[a[0]] <= 0) return false;
            r = std::log(v[a[0]]);
            break;
        }
        if (!std::isfinite(r)) return false;
        v[i] = r;
    }
    for (std::size_t j = 0; j < roots_.size() && j < out.size(); ++j) out[j] = v[roots_[j]];
    return true;
}

Value evaluate(Expr e, const EvalContext& ctx)
{
    Program prog({e});
    Value out;
    out.mode = ctx.mode;
    if (ctx.mode == Mode::exact) {
        if (e.has_functions()) fail(EvalFailure::abstract_function, "abstract function has no value");
        out.exact = prog.run_exact(ctx.bindings)[0];
        return out;
    }
    out.scale = BigFloat(ctx.precision);
    out.approx = prog.run_float(ctx.bindings, ctx.precision, &out.scale)[0];
    return out;
}

Rational evaluate_exact(Expr e, const Bindings& bindings) { return Program({e}).run_exact(bindings)[0]; }

BigFloat evaluate_float(Expr e, const Bindings& bindings, mpfr_prec_t precision)
{
    return Program({e}).run_float(bindings, precision)[0];
}

} // namespace weblin
