#include "weblin/numeric.hpp"

#include <cctype>
#include <stdexcept>
#include <vector>

namespace weblin {

Rational parse_rational(std::string_view text)
{
    auto digits_only = [](std::string_view s) {
        if (s.empty()) return false;
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    Rational result;
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
        auto num = body.substr(0, slash);
        auto den = body.substr(slash + 1);
        if (!digits_only(num) || !digits_only(den)) throw std::invalid_argument("malformed rational: " + std::string(text));
        mpz_class d{std::string(den), 10};
        if (d == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
        result = Rational(mpz_class(std::string(num), 10), d);
    } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
        auto whole = body.substr(0, dot);
        auto frac = body.substr(dot + 1);
        if ((whole.empty() && frac.empty()) || (!whole.empty() && !digits_only(whole)) || (!frac.empty() && !digits_only(frac)))
            throw std::invalid_argument("malformed decimal: " + std::string(text));
        std::string all = std::string(whole) + std::string(frac);
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
        result = Rational(mpz_class(all.empty() ? std::string("0") : all, 10), scale);
    } else {
        if (!digits_only(body)) throw std::invalid_argument("malformed integer: " + std::string(text));
        result = Rational(mpz_class(std::string(body), 10));
    }
    result.canonicalize();
    return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& q) { return q.get_str(); }

bool exact_root(const Rational& value, unsigned long degree, Rational& out)
{
    if (degree == 0) return false;
    if (sgn(value) < 0) {
        if (degree % 2 == 0) return false;
        Rational pos = -value;
        if (!exact_root(pos, degree, out)) return false;
        out = -out;
        return true;
    }
    mpz_class num, den;
    if (mpz_root(num.get_mpz_t(), value.get_num_mpz_t(), degree) == 0) return false;
    if (mpz_root(den.get_mpz_t(), value.get_den_mpz_t(), degree) == 0) return false;
    out = Rational(num, den);
    out.canonicalize();
    return true;
}

Rational rational_pow(const Rational& base, long exponent)
{
    const unsigned long e = exponent < 0 ? static_cast<unsigned long>(-exponent) : static_cast<unsigned long>(exponent);
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
    if (exponent < 0) {
        if (num == 0) throw std::domain_error("zero raised to a negative power");
        std::swap(num, den);
    }
    Rational r(num, den);
    r.canonicalize();
    return r;
}

BigFloat::BigFloat(mpfr_prec_t bits)
{
    mpfr_init2(value_, bits);
    mpfr_set_zero(value_, 1);
}

BigFloat::BigFloat(const Rational& q, mpfr_prec_t bits)
{
    mpfr_init2(value_, bits);
    mpfr_set_q(value_, q.get_mpq_t(), MPFR_RNDN);
}

BigFloat::BigFloat(double d, mpfr_prec_t bits)
{
    mpfr_init2(value_, bits);
    mpfr_set_d(value_, d, MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat& other)
{
    mpfr_init2(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept
{
    mpfr_init2(value_, other.precision());
    mpfr_swap(value_, other.value_);
}

BigFloat& BigFloat::operator=(const BigFloat& other)
{
    if (this != &other) {
        mpfr_set_prec(value_, other.precision());
        mpfr_set(value_, other.value_, MPFR_RNDN);
    }
    return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept
{
    mpfr_swap(value_, other.value_);
    return *this;
}

BigFloat::~BigFloat() { mpfr_clear(value_); }

std::string BigFloat::to_string(int digits) const
{
    if (mpfr_nan_p(value_)) return "nan";
    if (mpfr_inf_p(value_)) return sign() < 0 ? "-inf" : "inf";
    if (is_zero()) return "0";
    mpfr_exp_t exponent = 0;
    char* raw = mpfr_get_str(nullptr, &exponent, 10, static_cast<size_t>(digits), value_, MPFR_RNDN);
    std::string mant(raw);
    mpfr_free_str(raw);
    std::string sign_str;
    if (!mant.empty() && mant.front() == '-') {
        sign_str = "-";
        mant.erase(0, 1);
    }
    // mpfr gives 0.d1d2... * 10^exponent
    while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
    std::string out = sign_str + mant.substr(0, 1);
    if (mant.size() > 1) out += "." + mant.substr(1);
    out += "e" + std::to_string(static_cast<long>(exponent) - 1);
    return out;
}

BigFloat BigFloat::abs() const
{
    BigFloat r(precision());
    mpfr_abs(r.value_, value_, MPFR_RNDN);
    return r;
}

BigFloat operator+(const BigFloat& a, const BigFloat& b)
{
    BigFloat r(a.precision());
    mpfr_add(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}

BigFloat operator-(const BigFloat& a, const BigFloat& b)
{
    BigFloat r(a.precision());
    mpfr_sub(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}

BigFloat operator*(const BigFloat& a, const BigFloat& b)
{
    BigFloat r(a.precision());
    mpfr_mul(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}

BigFloat operator/(const BigFloat& a, const BigFloat& b)
{
    BigFloat r(a.precision());
    mpfr_div(r.value_, a.value_, b.value_, MPFR_RNDN);
    return r;
}

BigFloat operator-(const BigFloat& a)
{
    BigFloat r(a.precision());
    mpfr_neg(r.value_, a.value_, MPFR_RNDN);
    return r;
}

BigFloat pow(const BigFloat& base, const BigFloat& exponent)
{
    BigFloat r(base.precision());
    mpfr_pow(r.get(), base.get(), exponent.get(), MPFR_RNDN);
    return r;
}

BigFloat exp(const BigFloat& x)
{
    BigFloat r(x.precision());
    mpfr_exp(r.get(), x.get(), MPFR_RNDN);
    return r;
}

BigFloat log(const BigFloat& x)
{
    BigFloat r(x.precision());
    mpfr_log(r.get(), x.get(), MPFR_RNDN);
    return r;
}

BigFloat power_of_two(long e, mpfr_prec_t bits)
{
    BigFloat r(bits);
    mpfr_set_ui_2exp(r.get(), 1, e, MPFR_RNDN);
    return r;
}

} // namespace weblin
