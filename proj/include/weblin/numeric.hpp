#pragma once

// Exact rationals (GMP) and fixed-precision binary floats (MPFR).

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace weblin {

using Rational = mpq_class;

/// Parses "p", "p/q" or a decimal literal such as "0.125" into an exact rational.
/// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

/// True when q is an integer.
inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

/// Exact q-th root of a non-negative rational, if it exists.
bool exact_root(const Rational& value, unsigned long degree, Rational& out);

/// Integer power of a rational; exponent may be negative (value must then be non-zero).
Rational rational_pow(const Rational& base, long exponent);

/// MPFR number with an explicit precision in bits.
///
/// Every operation rounds to nearest at the precision of the left operand
/// (binary ops require equal precision in practice; callers allocate all
/// temporaries at one precision).
class BigFloat {
public:
    explicit BigFloat(mpfr_prec_t bits = 256);
    BigFloat(const Rational& q, mpfr_prec_t bits);
    BigFloat(double d, mpfr_prec_t bits);
    BigFloat(const BigFloat& other);
    BigFloat(BigFloat&& other) noexcept;
    BigFloat& operator=(const BigFloat& other);
    BigFloat& operator=(BigFloat&& other) noexcept;
    ~BigFloat();

    mpfr_prec_t precision() const { return mpfr_get_prec(value_); }
    mpfr_srcptr get() const { return value_; }
    mpfr_ptr get() { return value_; }

    double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(value_) != 0; }
    bool is_finite() const { return mpfr_number_p(value_) != 0; }
    int sign() const { return mpfr_sgn(value_); }

    /// Decimal scientific notation with `digits` significant digits, e.g. "-1.25e-3".
    std::string to_string(int digits = 30) const;

    BigFloat abs() const;

    friend BigFloat operator+(const BigFloat& a, const BigFloat& b);
    friend BigFloat operator-(const BigFloat& a, const BigFloat& b);
    friend BigFloat operator*(const BigFloat& a, const BigFloat& b);
    friend BigFloat operator/(const BigFloat& a, const BigFloat& b);
    friend BigFloat operator-(const BigFloat& a);
    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.value_, b.value_) != 0; }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.value_, b.value_) != 0; }

private:
    mpfr_t value_;
};

BigFloat pow(const BigFloat& base, const BigFloat& exponent);
BigFloat exp(const BigFloat& x);
BigFloat log(const BigFloat& x);
/// 2^e at the given precision.
BigFloat power_of_two(long e, mpfr_prec_t bits);

} // namespace weblin
