#pragma once

// Evaluation of expression DAGs: exact rationals, MPFR floats, doubles.

#include "weblin/expr.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace weblin {

enum class EvalFailure {
    singular,          // division by zero at the point
    domain,            // negative radicand, log of non-positive, ...
    not_exact,         // irrational value requested in exact mode
    unbound,           // symbol without a binding
    abstract_function, // function nodes have no values
};

const char* to_string(EvalFailure f);

class EvalError : public std::runtime_error {
public:
    EvalError(EvalFailure reason, const std::string& message) : std::runtime_error(message), reason_(reason) {}
    EvalFailure reason() const { return reason_; }

private:
    EvalFailure reason_;
};

enum class Mode { exact, floating };

using Bindings = std::map<std::string, Rational>;

struct EvalContext {
    Bindings bindings; // x, y and every parameter
    Mode mode = Mode::exact;
    mpfr_prec_t precision = 256;
};

struct Value {
    Mode mode = Mode::exact;
    Rational exact;
    BigFloat approx;
    /// Largest |node value| met during a float evaluation.
    BigFloat scale;
};

/// True when exact evaluation cannot be refused up front: no exp/log, no
/// non-integer powers, no function nodes.
bool exact_eligible(Expr e);

Value evaluate(Expr e, const EvalContext& ctx);
Rational evaluate_exact(Expr e, const Bindings& bindings);
BigFloat evaluate_float(Expr e, const Bindings& bindings, mpfr_prec_t precision);

/// Several roots flattened into one instruction list; shared subexpressions
/// are evaluated once per call.
class Program {
public:
    explicit Program(std::vector<Expr> roots);

    /// Symbol slots: "x", "y", then parameters in sorted order.
    const std::vector<std::string>& symbols() const { return symbols_; }
    std::size_t size() const { return code_.size(); }
    std::size_t root_count() const { return roots_.size(); }

    std::vector<Rational> run_exact(const Bindings& bindings) const;
    /// `scale` receives max |intermediate| when non-null.
    std::vector<BigFloat> run_float(const Bindings& bindings, mpfr_prec_t precision, BigFloat* scale = nullptr) const;
    /// symbols in slot order; writes one value per root; false on any failure.
    bool run_double(std::span<const double> symbols, std::span<double> out) const;

    struct Instr {
        Kind kind;
        std::uint32_t first = 0; // operand offset into args_
        std::uint32_t count = 0;
        std::int32_t slot = -1;  // symbol slot or constant index
    };

private:
    std::vector<Instr> code_;
    std::vector<std::uint32_t> args_;
    std::vector<Rational> constants_;
    std::vector<double> constants_double_;
    std::vector<std::string> symbols_;
    std::vector<std::uint32_t> roots_;

    std::vector<std::int64_t> integer_exponents_; // per instr, INT64_MIN if none
};

} // namespace weblin
