#pragma once

// Linearizability invariants of a d-web and the sampling zero test that
// decides whether they vanish identically.

#include "weblin/calculus.hpp"

#include <optional>
#include <string>
#include <vector>

namespace weblin {

enum class Verdict { zero, nonzero, inconclusive };
enum class Outcome { yes, no, inconclusive };

const char* to_string(Verdict v);
const char* to_string(Outcome o);

struct ZeroTestPolicy {
    int points = 8;
    int parameter_draws = 3; // used only when the web has free parameters
    mpfr_prec_t precision = 256;
    int max_rejections = 100;
    unsigned threads = 0; // 0: hardware concurrency
};

struct Evidence {
    SamplePoint point;
    std::string residual; // decimal
    Mode mode = Mode::exact;
    bool passed = false;
};

struct ZeroTestResult {
    Verdict verdict = Verdict::inconclusive;
    Mode mode = Mode::exact;
    std::vector<Evidence> evidence;
    std::string reason; // set for INCONCLUSIVE
};

/// ZERO iff every scheduled sample vanishes: exactly, or in float mode
/// |e| < 2^(-precision/2) * max(1, largest intermediate). NONZERO needs one
/// exact failure or two float failures. Expressions whose only obstacle to
/// exact evaluation are exponentials that cancel are evaluated exactly.
ZeroTestResult zero_test(Expr e, const WebSpec& web, const ZeroTestPolicy& policy = {});

/// Highest derivative order of f, of g and of the basic invariant a reached
/// while building an expression (-1 when absent).
struct DiffOrder {
    int f = -1;
    int g = -1;
    int a = -1;
};

struct Tracked {
    Expr e;
    DiffOrder order;
};

Expr I1_of_mu(Expr mu, const WebSpec& web);
Expr I2_of_mu(Expr mu, const WebSpec& web);

/// I1, I2 of the 4-subweb (x, y, f, g_alpha) with derivative orders recorded.
/// Throws std::logic_error if the f-order exceeds 4.
Tracked I1_tracked(const WebSpec& web, int alpha = 4);
Tracked I2_tracked(const WebSpec& web, int alpha = 4);

class DegenerateDirection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// I(f, p) = [(∂1p)^2 ∂2^2p - 2 ∂1p ∂2p ∂1∂2p + (∂2p)^2 ∂1^2p] / [∂1p ∂2p (∂2p - ∂1p)].
Expr I_fp(const WebSpec& web, Expr p);

/// J_alpha = I(f, g_alpha) - I(f, g_4), alpha >= 5.
Expr J_invariant(const WebSpec& web, int alpha);

struct InvariantReport {
    std::string name;
    Expr expr;
    std::size_t dag_size = 0;
    ZeroTestResult test;
    std::optional<DiffOrder> order;
    double elapsed_seconds = 0;
};

struct WebVerdict {
    Outcome outcome = Outcome::inconclusive;
    std::vector<InvariantReport> reports;
};

InvariantReport run_invariant(std::string name, Expr e, const WebSpec& web, const ZeroTestPolicy& policy);

/// YES iff every verdict is ZERO; NO if any is NONZERO; INCONCLUSIVE otherwise.
Outcome aggregate(const std::vector<InvariantReport>& reports);

WebVerdict check_4web(Expr f, Expr g, const Domain& domain, std::uint64_t seed = 1, const ZeroTestPolicy& policy = {});
/// I1, I2 of (f, g_4) and J_5 ... J_d.
WebVerdict check_dweb(const WebSpec& web, const ZeroTestPolicy& policy = {});

} // namespace weblin
