#include "weblin/report.hpp"

#include <charconv>
#include <iomanip>

namespace weblin {

std::string decimal_string(const Rational& q)
{
    mpz_class den = q.get_den();
    int twos = 0, fives = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
        den /= 2;
        ++twos;
    }
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
        den /= 5;
        ++fives;
    }
    if (den != 1) return to_string(q);
    const int digits = std::max(twos, fives);
    if (digits == 0) return q.get_num().get_str();
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    const mpz_class scaled = q.get_num() * (scale / q.get_den());
    mpz_class mag = abs(scaled);
    std::string s = mag.get_str();
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    return (sgn(scaled) < 0 ? "-" : "") + s;
}

std::string decimal_string(double d)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::json domain_json(const Domain& d)
{
    return {decimal_string(d.x_lo), decimal_string(d.x_hi), decimal_string(d.y_lo), decimal_string(d.y_hi)};
}

std::string orders_text(const DiffOrder& o)
{
    return "f" + std::to_string(o.f) + " g" + std::to_string(o.g) + " a" + std::to_string(o.a);
}

const char* mode_name(Mode m) { return m == Mode::exact ? "exact" : "float"; }

} // namespace

nlohmann::json config_json(const RunConfig& c)
{
    nlohmann::json params = nlohmann::json::object();
    for (auto& [k, v] : c.params) params[k] = v;
    nlohmann::json j = {
        {"command", c.command},
        {"domain", domain_json(c.domain)},
        {"seed", std::to_string(c.seed)},
        {"samples", std::to_string(c.policy.points)},
        {"parameter_draws", std::to_string(c.policy.parameter_draws)},
        {"precision", std::to_string(c.policy.precision)},
        {"params", params},
        {"grid", std::to_string(c.linearizer.grid)},
        {"base", c.linearizer.base ? nlohmann::json{decimal_string((*c.linearizer.base)[0]), decimal_string((*c.linearizer.base)[1])}
                                   : nlohmann::json(nullptr)},
        {"lambda0", {decimal_string(c.linearizer.lambda0[0]), decimal_string(c.linearizer.lambda0[1])}},
        {"leaves", std::to_string(c.linearizer.leaves)},
        {"force", c.linearizer.force},
        {"json", c.json},
        {"svg", c.svg.empty() ? nlohmann::json(nullptr) : nlohmann::json(c.svg)},
        {"example", c.example ? nlohmann::json(std::to_string(*c.example)) : nlohmann::json(nullptr)},
    };
    return j;
}

nlohmann::json invariant_json(const InvariantReport& r)
{
    nlohmann::json evidence = nlohmann::json::array();
    for (auto& e : r.test.evidence) {
        nlohmann::json params = nlohmann::json::object();
        for (auto& [k, v] : e.point.params) params[k] = decimal_string(v);
        evidence.push_back({{"point", {decimal_string(e.point.x), decimal_string(e.point.y)}},
                            {"params", params},
                            {"residual", e.residual},
                            {"mode", mode_name(e.mode)},
                            {"passed", e.passed}});
    }
    nlohmann::json j = {{"name", r.name}, {"verdict", to_string(r.test.verdict)}, {"dag_size", r.dag_size}, {"evidence", evidence}};
    if (!r.test.reason.empty()) j["reason"] = r.test.reason;
    if (r.order) j["order"] = {{"f", r.order->f}, {"g", r.order->g}, {"a", r.order->a}};
    return j;
}

nlohmann::json linearization_json(const LinearizationResult& r)
{
    const Grid& g = r.grid;
    auto field = [](const ScalarField& s) {
        nlohmann::json a = nlohmann::json::array();
        for (double v : s.values) a.push_back(decimal_string(v));
        return a;
    };
    nlohmann::json straight = nlohmann::json::array();
    for (auto& s : r.straightness)
        straight.push_back({{"foliation", s.name}, {"residual", decimal_string(s.residual)}, {"traced", s.traced}, {"skipped", s.skipped}});
    return {
        {"grid",
         {{"nx", g.nx},
          {"ny", g.ny},
          {"rectangle", {decimal_string(g.x_lo), decimal_string(g.x_hi), decimal_string(g.y_lo), decimal_string(g.y_hi)}}}},
        {"base", {decimal_string(r.base[0]), decimal_string(r.base[1])}},
        {"lambda0", {decimal_string(r.lambda0[0]), decimal_string(r.lambda0[1])}},
        {"flatness_residual", decimal_string(r.flatness_residual)},
        {"path_independence_residual", decimal_string(r.path_independence_residual)},
        {"closedness_residual", decimal_string(r.closedness_residual)},
        {"min_jacobian", decimal_string(r.min_jacobian)},
        {"straightness", straight},
        {"warnings", r.warnings},
        {"u", field(r.u)},
        {"v", field(r.v)},
    };
}

nlohmann::json report_json(const RunConfig& config, const WebVerdict& verdict, const LinearizationResult* lin)
{
    nlohmann::json invariants = nlohmann::json::array();
    for (auto& r : verdict.reports) invariants.push_back(invariant_json(r));
    return {
        {"web", {{"f", config.f}, {"g", config.gs}}},
        {"config", config_json(config)},
        {"invariants", invariants},
        {"verdict", to_string(verdict.outcome)},
        {"linearization", lin ? linearization_json(*lin) : nlohmann::json(nullptr)},
    };
}

void print_verdict(std::ostream& os, const RunConfig& config, const WebVerdict& verdict, bool evidence_tables)
{
    os << "web: f = " << config.f;
    for (std::size_t k = 0; k < config.gs.size(); ++k) os << ", g" << k + 4 << " = " << config.gs[k];
    os << "\n";
    os << "domain: [" << decimal_string(config.domain.x_lo) << ", " << decimal_string(config.domain.x_hi) << "] x ["
       << decimal_string(config.domain.y_lo) << ", " << decimal_string(config.domain.y_hi) << "]  seed " << config.seed << "\n";
    for (auto& r : verdict.reports) {
        os << "  " << std::left << std::setw(4) << r.name << " " << std::setw(12) << to_string(r.test.verdict);
        if (!r.test.evidence.empty()) os << " " << std::setw(5) << mode_name(r.test.mode);
        os << " dag " << std::setw(6) << r.dag_size;
        if (r.order) os << " orders " << orders_text(*r.order);
        os << " " << std::fixed << std::setprecision(3) << r.elapsed_seconds << "s" << std::defaultfloat;
        if (!r.test.reason.empty()) os << "  (" << r.test.reason << ")";
        os << "\n";
        for (auto& e : r.test.evidence) {
            if (!evidence_tables && (e.passed || r.test.verdict != Verdict::nonzero)) continue;
            os << "      " << (e.passed ? "pass" : "FAIL") << " at (" << decimal_string(e.point.x) << ", " << decimal_string(e.point.y) << ")";
            for (auto& [k, v] : e.point.params) os << " " << k << "=" << decimal_string(v);
            os << "  residual " << e.residual << "\n";
            if (!evidence_tables) break;
        }
    }
    os << "verdict: " << to_string(verdict.outcome) << "\n";
}

void print_linearization(std::ostream& os, const LinearizationResult& r)
{
    os << "grid " << r.grid.nx << "x" << r.grid.ny << " base (" << r.base[0] << ", " << r.base[1] << ") lambda0 (" << r.lambda0[0] << ", "
       << r.lambda0[1] << ")\n";
    os << std::scientific << std::setprecision(3);
    os << "  flatness residual          " << r.flatness_residual << "\n";
    os << "  path independence residual " << r.path_independence_residual << "\n";
    os << "  closedness residual        " << r.closedness_residual << "\n";
    os << "  min |jacobian|             " << r.min_jacobian << "\n";
    os << "  straightness:\n";
    for (auto& s : r.straightness)
        os << "    " << std::left << std::setw(4) << s.name << " " << s.residual << "  (" << s.traced << " leaves, " << s.skipped << " skipped)\n";
    os << std::defaultfloat;
    for (auto& w : r.warnings) os << "warning: " << w << "\n";
}

} // namespace weblin
