#include "weblin/corpus.hpp"

#include "weblin/syntax.hpp"

#include "corpus_data.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace weblin {

namespace {

Outcome outcome_of(const std::string& s)
{
    if (s == "YES") return Outcome::yes;
    if (s == "NO") return Outcome::no;
    return Outcome::inconclusive;
}

CorpusCase read_case(const nlohmann::json& j)
{
    CorpusCase c;
    c.id = j.at("id").get<int>();
    c.name = j.at("name").get<std::string>();
    c.original = j.at("original").get<std::string>();
    c.f = j.at("f").get<std::string>();
    c.gs = j.at("g").get<std::vector<std::string>>();
    const auto d = j.at("domain").get<std::vector<std::string>>();
    if (d.size() != 4) throw std::runtime_error("corpus: domain needs four bounds");
    c.domain = {parse_rational(d[0]), parse_rational(d[1]), parse_rational(d[2]), parse_rational(d[3])};
    c.expected = outcome_of(j.at("expected").get<std::string>());
    c.linearize = j.value("linearize", false);
    if (j.contains("linearize_params"))
        for (auto& [k, v] : j.at("linearize_params").items()) c.linearize_params[k] = parse_rational(v.get<std::string>()).get_d();
    return c;
}

Corpus load()
{
    const auto j = nlohmann::json::parse(detail::corpus_json);
    Corpus c;
    for (auto& e : j.at("examples")) c.examples.push_back(read_case(e));
    for (auto& e : j.at("fixtures")) c.fixtures.push_back(read_case(e));
    c.p = j.at("substitution").at("p").get<std::string>();
    c.q = j.at("substitution").at("q").get<std::string>();
    return c;
}

std::vector<Expr> parse_all(const CorpusCase& c)
{
    std::vector<Expr> gs;
    for (auto& g : c.gs) gs.push_back(parse(g));
    return gs;
}

// Solves phi(t) = target for an increasing phi of one variable by bisection.
double invert(Expr phi, Var v, double target)
{
    const Program prog({phi});
    auto value = [&](double t) {
        std::array<double, 2> s{};
        s[v == Var::x ? 0 : 1] = t;
        std::array<double, 1> out{};
        if (!prog.run_double(s, out)) throw std::runtime_error("corpus: substitution undefined at " + std::to_string(t));
        return out[0];
    };
    double lo = -1, hi = 1;
    while (value(lo) > target) lo *= 2;
    while (value(hi) < target) hi *= 2;
    for (int k = 0; k < 200 && hi - lo > 0; ++k) {
        const double mid = 0.5 * (lo + hi);
        (value(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Rational grid_value(double scaled)
{
    Rational q(static_cast<long>(scaled), Sampler::denominator);
    q.canonicalize();
    return q;
}

Rational round_up(double t) { return grid_value(std::ceil(t * Sampler::denominator)); }
Rational round_down(double t) { return grid_value(std::floor(t * Sampler::denominator)); }

} // namespace

const Corpus& corpus()
{
    static const Corpus c = load();
    return c;
}

const CorpusCase& corpus_case(int id)
{
    for (auto* list : {&corpus().examples, &corpus().fixtures})
        for (auto& c : *list)
            if (c.id == id) return c;
    throw std::out_of_range("no corpus case " + std::to_string(id));
}

WebSpec make_web(const CorpusCase& c, std::uint64_t seed) { return WebSpec(parse(c.f), parse_all(c), c.domain, seed); }

WebSpec substituted_web(const CorpusCase& c, std::uint64_t seed)
{
    const Expr p = parse(corpus().p), q = parse(corpus().q);
    if (p.depends_on(Var::y) || q.depends_on(Var::x)) throw std::runtime_error("corpus: substitution must be p(x), q(y)");
    Domain d;
    d.x_lo = round_up(invert(p, Var::x, c.domain.x_lo.get_d()));
    d.x_hi = round_down(invert(p, Var::x, c.domain.x_hi.get_d()));
    d.y_lo = round_up(invert(q, Var::y, c.domain.y_lo.get_d()));
    d.y_hi = round_down(invert(q, Var::y, c.domain.y_hi.get_d()));
    const WebSpec web = make_web(c, seed);
    return reparameterize(web, p, q, d);
}

} // namespace weblin
