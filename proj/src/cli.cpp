#include "weblin/cli.hpp"

#include "weblin/corpus.hpp"
#include "weblin/report.hpp"
#include "weblin/syntax.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>

namespace weblin {

namespace {

struct Flags {
    std::string f;
    std::vector<std::string> gs;
    std::string domain, base, lambda0;
    std::vector<std::string> params;
    std::uint64_t seed = 1;
    int samples = 8, draws = 3, precision = 256, grid = 41, leaves = 7, example = 0;
    unsigned threads = 0;
    bool json = false, force = false;
    std::string svg;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<Rational> rational_list(const std::string& text, std::size_t count, const char* what)
{
    std::vector<Rational> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            out.push_back(parse_rational(item));
        } catch (const std::exception&) {
            throw UsageError(std::string("--") + what + ": '" + item + "' is not a number");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.size() != count) throw UsageError(std::string("--") + what + " expects " + std::to_string(count) + " comma-separated numbers");
    return out;
}

void add_common(CLI::App* cmd, Flags& fl)
{
    cmd->add_option("--f", fl.f, "web function of the third foliation");
    cmd->add_option("--g", fl.gs, "web functions g4 ... gd (repeat)");
    cmd->add_option("--example", fl.example, "use a built-in corpus case (1-9, 101 for the linear 5-web)");
    cmd->add_option("--domain", fl.domain, "sampling rectangle xlo,xhi,ylo,yhi");
    cmd->add_option("--seed", fl.seed, "sampling seed");
    cmd->add_option("--samples", fl.samples, "sample points per parameter draw")->check(CLI::PositiveNumber);
    cmd->add_option("--draws", fl.draws, "parameter draws when the web has free parameters")->check(CLI::PositiveNumber);
    cmd->add_option("--precision", fl.precision, "float precision in bits")->check(CLI::Range(64, 1 << 16));
    cmd->add_option("--param", fl.params, "fix a free parameter, name=value (repeat)");
    cmd->add_option("--threads", fl.threads, "worker threads (0: all cores)");
    cmd->add_flag("--json", fl.json, "emit the JSON report");
}

void add_linearizer(CLI::App* cmd, Flags& fl)
{
    cmd->add_option("--grid", fl.grid, "grid nodes per side")->check(CLI::Range(5, 4001));
    cmd->add_option("--base", fl.base, "base point x,y (snapped to the nearest node)");
    cmd->add_option("--lambda0", fl.lambda0, "initial values of lambda1, lambda2 at the base");
    cmd->add_option("--leaves", fl.leaves, "leaves traced per foliation")->check(CLI::PositiveNumber);
    cmd->add_option("--svg", fl.svg, "write a two-panel SVG of the leaves");
    cmd->add_flag("--force", fl.force, "run on webs that are not linearizable (negative controls)");
}

RunConfig build_config(const std::string& command, const Flags& fl)
{
    RunConfig c;
    c.command = command;
    std::map<std::string, double> case_params;
    if (fl.example != 0) {
        const CorpusCase* cc = nullptr;
        try {
            cc = &corpus_case(fl.example);
        } catch (const std::out_of_range& e) {
            throw UsageError(e.what());
        }
        if (!fl.f.empty() || !fl.gs.empty()) throw UsageError("--example cannot be combined with --f/--g");
        c.example = fl.example;
        c.f = cc->f;
        c.gs = cc->gs;
        c.domain = cc->domain;
        case_params = cc->linearize_params;
    } else {
        if (fl.f.empty()) throw UsageError("missing --f: a d-web needs f and at least one --g");
        if (fl.gs.empty()) throw UsageError("missing --g: a d-web needs at least two web functions (d >= 4)");
        c.f = fl.f;
        c.gs = fl.gs;
    }
    if (!fl.domain.empty()) {
        const auto d = rational_list(fl.domain, 4, "domain");
        c.domain = {d[0], d[1], d[2], d[3]};
        if (!(d[0] < d[1]) || !(d[2] < d[3])) throw UsageError("--domain: need xlo < xhi and ylo < yhi");
    }
    c.seed = fl.seed;
    c.policy.points = fl.samples;
    c.policy.parameter_draws = fl.draws;
    c.policy.precision = fl.precision;
    c.policy.threads = fl.threads;
    c.json = fl.json;
    c.svg = fl.svg;

    LinearizerOptions& o = c.linearizer;
    o.grid = fl.grid;
    o.leaves = fl.leaves;
    o.force = fl.force;
    o.threads = fl.threads;
    o.params = case_params;
    if (!fl.base.empty()) {
        const auto b = rational_list(fl.base, 2, "base");
        o.base = std::array<double, 2>{b[0].get_d(), b[1].get_d()};
    }
    if (!fl.lambda0.empty()) {
        const auto l = rational_list(fl.lambda0, 2, "lambda0");
        o.lambda0 = {l[0].get_d(), l[1].get_d()};
    }
    for (auto& p : fl.params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + p + "'");
        const std::string name = p.substr(0, eq), value = p.substr(eq + 1);
        Rational v;
        try {
            v = parse_rational(value);
        } catch (const std::exception&) {
            throw UsageError("--param " + name + ": '" + value + "' is not a number");
        }
        c.params[name] = decimal_string(v);
        o.params[name] = v.get_d();
    }
    for (auto& [k, v] : case_params)
        if (!c.params.count(k)) c.params[k] = decimal_string(v);
    return c;
}

// Parses every web function; ParseError carries the offset inside `text`.
WebSpec build_web(const RunConfig& c)
{
    auto parse_one = [](const std::string& label, const std::string& text) {
        try {
            return parse(text);
        } catch (const ParseError& e) {
            throw ParseError(e.offset(), label + " \"" + text + "\": " + e.detail());
        }
    };
    std::vector<Expr> gs;
    for (std::size_t k = 0; k < c.gs.size(); ++k) gs.push_back(parse_one("g" + std::to_string(k + 4), c.gs[k]));
    WebSpec web(parse_one("f", c.f), gs, c.domain, c.seed);
    for (auto& [name, value] : c.params) {
        const Rational v = parse_rational(value);
        web.parameter_ranges[name] = {v, v};
    }
    return web;
}

int exit_for(Outcome o)
{
    switch (o) {
    case Outcome::yes: return exit_yes;
    case Outcome::no: return exit_no;
    case Outcome::inconclusive: return exit_inconclusive;
    }
    return exit_inconclusive;
}

int cmd_check(const RunConfig& c, std::ostream& out, bool tables)
{
    const WebSpec web = build_web(c);
    const WebVerdict v = check_dweb(web, c.policy);
    if (c.json)
        out << report_json(c, v, nullptr).dump(2) << "\n";
    else
        print_verdict(out, c, v, tables);
    return exit_for(v.outcome);
}

int cmd_linearize(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const WebSpec web = build_web(c);
    const WebVerdict v = check_dweb(web, c.policy);
    require_linearizable(v.outcome, c.linearizer.force);
    const LinearizationResult r = linearize(web, c.linearizer);
    if (!c.svg.empty()) {
        std::ofstream file(c.svg);
        file << render_svg(r);
        if (!file) {
            err << "error: cannot write " << c.svg << "\n";
            return exit_runtime;
        }
    }
    if (c.json) {
        out << report_json(c, v, &r).dump(2) << "\n";
    } else {
        print_verdict(out, c, v, false);
        print_linearization(out, r);
    }
    return exit_yes;
}

int cmd_selftest(const Flags& fl, std::ostream& out)
{
    ZeroTestPolicy policy;
    policy.points = fl.samples;
    policy.parameter_draws = fl.draws;
    policy.precision = fl.precision;
    policy.threads = fl.threads;
    const auto start = std::chrono::steady_clock::now();
    int mismatches = 0, total = 0;
    auto run = [&](const CorpusCase& cc, bool substituted) {
        const WebSpec web = substituted ? substituted_web(cc, fl.seed) : make_web(cc, fl.seed);
        const WebVerdict v = check_dweb(web, policy);
        const bool ok = v.outcome == cc.expected;
        ++total;
        if (!ok) ++mismatches;
        out << (ok ? "ok   " : "FAIL ") << std::setw(3) << cc.id << (substituted ? " p,q " : "     ") << std::left << std::setw(13)
            << to_string(v.outcome) << std::right << " expected " << to_string(cc.expected) << "  " << cc.name << "\n";
    };
    for (bool substituted : {false, true}) {
        for (auto& cc : corpus().examples) run(cc, substituted);
        for (auto& cc : corpus().fixtures) run(cc, substituted);
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << total - mismatches << "/" << total << " verdicts match (" << std::fixed << std::setprecision(1) << elapsed << "s)\n";
    return mismatches == 0 ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Linearizability of planar d-webs"};
    app.name(args.empty() ? "weblin" : args[0]);
    app.require_subcommand(1);
    Flags fl;
    CLI::App* check = app.add_subcommand("check", "decide linearizability (exit 0 YES, 1 NO, 2 INCONCLUSIVE)");
    CLI::App* inv = app.add_subcommand("invariants", "verdict, DAG size and evidence of every invariant");
    CLI::App* lin = app.add_subcommand("linearize", "flat coordinates and straightness of every foliation");
    CLI::App* self = app.add_subcommand("selftest", "reference corpus and its reparameterization");
    for (CLI::App* cmd : {check, inv, lin}) add_common(cmd, fl);
    add_linearizer(lin, fl);
    self->add_option("--seed", fl.seed, "sampling seed");
    self->add_option("--samples", fl.samples, "sample points per parameter draw")->check(CLI::PositiveNumber);
    self->add_option("--precision", fl.precision, "float precision in bits")->check(CLI::Range(64, 1 << 16));
    self->add_option("--threads", fl.threads, "worker threads (0: all cores)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return exit_usage;
    }

    try {
        if (self->parsed()) return cmd_selftest(fl, out);
        const std::string name = check->parsed() ? "check" : inv->parsed() ? "invariants" : "linearize";
        const RunConfig c = build_config(name, fl);
        if (lin->parsed()) return cmd_linearize(c, out, err);
        return cmd_check(c, out, inv->parsed());
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return exit_parse;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}

} // namespace weblin
