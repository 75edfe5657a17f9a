#include "weblin/cli.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace weblin;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "weblin");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

} // namespace

TEST_CASE("check exit codes")
{
    const Run yes = run({"check", "--f", "x/y", "--g", "x+y"});
    CHECK(yes.code == 0);
    CHECK(contains(yes.out, "verdict: YES"));

    const Run no = run({"check", "--f", "y/x", "--g", "(1-y)/(1-x)", "--g", "(x-x*y)/(y-x*y)", "--domain", "1/10,2/5,3/5,9/10"});
    CHECK(no.code == 1);
    CHECK(contains(no.out, "verdict: NO"));

    const Run inconclusive = run({"check", "--f", "x", "--g", "x+y"});
    CHECK(inconclusive.code == 2);
    CHECK(contains(inconclusive.out, "f_y = 0"));

    CHECK(run({"check", "--f", "x/y"}).code == 3);
    CHECK(run({"check"}).code == 3);
    CHECK(run({}).code == 3);
    CHECK(run({"frobnicate"}).code == 3);
    CHECK(run({"check", "--example", "42"}).code == 3);
    CHECK(run({"check", "--example", "1", "--f", "x"}).code == 3);
    CHECK(run({"check", "--f", "x/y", "--g", "x+y", "--domain", "1,0,0,1"}).code == 3);
    CHECK(run({"check", "--f", "x/y", "--g", "x+y", "--domain", "a,b,c,d"}).code == 3);
    CHECK(run({"check", "--f", "x/y", "--g", "x+y", "--param", "n"}).code == 3);
    CHECK(run({"check", "--f", "x/y", "--g", "x+y", "--samples", "0"}).code == 3);

    const Run bad = run({"check", "--f", "x + + y", "--g", "x"});
    CHECK(bad.code == 4);
    CHECK(contains(bad.err, "offset 4"));
    CHECK(run({"check", "--f", "x/y", "--g", "cos(x)"}).code == 4);
}

TEST_CASE("help")
{
    const Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(contains(help.out, "linearize"));
}

TEST_CASE("invariants output")
{
    const Run r1 = run({"invariants", "--example", "1"});
    CHECK(r1.code == 0);
    CHECK(contains(r1.out, "I1"));
    CHECK(contains(r1.out, "I2"));
    CHECK(contains(r1.out, "pass at ("));

    const Run r7 = run({"invariants", "--example", "7"});
    CHECK(r7.code == 1);
    CHECK(contains(r7.out, "J5"));
    CHECK(contains(r7.out, "NONZERO"));
    CHECK(contains(r7.out, "FAIL at ("));
}

TEST_CASE("json schema and byte identity")
{
    const Run a = run({"invariants", "--example", "6", "--json"});
    const Run b = run({"invariants", "--example", "6", "--json", "--threads", "1"});
    CHECK(a.code == 0);
    const auto j = nlohmann::json::parse(a.out);
    CHECK(j.at("web").at("f") == "x/y");
    CHECK(j.at("web").at("g").size() == 1);
    CHECK(j.at("verdict") == "YES");
    CHECK(j.at("linearization").is_null());
    CHECK(j.at("config").at("seed") == "1");
    CHECK(j.at("config").at("precision") == "256");
    const auto& inv = j.at("invariants");
    REQUIRE(inv.size() == 2);
    for (auto& r : inv) {
        CHECK(r.at("name").is_string());
        CHECK(r.at("verdict") == "ZERO");
        CHECK(r.at("dag_size").is_number_integer());
        REQUIRE(r.at("evidence").size() == 24);
        for (auto& e : r.at("evidence")) {
            CHECK(e.at("point").size() == 2);
            CHECK(e.at("point")[0].is_string());
            CHECK(e.at("params").at("n").is_string());
            CHECK(e.at("residual").is_string());
            CHECK(e.at("mode") == "float");
        }
    }
    // only the echoed thread count may differ
    auto strip = [](std::string s) { return nlohmann::json::parse(s).at("invariants").dump(); };
    CHECK(strip(a.out) == strip(b.out));
    CHECK(run({"invariants", "--example", "6", "--json"}).out == a.out);
}

TEST_CASE("linearize")
{
    const std::string svg = "weblin_test_cli.svg";
    const Run r = run({"linearize", "--example", "2", "--json", "--svg", svg});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const auto& lin = j.at("linearization");
    CHECK(lin.at("grid").at("nx") == 41);
    CHECK(lin.at("u").size() == 41 * 41);
    for (auto& s : lin.at("straightness")) CHECK(std::stod(s.at("residual").get<std::string>()) < 1e-5);
    std::ifstream file(svg);
    std::stringstream content;
    content << file.rdbuf();
    CHECK(contains(content.str(), "<polyline"));
    std::remove(svg.c_str());

    const Run refused = run({"linearize", "--example", "5"});
    CHECK(refused.code == 5);
    CHECK(contains(refused.err, "NO"));

    const Run forced = run({"linearize", "--example", "5", "--force"});
    CHECK(forced.code == 0);
    CHECK(contains(forced.out, "warning: connection is not flat"));

    const Run text = run({"linearize", "--f", "x/y", "--g", "x^n+y^n", "--param", "n=2", "--grid", "161", "--lambda0", "0.1,-0.1", "--base", "0.5,0.5"});
    CHECK(text.code == 0);
    CHECK(contains(text.out, "straightness"));
}
