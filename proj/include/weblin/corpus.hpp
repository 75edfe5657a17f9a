#pragma once

// The built-in regression corpus: the nine reference webs, the linear 5-web
// fixture and the reparameterization used for the equivalence check.

#include "weblin/calculus.hpp"
#include "weblin/invariants.hpp"

#include <map>
#include <string>
#include <vector>

namespace weblin {

struct CorpusCase {
    int id = 0;
    std::string name;
    std::string original; // notation of the source listing
    std::string f;
    std::vector<std::string> gs;
    Domain domain;
    Outcome expected = Outcome::inconclusive;
    bool linearize = false;
    std::map<std::string, double> linearize_params;
};

struct Corpus {
    std::vector<CorpusCase> examples;
    std::vector<CorpusCase> fixtures;
    std::string p; // x -> p(x)
    std::string q; // y -> q(y)
};

const Corpus& corpus();
/// Example or fixture by id; throws std::out_of_range.
const CorpusCase& corpus_case(int id);

WebSpec make_web(const CorpusCase& c, std::uint64_t seed = 1);
/// The case with f(x, y) -> f(p(x), q(y)) for every web function, on the
/// preimage of its domain rounded inward to multiples of 1/10^4.
WebSpec substituted_web(const CorpusCase& c, std::uint64_t seed = 1);

} // namespace weblin
