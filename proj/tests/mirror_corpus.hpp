// Small Kripke models and formulas over one base type, one unary predicate
// and one constant, shared by the mirror suites.
#pragma once

#include <functional>
#include <random>
#include <vector>

#include <illatra/stagesem_kripke.hpp>

namespace testsupport {

using namespace illatra;

inline pred::Signature mirror_signature() {
    return pred::signature_from_json(nlohmann::json::parse(R"({
        "base_types": ["b"], "consts": {"P": "b->o", "c": "b"}, "vars": {"x": "b", "y": "b", "p": "o", "q": "o"}
    })"));
}

// Every formula of connective depth at most `depth` built from P c, P x and p
// with implication and quantification over b and o.
inline std::vector<pred::PTerm> mirror_formulas(int depth) {
    pred::Signature s = mirror_signature();
    std::vector<std::vector<pred::PTerm>> lvl(static_cast<std::size_t>(depth + 1));
    for (auto a : {"P c", "P x", "p"}) lvl[0].push_back(pred::parse_formula(a, s));
    for (int d = 1; d <= depth; ++d) {
        auto& cur = lvl[static_cast<std::size_t>(d)];
        for (auto& f : lvl[static_cast<std::size_t>(d - 1)]) {
            cur.push_back(pred::p_forall("x", pred::type_base("b"), f));
            cur.push_back(pred::p_forall("p", pred::type_o(), f));
            for (int e = 0; e < d; ++e)
                for (auto& g : lvl[static_cast<std::size_t>(e)]) {
                    cur.push_back(pred::p_imp(f, g));
                    if (e < d - 1) cur.push_back(pred::p_imp(g, f));
                }
        }
    }
    std::vector<pred::PTerm> out;
    for (auto& l : lvl) out.insert(out.end(), l.begin(), l.end());
    return out;
}

// Every full model with at most `states` states and `dom` elements of b.
inline void for_each_mirror_model(int states, int dom, const std::function<bool(const kripke::Model&)>& f) {
    pred::Signature s = mirror_signature();
    std::map<std::string, pred::Type> consts(s.consts.begin(), s.consts.end());
    kripke::Bounds b;
    b.max_states = states;
    b.max_dom = dom;
    kripke::for_each_model({"b"}, {"o", "b", "b->o"}, consts, b, f);
}

// Random closed terms over the mirror constants.
struct MirrorTermGen {
    std::mt19937_64 rng;
    std::vector<Term> atoms;

    MirrorTermGen(std::uint64_t seed, const mirror::Mirror& m) : rng(seed) {
        for (auto& [ty, els] : m.model().domains)
            for (auto& c : m.space(ty)) atoms.push_back(c);
        for (auto& b : m.base_types()) atoms.push_back(base_pred(b));
        atoms.push_back(xi());
        atoms.push_back(ell());
        atoms.push_back(comb_H());
        atoms.push_back(external_const("e"));
    }

    int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

    Term gen(int depth, std::uint32_t bound = 0) {
        if (depth <= 0 || pick(10) < 3) {
            if (bound > 0 && pick(3) == 0) return mk_bvar(static_cast<std::uint32_t>(pick(static_cast<int>(bound))));
            return atoms[static_cast<std::size_t>(pick(static_cast<int>(atoms.size())))];
        }
        switch (pick(8)) {
            case 0:
            case 1:
            case 2: return mk_app(gen(depth - 1, bound), gen(depth - 1, bound));
            case 3:
            case 4: return mk_lam("v", gen(depth - 1, bound + 1));
            case 5: return mk_H(gen(depth - 1, bound));
            case 6: return mk_imp(gen(depth - 1, bound), gen(depth - 1, bound));
            default: return mk_xi(gen(depth - 1, bound), gen(depth - 1, bound));
        }
    }
};

}  // namespace testsupport
