// Random closed terms over a canonical universe, for the stage-semantics suites.
#pragma once

#include <random>
#include <vector>

#include <illatra/stagesem_omega.hpp>

namespace testsupport {

using namespace illatra;

struct StageTermGen {
    std::mt19937_64 rng;
    std::vector<Term> atoms;

    StageTermGen(std::uint64_t seed, stage::Universe& u, const std::vector<std::string>& types) : rng(seed) {
        for (auto& ty : types)
            for (auto& e : u.space(stage::parse_ty(ty)).elems) atoms.push_back(e);
        for (auto& b : u.base_types()) atoms.push_back(base_pred(b));
        atoms.push_back(xi());
        atoms.push_back(ell());
        atoms.push_back(comb_H());
    }

    int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

    Term gen(int depth, std::uint32_t bound = 0) {
        if (depth <= 0 || pick(10) < 3) {
            if (bound > 0 && pick(3) == 0) return mk_bvar(static_cast<std::uint32_t>(pick(static_cast<int>(bound))));
            return atoms[static_cast<std::size_t>(pick(static_cast<int>(atoms.size())))];
        }
        switch (pick(9)) {
            case 0:
            case 1:
            case 2: return mk_app(gen(depth - 1, bound), gen(depth - 1, bound));
            case 3:
            case 4: return mk_lam("v", gen(depth - 1, bound + 1));
            case 5: return mk_H(gen(depth - 1, bound));
            case 6: return mk_imp(gen(depth - 1, bound), gen(depth - 1, bound));
            case 7: return mk_xi(gen(depth - 1, bound), gen(depth - 1, bound));
            default: return mk_F(gen(depth - 1, bound), gen(depth - 1, bound));
        }
    }
};

}  // namespace testsupport
