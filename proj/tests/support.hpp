// Shared helpers for the test executables.
#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <illatra/sugar.hpp>
#include <illatra/syntax.hpp>
#include <illatra/term.hpp>

namespace testsupport {

using namespace illatra;

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string source_path(const std::string& rel) { return std::string(ILLATRA_SOURCE_DIR) + "/" + rel; }

// Random locally closed terms over a few free names and illative constants.
struct TermGen {
    std::mt19937_64 rng;
    std::vector<std::string> fvars{"a", "b", "c"};
    bool use_sugar = true;

    explicit TermGen(std::uint64_t seed) : rng(seed) {}

    int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

    Term gen(int depth, std::uint32_t bound) {
        int leaf = depth <= 0 ? 1 : pick(10);
        if (leaf < 3 || depth <= 0) {
            int k = pick(bound > 0 ? 5 : 3);
            if (k == 0) return mk_fvar(fvars[static_cast<std::size_t>(pick(static_cast<int>(fvars.size())))]);
            if (k == 1) {
                switch (pick(3)) {
                    case 0: return xi();
                    case 1: return ell();
                    default: return base_pred("b");
                }
            }
            if (k == 2 || bound == 0) return mk_fvar("c");
            return mk_bvar(static_cast<std::uint32_t>(pick(static_cast<int>(bound))));
        }
        int k = pick(use_sugar ? 8 : 5);
        switch (k) {
            case 0:
            case 1:
            case 2: return mk_app(gen(depth - 1, bound), gen(depth - 1, bound));
            case 3:
            case 4: return mk_lam("v", gen(depth - 1, bound + 1));
            case 5: return mk_H(gen(depth - 1, bound));
            case 6: return mk_imp(gen(depth - 1, bound), gen(depth - 1, bound));
            default: return mk_F(gen(depth - 1, bound), gen(depth - 1, bound));
        }
    }
};

}  // namespace testsupport
