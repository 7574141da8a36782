#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <illatra/translate.hpp>

#include "corpus.hpp"

using namespace illatra;
using namespace illatra::pred;
using tr::translate;

namespace {

Signature small_sig() {
    return signature_from_json(nlohmann::json::parse(R"({
        "base_types": ["b"], "consts": {"c": "b", "P": "b->o"}, "vars": {"x": "b", "y": "b", "p": "o", "q": "o"}
    })"));
}

ill::CheckOptions i0(std::size_t budget = 500) {
    ill::CheckOptions o;
    o.system = ill::System::I0;
    o.budget.steps = budget;
    o.base_types = {"b"};
    return o;
}

// All formulas of connective depth up to `depth` over the corpus signature.
std::vector<PTerm> formulas(int depth) {
    Signature s = corpus::signature();
    std::vector<std::vector<PTerm>> lvl(static_cast<std::size_t>(depth + 1));
    for (auto a : {"P x", "P c", "p", "a", "R x (f c)"}) lvl[0].push_back(parse_formula(a, s));
    for (int d = 1; d <= depth; ++d) {
        auto& cur = lvl[static_cast<std::size_t>(d)];
        for (auto& f : lvl[static_cast<std::size_t>(d - 1)]) {
            cur.push_back(p_forall("x", type_base("b"), f));
            cur.push_back(p_forall("p", type_o(), f));
            for (int e = 0; e < d; ++e)
                for (auto& g : lvl[static_cast<std::size_t>(e)]) {
                    cur.push_back(p_imp(f, g));
                    if (e < d - 1) cur.push_back(p_imp(g, f));
                }
        }
    }
    std::vector<PTerm> out;
    for (auto& l : lvl) out.insert(out.end(), l.begin(), l.end());
    return out;
}

}  // namespace

TEST_CASE("translation clauses") {
    Signature s = small_sig();
    PTerm imp = parse_formula("P x -> p", s);
    CHECK(term_eq(translate(imp), mk_imp(translate(imp->a), translate(imp->b))));
    ParseOptions po = tr::parse_options(s);
    CHECK(term_eq(translate(parse_formula("forall x:b. P x", s)), parse_term("Xi A@b (\\x. P x)", po)));
    CHECK(term_eq(translate(parse_pterm("x", s)), mk_fvar("x")));
    CHECK(term_eq(translate(parse_formula("forall p:o. p", s)), parse_term("Xi H (\\p. p)", po)));
    CHECK(term_eq(tr::a_type(parse_type("b->o")), mk_F(base_pred("b"), comb_H())));
}

TEST_CASE("context construction") {
    Signature s = small_sig();
    PTerm px = parse_formula("P x", s);
    auto g = tr::gamma(s, {px, px});
    Term y = mk_fvar(tr::sentinel("b"));
    std::vector<Term> expect{mk_app(base_pred("b"), mk_fvar("x")), mk_app(base_pred("b"), user_const("c")),
                             mk_app(mk_F(base_pred("b"), comb_H()), user_const("P")), mk_app(ell(), base_pred("b")),
                             mk_app(base_pred("b"), y)};
    CHECK(ill::same_hyps(ill::hyp_set(g), ill::hyp_set(expect)));
    CHECK(tr::gamma(s, {}).size() == 4);

    // Γ grows with the formula set and stays linear in the number of free variables
    auto fs = formulas(1);
    Signature cs = corpus::signature();
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = i; j < fs.size(); j += 7) {
            auto small = ill::hyp_set(tr::gamma(cs, {fs[i]}));
            auto big = ill::hyp_set(tr::gamma(cs, {fs[i], fs[j]}));
            for (auto& t : small) CHECK(big.count(t));
            std::size_t nfv = fv_names(fs[i]).size() + fv_names(fs[j]).size();
            CHECK(big.size() <= nfv + cs.consts.size() + 2 * cs.base_types.size());
        }
}

TEST_CASE("sentinels are outside the surface syntax") {
    CHECK_THROWS_AS(parse_term(tr::sentinel("b")), ParseError);
}

TEST_CASE("inhabitants") {
    Signature s = small_sig();
    auto g = tr::gamma(s, {});
    auto [wb, db] = tr::inhabit(type_base("b"), g);
    CHECK(term_eq(wb, mk_fvar(tr::sentinel("b"))));
    CHECK(db.rule == "Ax");
    auto [wo, dO] = tr::inhabit(type_o(), g);
    CHECK(term_eq(wo, ill::lh()));
    CHECK(ill::check(dO, i0()).ok());
    auto [wbo, dbo] = tr::inhabit(parse_type("b->o"), g);
    CHECK(term_eq(wbo, mk_K(ill::lh())));
    CHECK(ill::check(dbo, i0()).ok());

    for (auto ty : {"b->b", "b->b->o", "b->b->b", "b->b->b->o"}) {
        auto [w, d] = tr::inhabit(parse_type(ty), g);
        CHECK(term_eq(d.goal, tr::typed(parse_type(ty), w)));
        CHECK_MESSAGE(ill::check(d, i0()).ok(), ty);
    }
    // Higher types need L of an arrow type, i.e. the FL rule.
    for (auto ty : {"(b->o)->o", "(b->b)->b", "o->o", "(o->b)->b->o"}) {
        auto [w, d] = tr::inhabit(parse_type(ty), g);
        ill::CheckOptions iw = i0();
        iw.system = ill::System::Iw;
        CHECK_MESSAGE(ill::check(d, iw).ok(), ty);
        (void)w;
    }
    auto [w, d] = tr::inhabit(parse_type("(b->o)->o"), g);
    CHECK(ill::check(d, i0()).status == ill::Status::RuleError);
    (void)w;
}

TEST_CASE("typing predicates of formulas") {
    Signature s = corpus::signature();
    for (auto& phi : formulas(2)) {
        auto g = tr::gamma(s, {phi});
        ill::Deriv h = tr::derive_H(g, phi);
        REQUIRE(term_eq(h.goal, mk_H(translate(phi))));
        REQUIRE_MESSAGE(ill::check(h, i0()).ok(), print(phi));
    }
}

TEST_CASE("translation is injective on alpha classes") {
    auto fs = formulas(2);
    std::map<std::string, Term> seen;
    for (auto& f : fs) {
        auto key = alpha_key(f);
        Term t = translate(f);
        if (auto it = seen.find(key); it != seen.end()) CHECK(term_eq(it->second, t));
        else seen.emplace(key, t);
    }
    std::vector<std::pair<std::string, Term>> v(seen.begin(), seen.end());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) REQUIRE_FALSE(term_eq(v[i].second, v[j].second));
    Signature s = corpus::signature();
    CHECK(term_eq(translate(parse_formula("forall x:b. P x", s)), translate(parse_formula("forall y:b. P y", s))));
}

TEST_CASE("compiled corpus checks in I0") {
    auto es = corpus::entries();
    CHECK(es.size() >= 30);
    Signature s = corpus::signature();
    std::set<std::string> rules;
    for (auto& e : es) {
        for (auto& r : rules_used(e.proof)) rules.insert(r);
        REQUIRE_MESSAGE(check_derivation(e.proof).ok, e.name);
        ill::Deriv c = tr::compile(e.proof, s);
        auto r = ill::check(c, i0(500));
        CHECK_MESSAGE(r.ok(), std::string(e.name + " at " + r.path + ": " + r.reason));
        CHECK(term_eq(c.goal, translate(e.proof.concl)));
        CHECK(ill::same_hyps(ill::hyp_set(c.hyps), ill::hyp_set(tr::context(s, e.proof.hyps, e.proof.concl))));
    }
    CHECK(rules == std::set<std::string>{"Axiom", "ImpI", "ImpE", "ForallI", "ForallE"});
}

TEST_CASE("compile rejects classical and broken input") {
    Signature s = corpus::signature();
    Derivation dn;
    dn.rule = "DoubleNeg";
    dn.concl = parse_formula("((p -> bot) -> bot) -> p", s);
    CHECK_THROWS_AS(tr::compile(dn, s), tr::CompileError);
    Derivation bad;
    bad.rule = "Axiom";
    bad.concl = parse_formula("p", s);
    CHECK_THROWS_AS(tr::compile(bad, s), tr::CompileError);
}
