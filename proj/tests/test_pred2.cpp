#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <illatra/pred2.hpp>

using namespace illatra::pred;

namespace {

Signature sig() {
    return signature_from_json(nlohmann::json::parse(R"({
        "base_types": ["b"],
        "consts": {"P": "b->o", "Q": "b->b->o", "c": "b", "f": "b->b", "g": "b->b"},
        "vars": {"x": "b", "y": "b", "p": "o", "q": "o"}
    })"));
}

PTerm F(const std::string& s) { return parse_formula(s, sig()); }

Derivation node(std::string rule, std::vector<std::string> hyps, std::string concl, std::vector<Derivation> prem = {}) {
    Derivation d;
    d.rule = std::move(rule);
    for (auto& h : hyps) d.hyps.push_back(F(h));
    d.concl = F(concl);
    d.premises = std::move(prem);
    return d;
}

}  // namespace

TEST_CASE("typecheck") {
    CHECK(is_o(F("P c")->type));
    CHECK_THROWS_AS(parse_pterm("f g", sig()), TypeError);
    auto s = sig();
    s.consts["h"] = parse_type("(b->b)->b");
    CHECK_THROWS_AS(s.validate(Mode::Pred2_0), TypeError);
    CHECK_NOTHROW(s.validate(Mode::PredOmega));
    CHECK(is_base(parse_pterm("h f", s, Mode::PredOmega)->type));
    CHECK_THROWS_AS(parse_pterm("h f", s, Mode::Pred2_0), TypeError);
    PTerm bot = F("forall p:o. p");
    CHECK(is_bot(bot));
    CHECK(alpha_eq(bot, F("bot")));
    CHECK_THROWS_AS(F("forall h:b->b. P (h c)"), TypeError);
    CHECK_NOTHROW(parse_formula("forall h:b->b. P (h c)", sig(), Mode::PredOmega));
    CHECK_THROWS_AS(F("P"), TypeError);
    CHECK_THROWS_AS(F("zz"), TypeError);
}

TEST_CASE("formula substitution") {
    PTerm c = parse_pterm("c", sig());
    CHECK(alpha_eq(subst(F("P x"), "x", c), F("P c")));
    CHECK(alpha_eq(subst(F("forall x:b. P x"), "x", c), F("forall x:b. P x")));
    PTerm r = subst(F("forall y:b. Q x y"), "x", parse_pterm("y", sig()));
    CHECK(print(r) == "forall y':b. Q y y'");
    CHECK_THROWS_AS(subst(F("P x"), "x", parse_pterm("p", sig())), TypeError);
}

TEST_CASE("alpha equivalence and printing") {
    CHECK(alpha_eq(F("forall x:b. P x"), F("forall y:b. P y")));
    CHECK_FALSE(alpha_eq(F("forall x:b. P x"), F("forall y:b. P x")));
    for (auto s : {"P c -> forall x:b. Q x c", "(p -> q) -> p", "forall p:o. (p -> bot) -> p", "~p | q", "p & q -> q"}) {
        PTerm t = F(s);
        CHECK(alpha_eq(F(print(t)), t));
    }
    CHECK(print(F("~p")) == "p -> bot");
    CHECK(alpha_eq(F("p & q"), F("forall r:o. (p -> q -> r) -> r")));
    CHECK(alpha_eq(F("p | q"), F("forall r:o. (p -> r) -> (q -> r) -> r")));
}

TEST_CASE("derivation checking") {
    CHECK(check_derivation(node("Axiom", {"P c"}, "P c")).ok);
    CHECK_FALSE(check_derivation(node("Axiom", {"P c"}, "p")).ok);

    auto bad = node("ForallI", {"P x"}, "forall x:b. P x", {node("Axiom", {"P x"}, "P x")});
    auto r = check_derivation(bad);
    CHECK_FALSE(r.ok);
    CHECK(r.kind == "FreshnessViolation");

    // p -> p by ImpI, then used by ImpE
    auto id = node("ImpI", {}, "p -> p", {node("Axiom", {"p"}, "p")});
    CHECK(check_derivation(id).ok);
    auto idq = node("ImpI", {}, "q -> q", {node("Axiom", {"q"}, "q")});
    auto use = node("ImpE", {}, "q -> q",
                    {node("ImpI", {}, "(p -> p) -> q -> q", {weaken(idq, {F("p -> p")})}), id});
    CHECK(check_derivation(use).ok);

    // forall elimination with an explicit term
    auto all = node("ForallI", {}, "forall x:b. P x -> P x",
                    {node("ImpI", {}, "P x -> P x", {node("Axiom", {"P x"}, "P x")})});
    CHECK(check_derivation(all).ok);
    auto inst = node("ForallE", {}, "P (f c) -> P (f c)", {all});
    inst.inst = parse_pterm("f c", sig());
    CHECK(check_derivation(inst).ok);
    inst.inst = parse_pterm("c", sig());
    CHECK_FALSE(check_derivation(inst).ok);

    auto dn = node("DoubleNeg", {}, "((p -> bot) -> bot) -> p");
    CHECK_FALSE(check_derivation(dn).ok);
    CHECK(check_derivation(dn, true).ok);
    CHECK_FALSE(check_derivation(node("DoubleNeg", {}, "((p -> bot) -> bot) -> q"), true).ok);

    auto wrong_arity = node("ImpI", {}, "p -> p");
    CHECK_FALSE(check_derivation(wrong_arity).ok);
}

TEST_CASE("weakening preserves validity") {
    auto all = node("ForallI", {}, "forall x:b. P x -> P x",
                    {node("ImpI", {}, "P x -> P x", {node("Axiom", {"P x"}, "P x")})});
    CHECK(check_derivation(weaken(all, {F("P c"), F("p -> q")})).ok);
    // a hypothesis mentioning the eigenvariable breaks freshness
    CHECK_FALSE(check_derivation(weaken(all, {F("P x")})).ok);
}

TEST_CASE("json round trip") {
    auto all = node("ForallI", {}, "forall x:b. P x -> P x",
                    {node("ImpI", {}, "P x -> P x", {node("Axiom", {"P x"}, "P x")})});
    auto j = derivation_to_json(all);
    auto back = derivation_from_json(j, sig());
    CHECK(check_derivation(back).ok);
    CHECK(derivation_to_json(back) == j);
}
