#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <illatra/context.hpp>
#include <illatra/reduce.hpp>

#include "support.hpp"

using namespace illatra;
using testsupport::TermGen;

namespace {

Term P(const std::string& s) { return parse_term(s); }

// Named-variable reference reducer, written independently of the de Bruijn engine.
struct Named {
    enum K { V, C, A, Lm } k;
    std::string name;  // var / binder / const text
    Term cst;
    std::shared_ptr<Named> l, r;
};
using NP = std::shared_ptr<Named>;

NP nv(const std::string& n) { return std::make_shared<Named>(Named{Named::V, n, nullptr, nullptr, nullptr}); }
NP nc(const Term& c) { return std::make_shared<Named>(Named{Named::C, "", c, nullptr, nullptr}); }
NP na(NP a, NP b) { return std::make_shared<Named>(Named{Named::A, "", nullptr, std::move(a), std::move(b)}); }
NP nl(const std::string& x, NP b) { return std::make_shared<Named>(Named{Named::Lm, x, nullptr, std::move(b), nullptr}); }

int counter = 0;

NP to_named(const Term& t, std::vector<std::string>& env) {
    switch (t->tag) {
        case Tag::BVar: return nv(env[env.size() - 1 - t->index]);
        case Tag::FVar: return nv(t->name);
        case Tag::Const: return nc(t);
        case Tag::App: return na(to_named(t->fn, env), to_named(t->arg, env));
        case Tag::Lam: {
            env.push_back("v" + std::to_string(counter++));
            NP b = to_named(t->fn, env);
            std::string x = env.back();
            env.pop_back();
            return nl(x, b);
        }
    }
    return nullptr;
}

Term from_named(const NP& n) {
    switch (n->k) {
        case Named::V: return mk_fvar(n->name);
        case Named::C: return n->cst;
        case Named::A: return mk_app(from_named(n->l), from_named(n->r));
        case Named::Lm: return lam(n->name, from_named(n->l));
    }
    return nullptr;
}

bool nfree(const NP& n, const std::string& x) {
    switch (n->k) {
        case Named::V: return n->name == x;
        case Named::C: return false;
        case Named::A: return nfree(n->l, x) || nfree(n->r, x);
        case Named::Lm: return n->name != x && nfree(n->l, x);
    }
    return false;
}

NP nsubst(const NP& n, const std::string& x, const NP& s) {
    switch (n->k) {
        case Named::V: return n->name == x ? s : n;
        case Named::C: return n;
        case Named::A: return na(nsubst(n->l, x, s), nsubst(n->r, x, s));
        case Named::Lm: {
            if (n->name == x) return n;
            if (nfree(s, n->name)) {
                std::string y = "r" + std::to_string(counter++);
                return nl(y, nsubst(nsubst(n->l, n->name, nv(y)), x, s));
            }
            return nl(n->name, nsubst(n->l, x, s));
        }
    }
    return n;
}

// One leftmost-outermost beta or eta step; null when normal.
NP nstep(const NP& n) {
    switch (n->k) {
        case Named::A: {
            if (n->l->k == Named::Lm) return nsubst(n->l->l, n->l->name, n->r);
            if (NP a = nstep(n->l)) return na(a, n->r);
            if (NP b = nstep(n->r)) return na(n->l, b);
            return nullptr;
        }
        case Named::Lm: {
            const NP& b = n->l;
            if (b->k == Named::A && b->r->k == Named::V && b->r->name == n->name && !nfree(b->l, n->name)) return b->l;
            if (NP c = nstep(b)) return nl(n->name, c);
            return nullptr;
        }
        default: return nullptr;
    }
}

std::optional<Term> oracle_normalize(const Term& t, int limit) {
    std::vector<std::string> env;
    NP n = to_named(t, env);
    for (int i = 0; i < limit; ++i) {
        NP s = nstep(n);
        if (!s) return from_named(n);
        n = s;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("alpha equivalence is structural") {
    CHECK(term_eq(P("\\x. x"), P("\\y. y")));
    CHECK(term_eq(P("\\x. \\y. x"), P("\\y. \\x. y")));
    CHECK_FALSE(term_eq(P("\\x. \\y. x"), P("\\x. \\y. y")));
    CHECK_FALSE(term_eq(P("x"), P("y")));
}

TEST_CASE("substitution avoids capture") {
    Term r = subst(P("\\y. x"), "x", P("y"));
    CHECK(print_term(r) == "\\y'. y");
    CHECK(term_eq(subst(P("x"), "x", P("\\z. z")), P("\\z. z")));
    CHECK(term_eq(subst(P("x x"), "x", P("K")), mk_app(comb_K(), comb_K())));
}

TEST_CASE("normalisation examples") {
    CHECK(term_eq(*beta_eta_normalize(P("(\\x. x) c")).term, P("c")));
    CHECK(term_eq(*beta_eta_normalize(P("S K K x")).term, P("x")));
    CHECK(beta_eta_normalize(P("(\\x. x x) (\\x. x x)"), Budget{100}).exhausted());
    CHECK(beta_eta_equal(P("\\x. f x"), P("f")) == Verdict::True);
    CHECK(beta_eta_equal(P("K"), P("S")) == Verdict::False);
    CHECK(beta_eta_equal(P("(\\x. x x) (\\x. x x)"), P("I"), Budget{50}) == Verdict::Unknown);
    // eta only fires when the bound variable is not free in the head
    CHECK(term_eq(*beta_eta_normalize(P("\\x. x x")).term, P("\\x. x x")));
}

TEST_CASE("abbreviations expand to their literal shapes") {
    CHECK(term_eq(P("t1 => t2"), P("Xi (\\x. t1) (\\x. t2)")));
    CHECK(term_eq(P("bot"), P("Xi H I")));
    CHECK(term_eq(P("bot"), P("Xi (\\x. L (\\y. x)) (\\x. x)")));
    CHECK(term_eq(P("F t1 (\\z. q z z)"), P("\\f. Xi t1 (\\x. q (f x) (f x))")));
    CHECK(term_eq(P("F t1 t2"), P("\\f. Xi t1 (\\x. t2 (f x))")));
    CHECK(term_eq(P("H t"), P("L (K t)")));
    CHECK(term_eq(P("H t"), P("L (\\y. t)")));
    CHECK(term_eq(P("K t"), P("\\y. t")));
    // bare combinators are ordinary terms, so applying them makes redexes
    CHECK(beta_eta_equal(P("(\\h. h t) H"), P("H t")) == Verdict::True);
    CHECK(beta_eta_equal(P("F"), P("\\a b f. Xi a (\\x. b (f x))")) == Verdict::True);
    CHECK(term_eq(P("a => b => c"), P("a => (b => c)")));
    CHECK(term_eq(P("λx. Ξ x ⊥ ⊃ x"), P("\\x. Xi x bot => x")));
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(P("\\H. x"), ParseError);
    CHECK_THROWS_AS(P("(x"), ParseError);
    CHECK_THROWS_AS(P("%x"), ParseError);
    CHECK_NOTHROW(parse_term("%x", ParseOptions{{}, true}));
    ParseOptions o;
    o.constants = {"c"};
    CHECK(is_const(parse_term("c", o), ConstKind::User));
    CHECK_THROWS_AS(parse_term("\\c. c", o), ParseError);
}

TEST_CASE("shape recognisers invert the constructors") {
    Term t1 = P("A@b"), t2 = P("\\z. L z");
    auto f = match_F(mk_F(t1, t2));
    REQUIRE(f);
    CHECK(term_eq(f->first, t1));
    CHECK(term_eq(mk_F(f->first, f->second), mk_F(t1, t2)));
    auto g = match_F(mk_F(t1, P("g")));
    REQUIRE(g);
    CHECK(term_eq(g->second, P("g")));
    CHECK(match_H(P("H c")));
    CHECK_FALSE(match_H(P("L (\\y. y)")));
    CHECK(match_imp(P("a => b")));
}

TEST_CASE("contexts") {
    Term c = P("\\x. []");
    CHECK(term_eq(fill_context(c, {{"1", P("y")}}), P("\\x. y")));
    CHECK_THROWS_AS(fill_context(c, {{"1", P("x")}}), CaptureViolation);
    CHECK(term_eq(fill_context(c, {{"1", P("x")}}, true), P("\\x. x")));
    Term c2 = P("\\x. [1] ([2] x)");
    CHECK(context_holes(c2) == std::set<std::string>{"1", "2"});
    CHECK(term_eq(fill_context(c2, {{"1", P("f")}, {"2", P("g")}}), P("\\x. f (g x)")));
}

TEST_CASE("print then parse is the identity") {
    TermGen g(7);
    for (int i = 0; i < 3000; ++i) {
        Term t = g.gen(5, 0);
        std::string s = print_term(t);
        Term back = parse_term(s);
        INFO(s);
        REQUIRE(term_eq(back, t));
        REQUIRE(term_eq(parse_term(print_term(t, PrintOptions{false})), t));
    }
}

TEST_CASE("alpha equivalence properties") {
    TermGen g(11);
    for (int i = 0; i < 500; ++i) {
        Term t = g.gen(4, 0);
        // renaming every binder yields an equal term
        std::vector<std::string> env;
        Term renamed = from_named(to_named(t, env));
        CHECK(term_eq(t, renamed));
        CHECK(term_eq(subst(t, "a", P("\\q. b q")), subst(renamed, "a", P("\\q. b q"))));
        CHECK(free_vars(t) == free_vars(renamed));
        Term u = g.gen(4, 0);
        CHECK(term_eq(t, u) == term_eq(u, t));
        CHECK((term_cmp(t, u) == 0) == term_eq(t, u));
    }
}

TEST_CASE("substitution free-variable bound") {
    TermGen g(13);
    for (int i = 0; i < 500; ++i) {
        Term t = g.gen(4, 0), s = g.gen(3, 0);
        if (!occurs_free(t, "a")) continue;
        auto fv = free_vars(subst(t, "a", s));
        auto ft = free_vars(t);
        ft.erase("a");
        for (auto& x : free_vars(s)) ft.insert(x);
        for (auto& x : fv) CHECK(ft.count(x) == 1);
    }
}

TEST_CASE("normaliser agrees with the named reference reducer") {
    TermGen g(17);
    g.use_sugar = false;
    int compared = 0;
    for (int i = 0; i < 2000; ++i) {
        Term t = g.gen(5, 0);
        auto mine = beta_eta_normalize(t, Budget{500});
        auto ref = oracle_normalize(t, 500);
        if (mine.exhausted() || !ref) continue;
        ++compared;
        INFO(print_term(t));
        REQUIRE(term_eq(*mine.term, *ref));
        CHECK(is_beta_eta_normal(*mine.term));
        auto again = beta_eta_normalize(*mine.term, Budget{500});
        CHECK(again.steps == 0);
        CHECK(term_eq(*again.term, *mine.term));
    }
    CHECK(compared > 1000);
}

TEST_CASE("Church-Rosser smoke test") {
    TermGen g(19);
    int peaks = 0;
    const std::size_t budget = 200;
    for (int i = 0; i < 3000 && peaks < 300; ++i) {
        Term t = g.gen(5, 0);
        auto rs = one_step_reducts(t);
        if (rs.size() < 2) continue;
        if (beta_eta_normalize(t, Budget{budget}).exhausted()) continue;
        ++peaks;
        auto a = beta_eta_normalize(rs[0], Budget{4 * budget});
        auto b = beta_eta_normalize(rs[1], Budget{4 * budget});
        REQUIRE(!a.exhausted());
        REQUIRE(!b.exhausted());
        CHECK(term_eq(*a.term, *b.term));
    }
    CHECK(peaks >= 100);
}

TEST_CASE("one-step reducts") {
    auto rs = one_step_reducts(P("(\\x. x x) ((\\y. y) c)"));
    CHECK(rs.size() == 2);
    CHECK(one_step_reducts(P("\\x. f x")).size() == 1);
    CHECK(one_step_reducts(P("f c")).empty());
}
