#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <illatra/illative.hpp>

using namespace illatra;
using namespace illatra::ill;

namespace {

ParseOptions opts() {
    ParseOptions o;
    o.constants = {"a", "b", "c", "X"};
    o.allow_internal = true;
    return o;
}

Term T(const std::string& s) { return parse_term(s, opts()); }

CheckOptions sys(System s) {
    CheckOptions o;
    o.system = s;
    return o;
}

// Church numeral n applied to the identity and then to c: reduces to c in about n steps.
Term slow_id(int n) {
    std::string s = "(\\f. \\x. ";
    for (int i = 0; i < n; ++i) s += "f (";
    s += "x";
    for (int i = 0; i < n; ++i) s += ")";
    s += ") (\\y. y) c";
    return T(s);
}

}  // namespace

TEST_CASE("axioms") {
    CHECK(check(ax_lh({})).ok());
    CHECK(check(ax({T("a")}, T("a"))).ok());
    CHECK(check(ax({T("a")}, T("b"))).status == Status::RuleError);
    CheckOptions o;
    o.base_types = {"b"};
    CHECK(check(ax_la({}, "b"), o).ok());
    CHECK(check(ax_la({}, "nat"), o).status == Status::RuleError);
    Deriv wrong = ax_lh({});
    wrong.goal = T("L a");
    CHECK(check(wrong).status == Status::RuleError);
}

TEST_CASE("equality rule") {
    CHECK(check(eq(T("c"), ax({T("(\\x. x) c")}, T("(\\x. x) c")))).ok());
    Deriv d{"Eq", {T("a")}, T("b"), "", "", {}, {}, {}, 0, {ax({T("a")}, T("a"))}};
    CHECK(check(d).status == Status::RuleError);
    Deriv omega{"Eq", {T("(\\x. x x) (\\x. x x)")}, T("c"), "", "", {}, {}, {}, 0,
                {ax({T("(\\x. x x) (\\x. x x)")}, T("(\\x. x x) (\\x. x x)"))}};
    CHECK(check(omega).status == Status::Undecided);
}

TEST_CASE("checking is monotone in the equality budget") {
    Term slow = slow_id(40);
    Deriv d = eq(T("c"), ax({slow}, slow));
    Status prev = Status::Undecided;
    bool seen_ok = false, seen_undecided = false;
    for (std::size_t b = 1; b <= 200; b += 3) {
        CheckOptions o;
        o.budget.steps = b;
        Status s = check(d, o).status;
        CHECK(s != Status::RuleError);
        if (prev == Status::OK) CHECK(s == Status::OK);
        seen_ok |= s == Status::OK;
        seen_undecided |= s == Status::Undecided;
        prev = s;
    }
    CHECK(seen_ok);
    CHECK(seen_undecided);
    // A budget recorded on the node is honoured as a floor.
    d.budget = 500;
    CheckOptions tight;
    tight.budget.steps = 1;
    CHECK(check(d, tight).ok());
}

TEST_CASE("xi introduction and freshness") {
    // a x, with L a, gives Xi a a
    Term a = T("a");
    Deriv body = ax({T("L a"), T("a x")}, T("a x"));
    Deriv good = xi_i({T("L a")}, a, a, "x", body, ax({T("L a")}, T("L a")));
    CHECK(check(good).ok());

    // eigenvariable free in t2
    Term t2 = T("\\y. x");
    Deriv b2 = eq(T("(\\y. x) x"), ax({T("L a"), T("a x"), T("x")}, T("x")));
    Deriv bad = xi_i({T("L a"), T("x")}, a, t2, "x", b2, ax({T("L a"), T("x")}, T("L a")));
    auto r = check(bad);
    CHECK(r.status == Status::RuleError);
    CHECK(r.reason.find("freshness") != std::string::npos);

    // eigenvariable free in the hypotheses
    Deriv bad2 = xi_i({T("L a"), T("a x")}, a, a, "x", ax({T("L a"), T("a x")}, T("a x")),
                      ax({T("L a"), T("a x")}, T("L a")));
    CHECK(check(bad2).status == Status::RuleError);
}

TEST_CASE("xi elimination") {
    std::vector<Term> g{T("Xi a b"), T("a c")};
    Deriv e = xi_e(ax(g, T("Xi a b")), ax(g, T("a c")));
    CHECK(check(e).ok());
    CHECK(term_eq(e.goal, T("b c")));
    Deriv wrong = e;
    wrong.goal = T("b a");
    CHECK(check(wrong).status == Status::RuleError);
    // conclusions that match only up to beta-eta are accepted
    std::vector<Term> g2{T("Xi a (\\z. b z)"), T("a c")};
    Deriv e2 = xi_e(ax(g2, T("Xi a (\\z. b z)")), ax(g2, T("a c")));
    e2.goal = T("b c");
    CHECK(check(e2).ok());
}

TEST_CASE("system-specific rules") {
    // L a, a x |- L H discharges to L (F a H)
    std::vector<Term> g{T("L a")};
    Deriv fl = f_l(g, T("a"), T("H"), "x", ax_lh({T("L a"), T("a x")}), ax(g, T("L a")));
    CHECK(check(fl, sys(System::Iw)).ok());
    CHECK(check(fl, sys(System::I0)).status == Status::RuleError);

    Deriv dn{"DN", {}, dn_term(), "", "", {}, {}, {}, 0, {}};
    CHECK(check(dn, sys(System::Iwc)).ok());
    CHECK(check(dn, sys(System::Iw)).status == Status::RuleError);
}

TEST_CASE("derived implication rules") {
    std::vector<Term> g{T("H a")};
    Term a = T("a");
    Deriv h = ax(g, T("H a"));

    Deriv pi = elaborate_pi(ax({T("H a"), a}, a), h, a);
    CHECK(check(pi).ok());
    CHECK(term_eq(pi.goal, T("a => a")));
    CHECK(same_hyps(hyp_set(pi.hyps), hyp_set(g)));

    Deriv ph = elaborate_ph(ax({T("H a"), a}, T("H a")), h, a);
    CHECK(check(ph).ok());
    CHECK(term_eq(ph.goal, mk_H(T("a => a"))));

    // elimination after introduction
    Deriv pe = elaborate_pe(elaborate_weak(pi, a), ax({T("H a"), a}, a));
    CHECK(check(pe).ok());
    CHECK(term_eq(pe.goal, a));

    // a hypothesis already present in the context
    Deriv pi2 = elaborate_pi(ax({T("H a"), a}, a), ax({T("H a"), a}, T("H a")), a);
    CHECK(check(pi2).ok());

    // nested: H b, H a |- a => b => a
    std::vector<Term> g2{T("H a"), T("H b")};
    Deriv inner = elaborate_pi(ax({T("H a"), T("H b"), a, T("b")}, a), ax({T("H a"), T("H b"), a}, T("H b")), T("b"));
    Deriv outer = elaborate_pi(inner, ax(g2, T("H a")), a);
    CHECK(check(outer).ok());
    CHECK(term_eq(outer.goal, T("a => b => a")));
}

TEST_CASE("transformations preserve validity") {
    Term a = T("a");
    Deriv good = xi_i({T("L a")}, a, a, "x", ax({T("L a"), T("a x")}, T("a x")), ax({T("L a")}, T("L a")));
    Deriv w = weaken(good, {T("a x"), T("c")});
    CHECK(check(w).ok());
    CHECK(w.x != "x");

    // substitution into a derivation with a free variable
    Deriv open = xi_i({T("L y")}, T("y"), T("y"), "x", ax({T("L y"), T("y x")}, T("y x")), ax({T("L y")}, T("L y")));
    CHECK(check(open).ok());
    Deriv s = subst_deriv(open, "y", T("a x"));
    CHECK(check(s).ok());
    CHECK(term_eq(s.goal, T("Xi (a x) (a x)")));

    // cut: discharge a hypothesis using a proof of it
    Deriv uses = xi_e(ax({T("Xi a b"), T("a c")}, T("Xi a b")), ax({T("Xi a b"), T("a c")}, T("a c")));
    Deriv proof = eq(T("a c"), ax({T("Xi a b"), T("(\\z. a z) c")}, T("(\\z. a z) c")));
    Deriv w2 = weaken(uses, {T("(\\z. a z) c")});
    Deriv cut_d = cut(w2, T("a c"), proof);
    CHECK(check(cut_d).ok());
    CHECK_FALSE(has_hyp(cut_d.hyps, T("a c")));

    Deriv r = replace_hyp(uses, T("a c"), T("(\\z. a z) c"));
    CHECK(check(r).ok());
    CHECK(has_hyp(r.hyps, T("(\\z. a z) c")));
    CHECK_FALSE(has_hyp(r.hyps, T("a c")));
}

TEST_CASE("bounded search") {
    auto r1 = term_model_eval({T("a")}, T("a"));
    CHECK(r1.verdict == Verdict::True);
    auto r2 = term_model_eval({}, T("L H"));
    CHECK(r2.verdict == Verdict::True);
    auto r3 = term_model_eval({}, T("Xi H (\\x. x)"));
    CHECK(r3.verdict == Verdict::Unknown);
    auto r4 = term_model_eval({T("H a")}, T("a => a"));
    REQUIRE(r4.verdict == Verdict::True);
    CHECK(check(*r4.proof).ok());
    auto r5 = term_model_eval({T("Xi a b"), T("a c")}, T("b c"));
    CHECK(r5.verdict == Verdict::True);

    // A fixed point with Y = Y => X must not yield X.
    SearchOptions o;
    o.extra_terms = {T("(\\f. (\\x. f (x x)) (\\x. f (x x))) (\\y. y => X)")};
    CHECK(term_model_eval({}, T("X"), o).verdict == Verdict::Unknown);
}

TEST_CASE("json round trip") {
    std::vector<Term> g{T("H a")};
    Deriv pi = elaborate_pi(ax({T("H a"), T("a")}, T("a")), ax(g, T("H a")), T("a"));
    auto j = to_json(pi);
    Deriv back = from_json(j, opts());
    CHECK(check(back).ok());
    CHECK(to_json(back) == j);
}
