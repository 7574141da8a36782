// Derived combinators and shape recognisers for the illative notations.
#pragma once

#include <optional>
#include <utility>

#include "term.hpp"

namespace illatra {

inline Term comb_I() {
    static const Term t = mk_lam("x", mk_bvar(0));
    return t;
}

inline Term comb_K() {
    static const Term t = mk_lam("x", mk_lam("y", mk_bvar(1)));
    return t;
}

inline Term comb_S() {
    static const Term t = mk_lam(
        "x", mk_lam("y", mk_lam("z", mk_app(mk_app(mk_bvar(2), mk_bvar(0)), mk_app(mk_bvar(1), mk_bvar(0))))));
    return t;
}

// lambda y. t with y fresh.
inline Term mk_K(const Term& t) { return mk_lam("_", shift(t, 1)); }

// L (lambda y. t)
inline Term mk_H(const Term& t) { return mk_app(ell(), mk_K(t)); }

// H as a combinator: lambda x. L (lambda y. x)
inline Term comb_H() {
    static const Term t = mk_lam("x", mk_app(ell(), mk_lam("y", mk_bvar(1))));
    return t;
}

inline Term mk_xi(const Term& a, const Term& b) { return mk_app(mk_app(xi(), a), b); }

// a => b, i.e. Xi (K a) (K b)
inline Term mk_imp(const Term& a, const Term& b) { return mk_xi(mk_K(a), mk_K(b)); }

// Xi H I
inline Term comb_bot() {
    static const Term t = mk_xi(comb_H(), comb_I());
    return t;
}

namespace detail {

// Replaces index `depth` by s without closing the gap.
inline Term plug_index(const Term& t, const Term& s, std::uint32_t depth) {
    if (t->loose <= depth) return t;
    switch (t->tag) {
        case Tag::BVar: return t->index == depth ? shift(s, static_cast<int>(depth)) : t;
        case Tag::App: return mk_app(plug_index(t->fn, s, depth), plug_index(t->arg, s, depth));
        case Tag::Lam: return mk_lam(t->name, plug_index(t->fn, s, depth + 1));
        default: return t;
    }
}

}  // namespace detail

// F t1 t2 = lambda f. Xi t1 (lambda x. t2 (f x)); when t2 is lambda z. q the
// inner redex is contracted, giving lambda f. Xi t1 (lambda x. q[z := f x]).
inline Term mk_F(const Term& t1, const Term& t2) {
    Term fx = mk_app(mk_bvar(1), mk_bvar(0));
    Term inner;
    if (t2->tag == Tag::Lam) {
        // q lives under [z]; move its outer references past the extra binder.
        Term q = shift(t2->fn, 1, 1);
        inner = detail::plug_index(q, fx, 0);
    } else {
        inner = mk_app(shift(t2, 2), fx);
    }
    return mk_lam("f", mk_xi(shift(t1, 1), mk_lam("x", inner)));
}

// F as a combinator: lambda a b f. Xi a (lambda x. b (f x))
inline Term comb_F() {
    static const Term t = mk_lam(
        "a", mk_lam("b", mk_lam("f", mk_xi(mk_bvar(2), mk_lam("x", mk_app(mk_bvar(2), mk_app(mk_bvar(1), mk_bvar(0))))))));
    return t;
}

// Body of a vacuous abstraction.
inline std::optional<Term> match_K(const Term& t) {
    if (t->tag != Tag::Lam || has_index(t->fn, 0)) return std::nullopt;
    return instantiate(t->fn, mk_bvar(0));
}

inline std::optional<Term> match_H(const Term& t) {
    if (t->tag != Tag::App || !is_const(t->fn, ConstKind::L)) return std::nullopt;
    return match_K(t->arg);
}

inline std::optional<Term> match_L(const Term& t) {
    if (t->tag != Tag::App || !is_const(t->fn, ConstKind::L)) return std::nullopt;
    return t->arg;
}

inline std::optional<std::pair<Term, Term>> match_xi(const Term& t) {
    if (t->tag != Tag::App || t->fn->tag != Tag::App || !is_const(t->fn->fn, ConstKind::Xi)) return std::nullopt;
    return std::make_pair(t->fn->arg, t->arg);
}

inline std::optional<std::pair<Term, Term>> match_imp(const Term& t) {
    auto x = match_xi(t);
    if (!x) return std::nullopt;
    auto a = match_K(x->first), b = match_K(x->second);
    if (!a || !b) return std::nullopt;
    return std::make_pair(*a, *b);
}

namespace detail {

// Under [x, f]: replaces every `f x` by index 0 of a fresh binder and
// reports whether f or x still occur elsewhere.
inline std::optional<Term> extract_fx(const Term& t, std::uint32_t depth) {
    // index depth = x, depth+1 = f
    if (t->tag == Tag::App && t->fn->tag == Tag::BVar && t->fn->index == depth + 1 && t->arg->tag == Tag::BVar &&
        t->arg->index == depth)
        return mk_bvar(depth);
    switch (t->tag) {
        case Tag::BVar:
            if (t->index == depth || t->index == depth + 1) return std::nullopt;
            return t->index > depth + 1 ? mk_bvar(t->index - 1) : t;
        case Tag::App: {
            auto a = extract_fx(t->fn, depth);
            if (!a) return std::nullopt;
            auto b = extract_fx(t->arg, depth);
            if (!b) return std::nullopt;
            return mk_app(*a, *b);
        }
        case Tag::Lam: {
            auto b = extract_fx(t->fn, depth + 1);
            if (!b) return std::nullopt;
            return mk_lam(t->name, *b);
        }
        default: return t;
    }
}

}  // namespace detail

// Recovers (t1, t2) with mk_F(t1, t2) == t, preferring an eta-reduced t2.
inline std::optional<std::pair<Term, Term>> match_F(const Term& t) {
    if (t->tag != Tag::Lam) return std::nullopt;
    auto x = match_xi(t->fn);
    if (!x || has_index(x->first, 0) || x->second->tag != Tag::Lam) return std::nullopt;
    Term t1 = instantiate(x->first, mk_bvar(0));
    auto q = detail::extract_fx(x->second->fn, 0);
    if (!q) return std::nullopt;
    Term t2 = mk_lam("z", *q);
    const Term& body = t2->fn;
    if (body->tag == Tag::App && body->arg->tag == Tag::BVar && body->arg->index == 0 && !has_index(body->fn, 0)) {
        Term f = instantiate(body->fn, mk_bvar(0));
        if (f->tag != Tag::Lam) t2 = f;
    }
    if (!term_eq(mk_F(t1, t2), t)) return std::nullopt;
    return std::make_pair(t1, t2);
}

}  // namespace illatra
