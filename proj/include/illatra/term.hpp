// Untyped lambda terms with illative constants, in locally nameless form.
//
// Bound variables are de Bruijn indices, free variables are names. Binder
// display names ride along for printing only, so structural equality is
// alpha-equivalence.
#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace illatra {

enum class ConstKind : std::uint8_t {
    Xi,            // the generalised implication
    L,             // "is a type"
    BaseTypePred,  // A_b for a base type b
    User,          // signature constant
    Canon,         // canonical element of a stage model, name "{type}label"
    External,      // fresh opaque constant, used as a generic element
    Box,           // hole of a multi-hole context
};

struct ConstId {
    ConstKind kind{};
    std::string name;
    friend bool operator==(const ConstId&, const ConstId&) = default;
    friend auto operator<=>(const ConstId&, const ConstId&) = default;
};

enum class Tag : std::uint8_t { BVar, FVar, Const, App, Lam };

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
    Tag tag{};
    ConstKind ckind{};
    std::uint32_t index = 0;   // BVar
    std::uint32_t loose = 0;   // one past the largest loose index, 0 if closed
    std::uint32_t size = 1;
    bool has_fvar = false;
    std::uint64_t hash = 0;
    std::string name;          // FVar name, Const name, Lam display name
    Term fn, arg;              // App: fn arg; Lam: body in fn
};

struct TermError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h * 0xff51afd7ed558ccdULL;
}

inline std::uint64_t str_hash(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    return h;
}

}  // namespace detail

inline Term mk_bvar(std::uint32_t i) {
    auto n = std::make_shared<Node>();
    n->tag = Tag::BVar;
    n->index = i;
    n->loose = i + 1;
    n->hash = detail::mix(1, i);
    return n;
}

inline Term mk_fvar(std::string name) {
    auto n = std::make_shared<Node>();
    n->tag = Tag::FVar;
    n->has_fvar = true;
    n->hash = detail::mix(2, detail::str_hash(name));
    n->name = std::move(name);
    return n;
}

inline Term mk_const(ConstKind k, std::string name) {
    auto n = std::make_shared<Node>();
    n->tag = Tag::Const;
    n->ckind = k;
    n->hash = detail::mix(detail::mix(3, static_cast<std::uint64_t>(k)), detail::str_hash(name));
    n->name = std::move(name);
    return n;
}

inline Term mk_app(Term f, Term a) {
    auto n = std::make_shared<Node>();
    n->tag = Tag::App;
    n->loose = std::max(f->loose, a->loose);
    n->size = f->size + a->size + 1;
    n->has_fvar = f->has_fvar || a->has_fvar;
    n->hash = detail::mix(detail::mix(4, f->hash), a->hash);
    n->fn = std::move(f);
    n->arg = std::move(a);
    return n;
}

inline Term mk_lam(std::string display, Term body) {
    auto n = std::make_shared<Node>();
    n->tag = Tag::Lam;
    n->loose = body->loose > 0 ? body->loose - 1 : 0;
    n->size = body->size + 1;
    n->has_fvar = body->has_fvar;
    n->hash = detail::mix(5, body->hash);
    n->name = std::move(display);
    n->fn = std::move(body);
    return n;
}

inline Term mk_apps(Term f, const std::vector<Term>& args) {
    for (const auto& a : args) f = mk_app(std::move(f), a);
    return f;
}

inline const Term& xi() {
    static const Term t = mk_const(ConstKind::Xi, "Xi");
    return t;
}
inline const Term& ell() {
    static const Term t = mk_const(ConstKind::L, "L");
    return t;
}
inline Term base_pred(const std::string& b) { return mk_const(ConstKind::BaseTypePred, b); }
inline Term user_const(const std::string& c) { return mk_const(ConstKind::User, c); }
inline Term canon_const(const std::string& name) { return mk_const(ConstKind::Canon, name); }
inline Term external_const(const std::string& name) { return mk_const(ConstKind::External, name); }

inline bool is_const(const Term& t, ConstKind k) { return t->tag == Tag::Const && t->ckind == k; }

// Structural equality; binder display names are ignored.
inline bool term_eq(const Term& a, const Term& b) {
    if (a.get() == b.get()) return true;
    if (a->hash != b->hash || a->tag != b->tag || a->size != b->size) return false;
    switch (a->tag) {
        case Tag::BVar: return a->index == b->index;
        case Tag::FVar: return a->name == b->name;
        case Tag::Const: return a->ckind == b->ckind && a->name == b->name;
        case Tag::App: return term_eq(a->fn, b->fn) && term_eq(a->arg, b->arg);
        case Tag::Lam: return term_eq(a->fn, b->fn);
    }
    return false;
}

// Deterministic total order compatible with term_eq.
inline int term_cmp(const Term& a, const Term& b) {
    if (a.get() == b.get()) return 0;
    if (a->tag != b->tag) return a->tag < b->tag ? -1 : 1;
    switch (a->tag) {
        case Tag::BVar: return a->index == b->index ? 0 : (a->index < b->index ? -1 : 1);
        case Tag::FVar: return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
        case Tag::Const:
            if (a->ckind != b->ckind) return a->ckind < b->ckind ? -1 : 1;
            return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
        case Tag::App: {
            int c = term_cmp(a->fn, b->fn);
            return c != 0 ? c : term_cmp(a->arg, b->arg);
        }
        case Tag::Lam: return term_cmp(a->fn, b->fn);
    }
    return 0;
}

struct TermHash {
    std::size_t operator()(const Term& t) const { return static_cast<std::size_t>(t->hash); }
};
struct TermEq {
    bool operator()(const Term& a, const Term& b) const { return term_eq(a, b); }
};
struct TermLess {
    bool operator()(const Term& a, const Term& b) const { return term_cmp(a, b) < 0; }
};

template <class V>
using TermMap = std::unordered_map<Term, V, TermHash, TermEq>;
using TermSet = std::set<Term, TermLess>;

// Adds d to every loose index >= cutoff.
inline Term shift(const Term& t, int d, std::uint32_t cutoff = 0) {
    if (d == 0 || t->loose <= cutoff) return t;
    switch (t->tag) {
        case Tag::BVar: {
            long long i = static_cast<long long>(t->index) + d;
            if (i < 0) throw TermError("negative de Bruijn index after shift");
            return mk_bvar(static_cast<std::uint32_t>(i));
        }
        case Tag::App: return mk_app(shift(t->fn, d, cutoff), shift(t->arg, d, cutoff));
        case Tag::Lam: return mk_lam(t->name, shift(t->fn, d, cutoff + 1));
        default: return t;
    }
}

// Replaces index `depth` by s (s lives outside all binders of t) and closes the gap.
inline Term instantiate(const Term& t, const Term& s, std::uint32_t depth = 0) {
    if (t->loose <= depth) return t;
    switch (t->tag) {
        case Tag::BVar:
            if (t->index == depth) return shift(s, static_cast<int>(depth));
            return mk_bvar(t->index - 1);
        case Tag::App: return mk_app(instantiate(t->fn, s, depth), instantiate(t->arg, s, depth));
        case Tag::Lam: return mk_lam(t->name, instantiate(t->fn, s, depth + 1));
        default: return t;
    }
}

inline bool has_index(const Term& t, std::uint32_t i) {
    if (t->loose <= i) return false;
    switch (t->tag) {
        case Tag::BVar: return t->index == i;
        case Tag::App: return has_index(t->fn, i) || has_index(t->arg, i);
        case Tag::Lam: return has_index(t->fn, i + 1);
        default: return false;
    }
}

// Turns free variable x into the index `depth`, shifting existing loose indices up.
inline Term close_over(const Term& t, const std::string& x, std::uint32_t depth = 0) {
    if (!t->has_fvar && t->loose <= depth) return t;
    switch (t->tag) {
        case Tag::BVar: return t->index >= depth ? mk_bvar(t->index + 1) : t;
        case Tag::FVar: return t->name == x ? mk_bvar(depth) : t;
        case Tag::App: return mk_app(close_over(t->fn, x, depth), close_over(t->arg, x, depth));
        case Tag::Lam: return mk_lam(t->name, close_over(t->fn, x, depth + 1));
        default: return t;
    }
}

// lambda x. body, where x is free in body.
inline Term lam(const std::string& x, const Term& body) { return mk_lam(x, close_over(body, x)); }

// Body of a Lam with its bound variable replaced by s.
inline Term open_lam(const Term& l, const Term& s) { return instantiate(l->fn, s); }

inline void collect_fv(const Term& t, std::set<std::string>& out) {
    if (!t->has_fvar) return;
    switch (t->tag) {
        case Tag::FVar: out.insert(t->name); break;
        case Tag::App: collect_fv(t->fn, out); collect_fv(t->arg, out); break;
        case Tag::Lam: collect_fv(t->fn, out); break;
        default: break;
    }
}

inline std::set<std::string> free_vars(const Term& t) {
    std::set<std::string> s;
    collect_fv(t, s);
    return s;
}

inline bool occurs_free(const Term& t, const std::string& x) {
    if (!t->has_fvar) return false;
    switch (t->tag) {
        case Tag::FVar: return t->name == x;
        case Tag::App: return occurs_free(t->fn, x) || occurs_free(t->arg, x);
        case Tag::Lam: return occurs_free(t->fn, x);
        default: return false;
    }
}

// Capture-free substitution t[x := s]; loose indices of s are treated as outer binders.
inline Term subst(const Term& t, const std::string& x, const Term& s, std::uint32_t depth = 0) {
    if (!t->has_fvar) return t;
    switch (t->tag) {
        case Tag::FVar: return t->name == x ? shift(s, static_cast<int>(depth)) : t;
        case Tag::App: return mk_app(subst(t->fn, x, s, depth), subst(t->arg, x, s, depth));
        case Tag::Lam: return mk_lam(t->name, subst(t->fn, x, s, depth + 1));
        default: return t;
    }
}

inline bool contains_const(const Term& t, ConstKind k) {
    switch (t->tag) {
        case Tag::Const: return t->ckind == k;
        case Tag::App: return contains_const(t->fn, k) || contains_const(t->arg, k);
        case Tag::Lam: return contains_const(t->fn, k);
        default: return false;
    }
}

// Head and arguments of an application spine.
inline Term spine(const Term& t, std::vector<Term>& args) {
    args.clear();
    Term h = t;
    while (h->tag == Tag::App) {
        args.push_back(h->arg);
        h = h->fn;
    }
    std::reverse(args.begin(), args.end());
    return h;
}

// A name based on `base` that avoids everything in `taken`.
inline std::string fresh_name(std::string base, const std::set<std::string>& taken) {
    while (taken.count(base)) base += '\'';
    return base;
}

}  // namespace illatra
