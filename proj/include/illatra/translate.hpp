// Embedding of the restricted second-order predicate calculus into the
// illative system: formula translation, the context Γ(Δ), type inhabitants,
// and a proof compiler from predicate derivations to illative ones.
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "illative.hpp"
#include "pred2.hpp"

namespace illatra::tr {

using pred::PTag;
using pred::PTerm;
using pred::Type;

struct CompileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The typing predicate of a type: A_b for base types, H for o, F A_dom A_cod for arrows.
inline Term a_type(const Type& t) {
    switch (t->kind) {
        case pred::TypeNode::Base: return base_pred(t->text);
        case pred::TypeNode::O: return comb_H();
        default: return mk_F(a_type(t->dom), a_type(t->cod));
    }
}

inline Term translate(const PTerm& q) {
    switch (q->tag) {
        case PTag::Var: return mk_fvar(q->name);
        case PTag::Const: return user_const(q->name);
        case PTag::App: return mk_app(translate(q->a), translate(q->b));
        case PTag::Imp: return mk_imp(translate(q->a), translate(q->b));
        case PTag::Forall: return mk_xi(a_type(q->vtype), lam(q->name, translate(q->a)));
    }
    throw CompileError("unknown formula node");
}

// Sentinel inhabitant of a base type; the '%' prefix keeps it out of user syntax.
inline std::string sentinel(const std::string& base) { return "%y_" + base; }

inline Term typed(const Type& t, const Term& x) { return mk_app(a_type(t), x); }

// Γ of a finite formula set: typings of free variables and constants, L A_b,
// and one sentinel per base type.
inline std::vector<Term> gamma(const pred::Signature& sig, const std::vector<PTerm>& fs) {
    std::map<std::string, Type> fv;
    for (auto& f : fs)
        for (auto& [n, t] : pred::free_vars(f)) fv.emplace(n, t);
    std::vector<Term> g;
    for (auto& [n, t] : fv) g = ill::with_hyp(g, typed(t, mk_fvar(n)));
    for (auto& [c, t] : sig.consts) g = ill::with_hyp(g, typed(t, user_const(c)));
    for (auto& b : sig.base_types) g = ill::with_hyp(g, mk_app(ell(), base_pred(b)));
    for (auto& b : sig.base_types) g = ill::with_hyp(g, mk_app(base_pred(b), mk_fvar(sentinel(b))));
    return g;
}

// ⟦Δ⟧ ∪ Γ(Δ, φ): the hypotheses of a compiled judgement.
inline std::vector<Term> context(const pred::Signature& sig, const std::vector<PTerm>& delta, const PTerm& phi) {
    std::vector<Term> out;
    for (auto& d : delta) out = ill::with_hyp(out, translate(d));
    std::vector<PTerm> all = delta;
    all.push_back(phi);
    for (auto& t : gamma(sig, all)) out = ill::with_hyp(out, t);
    return out;
}

inline ParseOptions parse_options(const pred::Signature& sig) {
    ParseOptions o;
    for (auto& [c, t] : sig.consts) o.constants.insert(c);
    o.allow_internal = true;
    return o;
}

// ---------------------------------------------------------------- typing derivations

// Γ ⊢ L A_τ. Arrow types need FL and so are outside I0.
inline ill::Deriv derive_L(const Type& t, const std::vector<Term>& g) {
    switch (t->kind) {
        case pred::TypeNode::Base: return ill::ax_la(g, t->text);
        case pred::TypeNode::O: return ill::ax_lh(g);
        default: {
            Term a1 = a_type(t->dom), a2 = a_type(t->cod);
            std::string x = ill::fresh_eigen(g, {a1, a2});
            std::vector<Term> g2 = ill::with_hyp(g, mk_app(a1, mk_fvar(x)));
            return ill::f_l(g, a1, a2, x, derive_L(t->cod, g2), derive_L(t->dom, g));
        }
    }
}

inline ill::Deriv derive_H(const std::vector<Term>& g, const PTerm& phi);

// Γ ⊢ A_τ ⟦t⟧ for a typed term t whose free variables and constants are typed in Γ.
inline ill::Deriv derive_A(const std::vector<Term>& g, const PTerm& t) {
    Term goal = typed(t->type, translate(t));
    switch (t->tag) {
        case PTag::Var:
        case PTag::Const:
            if (!ill::has_hyp(g, goal)) throw CompileError("no typing hypothesis for " + t->name);
            return ill::ax(g, goal);
        case PTag::App: {
            ill::Deriv df = derive_A(g, t->a);
            Term f = translate(t->a);
            Term a_dom = a_type(t->a->type->dom), a_cod = a_type(t->a->type->cod);
            std::set<std::string> avoid = free_vars(f);
            std::string z = fresh_name("z", avoid);
            Term body = lam(z, mk_app(a_cod, mk_app(f, mk_fvar(z))));
            ill::Deriv major = ill::eq(mk_xi(a_dom, body), df);
            ill::Deriv minor = derive_A(g, t->b);
            return ill::eq(goal, ill::xi_e(major, minor));
        }
        default: return ill::eq(goal, derive_H(g, t));
    }
}

// Γ ⊢ H ⟦φ⟧, by induction on φ.
inline ill::Deriv derive_H(const std::vector<Term>& g, const PTerm& phi) {
    Term tphi = translate(phi);
    switch (phi->tag) {
        case PTag::Imp: {
            Term a = translate(phi->a);
            ill::Deriv inner = derive_H(ill::with_hyp(g, a), phi->b);
            ill::Deriv ha = derive_H(g, phi->a);
            return ill::elaborate_ph(inner, ha, a);
        }
        case PTag::Forall: {
            std::set<std::string> avoid = ill::fv_all(g);
            for (auto& n : pred::all_var_names(phi)) avoid.insert(n);
            collect_fv(tphi, avoid);
            std::string v = fresh_name(phi->name, avoid);
            PTerm inst = pred::subst(phi->a, phi->name, pred::p_var(v, phi->vtype));
            auto x = match_xi(tphi);
            std::vector<Term> g2 = ill::with_hyp(g, typed(phi->vtype, mk_fvar(v)));
            ill::Deriv body = ill::eq(mk_H(mk_app(x->second, mk_fvar(v))), derive_H(g2, inst));
            return ill::xi_h(g, x->first, x->second, v, body, derive_L(phi->vtype, g));
        }
        default: return ill::eq(mk_H(tphi), derive_A(g, phi));
    }
}

// A witness t with Γ ⊢ A_τ t. Γ must contain the sentinels of the base types.
inline std::pair<Term, ill::Deriv> inhabit(const Type& t, const std::vector<Term>& g) {
    switch (t->kind) {
        case pred::TypeNode::Base: {
            Term y = mk_fvar(sentinel(t->text));
            Term goal = typed(t, y);
            if (!ill::has_hyp(g, goal)) throw CompileError("missing sentinel for base type " + t->text);
            return {y, ill::ax(g, goal)};
        }
        case pred::TypeNode::O: {
            Term w = ill::lh();
            return {w, ill::eq(typed(t, w), ill::hi(ill::ax_lh(g)))};
        }
        default: {
            auto [t2, d2] = inhabit(t->cod, g);
            Term w = mk_K(t2);
            Term a1 = a_type(t->dom), a2 = a_type(t->cod);
            std::string x = ill::fresh_eigen(g, {t2});
            std::set<std::string> avoid{x};
            collect_fv(w, avoid);
            std::string z = fresh_name("z", avoid);
            Term body_fn = lam(z, mk_app(a2, mk_app(w, mk_fvar(z))));
            ill::Deriv body = ill::eq(mk_app(body_fn, mk_fvar(x)), ill::weaken(d2, {mk_app(a1, mk_fvar(x))}));
            ill::Deriv d = ill::xi_i(g, a1, body_fn, x, body, derive_L(t->dom, g));
            return {w, ill::eq(typed(t, w), d)};
        }
    }
}

// ---------------------------------------------------------------- proof compiler

namespace detail {

inline ill::Deriv conform(ill::Deriv d, const std::vector<Term>& target) {
    std::vector<Term> missing;
    for (auto& h : target)
        if (!ill::has_hyp(d.hyps, h)) missing.push_back(h);
    d = ill::weaken(d, missing);
    if (!ill::same_hyps(ill::hyp_set(d.hyps), ill::hyp_set(target)))
        throw CompileError("compiled judgement has unexpected hypotheses");
    return d;
}

inline ill::Deriv compile_at(const pred::Derivation& d, const pred::Signature& sig) {
    const std::vector<Term> target = context(sig, d.hyps, d.concl);
    const Term goal = translate(d.concl);
    if (d.rule == "Axiom") return ill::ax(target, goal);
    if (d.rule == "ImpI") {
        ill::Deriv body = compile_at(d.premises[0], sig);
        Term a = translate(d.concl->a);
        ill::Deriv ha = derive_H(target, d.concl->a);
        return conform(ill::elaborate_pi(body, ha, a), target);
    }
    if (d.rule == "ImpE") {
        const pred::Derivation& major = d.premises[0];
        const pred::Derivation& minor = d.premises[1];
        const PTerm& psi = minor.concl;
        std::vector<PTerm> all = d.hyps;
        all.push_back(psi);
        all.push_back(d.concl);
        std::vector<Term> wide = target;
        for (auto& h : gamma(sig, all)) wide = ill::with_hyp(wide, h);
        ill::Deriv m1 = conform(compile_at(major, sig), wide);
        ill::Deriv m2 = conform(compile_at(minor, sig), wide);
        ill::Deriv r = ill::eq(goal, ill::elaborate_pe(m1, m2));
        // Variables of the cut formula that occur nowhere else get replaced by
        // inhabitants, and their typing hypotheses are then cut away.
        std::map<std::string, Type> stray = pred::free_vars(psi);
        std::set<std::string> keep;
        for (auto& h : d.hyps)
            for (auto& n : pred::fv_names(h)) keep.insert(n);
        for (auto& n : pred::fv_names(d.concl)) keep.insert(n);
        for (auto& [x, t] : stray) {
            if (keep.count(x)) continue;
            auto [w, inh] = inhabit(t, target);
            r = ill::subst_deriv(r, x, w);
            Term h = typed(t, w);
            if (!ill::has_hyp(target, h)) r = ill::cut(r, h, inh);
        }
        return conform(r, target);
    }
    if (d.rule == "ForallI") {
        const pred::Derivation& p = d.premises[0];
        std::string x = d.eigen.empty() ? d.concl->name : d.eigen;
        Term hx = typed(d.concl->vtype, mk_fvar(x));
        ill::Deriv body = ill::weaken(compile_at(p, sig), {hx});
        auto xi = match_xi(goal);
        ill::Deriv b = ill::eq(mk_app(xi->second, mk_fvar(x)), body);
        std::vector<Term> ext = ill::with_hyp(target, hx);
        b = conform(b, ext);
        return ill::xi_i(target, xi->first, xi->second, x, b, derive_L(d.concl->vtype, target));
    }
    if (d.rule == "ForallE") {
        const pred::Derivation& p = d.premises[0];
        ill::Deriv major = conform(compile_at(p, sig), target);
        ill::Deriv minor = derive_A(target, d.inst);
        return ill::eq(goal, ill::xi_e(major, minor));
    }
    throw CompileError("rule " + d.rule + " has no counterpart in I0");
}

}  // namespace detail

// From Δ ⊢ φ derive ⟦Δ⟧, Γ(Δ, φ) ⊢ ⟦φ⟧ in I0.
inline ill::Deriv compile(const pred::Derivation& d, const pred::Signature& sig) {
    auto r = pred::check_derivation(d, false);
    if (!r.ok) throw CompileError("input derivation does not check at " + r.path + ": " + r.reason);
    return detail::compile_at(d, sig);
}

}  // namespace illatra::tr
