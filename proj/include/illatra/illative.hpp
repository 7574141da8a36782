// Derivations in the illative systems: a checker, the transformations the
// proof compiler needs (weakening, substitution, cut), elaboration of the
// derived implication rules, and a bounded backward proof search.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "reduce.hpp"
#include "sugar.hpp"
#include "syntax.hpp"
#include "term.hpp"

namespace illatra::ill {

enum class System { I0, Iw, Iwc };

inline const char* to_string(System s) {
    switch (s) {
        case System::I0: return "i0";
        case System::Iw: return "iw";
        default: return "iwc";
    }
}

inline System system_from_string(const std::string& s) {
    if (s == "i0" || s == "I0") return System::I0;
    if (s == "iw" || s == "Iw") return System::Iw;
    if (s == "iwc" || s == "Iwc") return System::Iwc;
    throw std::runtime_error("unknown system '" + s + "'");
}

struct Deriv {
    std::string rule;  // Ax AxLH AxLA Eq Hi XiE XiI XiH FL DN
    std::vector<Term> hyps;
    Term goal;
    std::string x;      // eigenvariable of XiI, XiH, FL
    std::string tau;    // AxLA
    Term t1, t2, t3;    // optional records; XiE uses t1 and t3
    std::size_t budget = 0;  // Eq; 0 means the checker's budget
    std::vector<Deriv> premises;
};

// The double-negation axiom term.
inline Term dn_term() {
    static const Term t = parse_term("Xi H (\\x. ((x => bot) => bot) => x)");
    return t;
}

inline Term lh() {
    static const Term t = mk_app(ell(), comb_H());
    return t;
}

inline TermSet hyp_set(const std::vector<Term>& hs) { return TermSet(hs.begin(), hs.end()); }

// std::set's operator== compares pointers, so compare through term_eq.
inline bool same_hyps(const TermSet& a, const TermSet& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](const Term& x, const Term& y) { return term_eq(x, y); });
}

inline bool has_hyp(const std::vector<Term>& hs, const Term& t) {
    for (auto& h : hs)
        if (term_eq(h, t)) return true;
    return false;
}

inline std::vector<Term> with_hyp(std::vector<Term> hs, const Term& t) {
    if (!has_hyp(hs, t)) hs.push_back(t);
    return hs;
}

inline std::set<std::string> fv_all(const std::vector<Term>& hs) {
    std::set<std::string> s;
    for (auto& h : hs) collect_fv(h, s);
    return s;
}

// ---------------------------------------------------------------- checking

enum class Status { OK, RuleError, Undecided };

struct CheckResult {
    Status status = Status::OK;
    std::string path;
    std::string reason;
    bool ok() const { return status == Status::OK; }
};

struct CheckOptions {
    System system = System::Iw;
    Budget budget{};
    std::set<std::string> base_types;  // empty: any base type name accepted by AxLA
};

namespace detail {

inline CheckResult bad(const std::string& path, const std::string& why) {
    return CheckResult{Status::RuleError, path.empty() ? "root" : path, why};
}

inline CheckResult check_at(const Deriv& d, const CheckOptions& o, const std::string& path) {
    auto need = [&](std::size_t n) -> std::optional<CheckResult> {
        if (d.premises.size() != n)
            return bad(path, d.rule + " expects " + std::to_string(n) + " premises, got " + std::to_string(d.premises.size()));
        return std::nullopt;
    };
    if (!d.goal) return bad(path, "missing goal");
    CheckResult pending;
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
        CheckResult r = check_at(d.premises[i], o, path + (path.empty() ? "" : "/") + std::to_string(i));
        if (r.status == Status::RuleError) return r;
        if (r.status == Status::Undecided && pending.ok()) pending = r;
    }
    const TermSet here = hyp_set(d.hyps);
    auto same = [&](const Deriv& p) { return same_hyps(hyp_set(p.hyps), here); };
    auto extended = [&](const Deriv& p, const Term& extra) {
        TermSet e = here;
        e.insert(extra);
        return same_hyps(hyp_set(p.hyps), e);
    };
    auto local = [&]() -> CheckResult {
        if (d.rule == "Ax") {
            if (auto e = need(0)) return *e;
            if (!here.count(d.goal)) return bad(path, "goal is not a hypothesis");
            return {};
        }
        if (d.rule == "AxLH") {
            if (auto e = need(0)) return *e;
            if (!term_eq(d.goal, lh())) return bad(path, "goal is not L H");
            return {};
        }
        if (d.rule == "AxLA") {
            if (auto e = need(0)) return *e;
            auto a = match_L(d.goal);
            if (!a || !is_const(*a, ConstKind::BaseTypePred)) return bad(path, "goal is not L A for a base type");
            if (!d.tau.empty() && d.tau != (*a)->name) return bad(path, "recorded type differs from the goal");
            if (!o.base_types.empty() && !o.base_types.count((*a)->name))
                return bad(path, "'" + (*a)->name + "' is not a base type");
            return {};
        }
        if (d.rule == "Eq") {
            if (auto e = need(1)) return *e;
            if (!same(d.premises[0])) return bad(path, "premise hypotheses differ");
            Budget b = o.budget;
            if (d.budget > b.steps) b.steps = d.budget;
            Verdict v = beta_eta_equal(d.premises[0].goal, d.goal, b);
            if (v == Verdict::True) return {};
            if (v == Verdict::Unknown) return CheckResult{Status::Undecided, path.empty() ? "root" : path, "equality undecided within budget"};
            return bad(path, "premise goal is not beta-eta equal to the goal");
        }
        if (d.rule == "Hi") {
            if (auto e = need(1)) return *e;
            if (!same(d.premises[0])) return bad(path, "premise hypotheses differ");
            if (!term_eq(d.goal, mk_H(d.premises[0].goal))) return bad(path, "goal is not H of the premise");
            return {};
        }
        if (d.rule == "XiE") {
            if (auto e = need(2)) return *e;
            const Deriv& major = d.premises[0];
            const Deriv& minor = d.premises[1];
            if (!same(major) || !same(minor)) return bad(path, "premise hypotheses differ");
            auto x = match_xi(major.goal);
            if (!x) return bad(path, "major premise is not a Xi term");
            if (d.t1 && !term_eq(d.t1, x->first)) return bad(path, "recorded mediator differs from the major premise");
            if (minor.goal->tag != Tag::App || !term_eq(minor.goal->fn, x->first))
                return bad(path, "minor premise is not the mediator applied to a term");
            Term t3 = minor.goal->arg;
            if (d.t3 && !term_eq(d.t3, t3)) return bad(path, "recorded argument differs from the minor premise");
            Term expect = mk_app(x->second, t3);
            if (term_eq(expect, d.goal)) return {};
            Verdict v = beta_eta_equal(expect, d.goal, o.budget);
            if (v == Verdict::True) return {};
            if (v == Verdict::Unknown) return CheckResult{Status::Undecided, path.empty() ? "root" : path, "conclusion match undecided"};
            return bad(path, "goal is not the consequent applied to the argument");
        }
        if (d.rule == "XiI" || d.rule == "XiH" || d.rule == "FL") {
            if (auto e = need(2)) return *e;
            if (d.rule == "FL" && o.system == System::I0) return bad(path, "FL is not a rule of I0");
            Term t1, t2;
            if (d.rule == "XiI") {
                auto x = match_xi(d.goal);
                if (!x) return bad(path, "goal is not a Xi term");
                t1 = x->first;
                t2 = x->second;
            } else if (d.rule == "XiH") {
                auto h = match_H(d.goal);
                auto x = h ? match_xi(*h) : std::nullopt;
                if (!x) return bad(path, "goal is not H of a Xi term");
                t1 = x->first;
                t2 = x->second;
            } else {
                auto l = match_L(d.goal);
                if (!l) return bad(path, "goal is not L of an F term");
                if (d.t1 && d.t2) {
                    if (!term_eq(*l, mk_F(d.t1, d.t2))) return bad(path, "goal is not L (F t1 t2) for the recorded terms");
                    t1 = d.t1;
                    t2 = d.t2;
                } else {
                    auto f = match_F(*l);
                    if (!f) return bad(path, "goal is not L of an F term");
                    t1 = f->first;
                    t2 = f->second;
                }
            }
            if (d.x.empty()) return bad(path, "missing eigenvariable");
            if (t1->loose || t2->loose) return bad(path, "open subterm");
            Term xv = mk_fvar(d.x);
            auto fv = fv_all(d.hyps);
            if (fv.count(d.x) || occurs_free(t1, d.x) || occurs_free(t2, d.x))
                return bad(path, "freshness: " + d.x + " occurs free in the hypotheses or the goal");
            const Deriv& p0 = d.premises[0];
            const Deriv& p1 = d.premises[1];
            if (!extended(p0, mk_app(t1, xv))) return bad(path, "first premise must add t1 " + d.x + " to the hypotheses");
            Term want = d.rule == "XiI" ? mk_app(t2, xv) : d.rule == "XiH" ? mk_H(mk_app(t2, xv)) : mk_app(ell(), t2);
            if (!term_eq(p0.goal, want)) return bad(path, "first premise proves the wrong term");
            if (!same(p1)) return bad(path, "second premise hypotheses differ");
            if (!term_eq(p1.goal, mk_app(ell(), t1))) return bad(path, "second premise is not L t1");
            return {};
        }
        if (d.rule == "DN") {
            if (auto e = need(0)) return *e;
            if (o.system != System::Iwc) return bad(path, "double negation needs the classical system");
            if (!term_eq(d.goal, dn_term())) return bad(path, "goal is not the double-negation axiom");
            return {};
        }
        return bad(path, "unknown rule '" + d.rule + "'");
    };
    CheckResult r = local();
    if (!r.ok()) return r;
    return pending;
}

}  // namespace detail

inline CheckResult check(const Deriv& d, const CheckOptions& o = {}) { return detail::check_at(d, o, ""); }

inline std::size_t size(const Deriv& d) {
    std::size_t n = 1;
    for (auto& p : d.premises) n += size(p);
    return n;
}

inline std::size_t height(const Deriv& d) {
    std::size_t h = 0;
    for (auto& p : d.premises) h = std::max(h, height(p));
    return h + 1;
}

inline void count_rules(const Deriv& d, std::map<std::string, std::size_t>& out) {
    ++out[d.rule];
    for (auto& p : d.premises) count_rules(p, out);
}

// ---------------------------------------------------------------- constructors

inline Deriv ax(const std::vector<Term>& g, const Term& t) { return Deriv{"Ax", g, t, "", "", {}, {}, {}, 0, {}}; }
inline Deriv ax_lh(const std::vector<Term>& g) { return Deriv{"AxLH", g, lh(), "", "", {}, {}, {}, 0, {}}; }
inline Deriv ax_la(const std::vector<Term>& g, const std::string& tau) {
    return Deriv{"AxLA", g, mk_app(ell(), base_pred(tau)), "", tau, {}, {}, {}, 0, {}};
}
inline Deriv eq(const Term& goal, Deriv p) {
    if (term_eq(goal, p.goal)) return p;
    Deriv d{"Eq", p.hyps, goal, "", "", {}, {}, {}, 0, {}};
    d.premises.push_back(std::move(p));
    return d;
}
inline Deriv hi(Deriv p) {
    Deriv d{"Hi", p.hyps, mk_H(p.goal), "", "", {}, {}, {}, 0, {}};
    d.premises.push_back(std::move(p));
    return d;
}
// From Γ ⊢ Xi t1 t2 and Γ ⊢ t1 t3, concludes Γ ⊢ t2 t3.
inline Deriv xi_e(Deriv major, Deriv minor) {
    auto x = match_xi(major.goal);
    if (!x || minor.goal->tag != Tag::App) throw std::runtime_error("xi_e: premises have the wrong shape");
    Deriv d{"XiE", major.hyps, mk_app(x->second, minor.goal->arg), "", "", x->first, {}, minor.goal->arg, 0, {}};
    d.premises.push_back(std::move(major));
    d.premises.push_back(std::move(minor));
    return d;
}
inline Deriv xi_i(const std::vector<Term>& g, const Term& t1, const Term& t2, const std::string& x, Deriv body, Deriv lt1) {
    Deriv d{"XiI", g, mk_xi(t1, t2), x, "", t1, t2, {}, 0, {}};
    d.premises.push_back(std::move(body));
    d.premises.push_back(std::move(lt1));
    return d;
}
inline Deriv xi_h(const std::vector<Term>& g, const Term& t1, const Term& t2, const std::string& x, Deriv body, Deriv lt1) {
    Deriv d{"XiH", g, mk_H(mk_xi(t1, t2)), x, "", t1, t2, {}, 0, {}};
    d.premises.push_back(std::move(body));
    d.premises.push_back(std::move(lt1));
    return d;
}
inline Deriv f_l(const std::vector<Term>& g, const Term& t1, const Term& t2, const std::string& x, Deriv body, Deriv lt1) {
    Deriv d{"FL", g, mk_app(ell(), mk_F(t1, t2)), x, "", t1, t2, {}, 0, {}};
    d.premises.push_back(std::move(body));
    d.premises.push_back(std::move(lt1));
    return d;
}

// ---------------------------------------------------------------- transformations

inline std::set<std::string> names_in(const Deriv& d) {
    std::set<std::string> s = fv_all(d.hyps);
    collect_fv(d.goal, s);
    if (!d.x.empty()) s.insert(d.x);
    for (auto& p : d.premises)
        for (auto& n : names_in(p)) s.insert(n);
    return s;
}

inline std::string fresh_for(const std::string& base, const std::set<std::string>& avoid) {
    return fresh_name(base, avoid);
}

// Replaces free variable v by term s throughout; eigenvariables that would
// capture a variable of s are renamed first.
inline Deriv subst_deriv(const Deriv& d, const std::string& v, const Term& s) {
    Deriv r = d;
    r.hyps.clear();
    for (auto& h : d.hyps) r.hyps = with_hyp(r.hyps, subst(h, v, s));
    r.goal = subst(r.goal, v, s);
    if (r.t1) r.t1 = subst(r.t1, v, s);
    if (r.t2) r.t2 = subst(r.t2, v, s);
    if (r.t3) r.t3 = subst(r.t3, v, s);
    if (!r.x.empty()) {
        if (r.x == v) {
            // v is local to the first premise here.
            r.premises[1] = subst_deriv(d.premises[1], v, s);
            return r;
        }
        if (occurs_free(s, r.x)) {
            std::set<std::string> avoid = names_in(d);
            collect_fv(s, avoid);
            avoid.insert(v);
            std::string y = fresh_for(r.x, avoid);
            r.premises[0] = subst_deriv(d.premises[0], r.x, mk_fvar(y));
            r.x = y;
            r.premises[0] = subst_deriv(r.premises[0], v, s);
            r.premises[1] = subst_deriv(d.premises[1], v, s);
            return r;
        }
    }
    for (auto& p : r.premises) p = subst_deriv(p, v, s);
    return r;
}

// Adds hypotheses to every node, renaming eigenvariables that would clash.
inline Deriv weaken(const Deriv& d, const std::vector<Term>& extra) {
    if (extra.empty()) return d;
    std::set<std::string> fve = fv_all(extra);
    Deriv r = d;
    for (auto& e : extra) r.hyps = with_hyp(r.hyps, e);
    if (!r.x.empty() && fve.count(r.x)) {
        std::set<std::string> avoid = names_in(d);
        for (auto& n : fve) avoid.insert(n);
        std::string y = fresh_for(r.x, avoid);
        r.premises[0] = subst_deriv(d.premises[0], r.x, mk_fvar(y));
        r.x = y;
        r.premises[0] = weaken(r.premises[0], extra);
        r.premises[1] = weaken(d.premises[1], extra);
        return r;
    }
    for (auto& p : r.premises) p = weaken(p, extra);
    return r;
}

namespace detail {

inline Deriv cut_at(const Deriv& d, const Term& h, const Deriv& proof) {
    if (!has_hyp(d.hyps, h)) return d;
    Deriv r = d;
    std::vector<Term> hs;
    for (auto& x : d.hyps)
        if (!term_eq(x, h)) hs.push_back(x);
    if (d.rule == "Ax" && term_eq(d.goal, h)) {
        std::vector<Term> extra;
        for (auto& x : hs)
            if (!has_hyp(proof.hyps, x)) extra.push_back(x);
        return weaken(proof, extra);
    }
    r.hyps = hs;
    for (std::size_t i = 0; i < r.premises.size(); ++i) {
        const Deriv& p = d.premises[i];
        // A premise that adds h itself keeps it as a local hypothesis.
        bool local = !d.x.empty() && i == 0 && d.t1 && term_eq(mk_app(d.t1, mk_fvar(d.x)), h);
        if (local) {
            r.premises[i] = p;
            continue;
        }
        r.premises[i] = cut_at(p, h, proof);
    }
    return r;
}

}  // namespace detail

// Removes hypothesis h from d using a derivation of it from the remaining hypotheses.
inline Deriv cut(const Deriv& d, const Term& h, const Deriv& proof) {
    // Eigenvariables of d must not occur in the inserted proof's hypotheses.
    return detail::cut_at(d, h, proof);
}

// Swaps hypothesis `from` for `to` given that to =βη from.
inline Deriv replace_hyp(const Deriv& d, const Term& from, const Term& to) {
    if (term_eq(from, to)) return d;
    Deriv w = weaken(d, {to});
    std::vector<Term> base;
    for (auto& h : w.hyps)
        if (!term_eq(h, from)) base.push_back(h);
    Deriv link = eq(from, ax(base, to));
    return cut(w, from, link);
}

// ---------------------------------------------------------------- derived rules

inline std::string fresh_eigen(const std::vector<Term>& g, const std::vector<Term>& ts, const std::string& base = "x") {
    std::set<std::string> avoid = fv_all(g);
    for (auto& t : ts) collect_fv(t, avoid);
    return fresh_name(base, avoid);
}

// Hypotheses of d with h removed.
inline std::vector<Term> without(const std::vector<Term>& hs, const Term& h) {
    std::vector<Term> out;
    for (auto& x : hs)
        if (!term_eq(x, h)) out.push_back(x);
    return out;
}

// From Γ, t1 ⊢ t2 and Γ ⊢ H t1 derive Γ ⊢ t1 => t2.
inline Deriv elaborate_pi(const Deriv& body, const Deriv& h_t1, const Term& t1) {
    const std::vector<Term>& g = h_t1.hyps;
    if (!term_eq(h_t1.goal, mk_H(t1))) throw std::runtime_error("Pi: second premise must prove H t1");
    Term t2 = body.goal;
    Term k1 = mk_K(t1), k2 = mk_K(t2);
    std::string x = fresh_eigen(body.hyps, {t1, t2});
    Term hx = mk_app(k1, mk_fvar(x));
    Deriv b = has_hyp(g, t1) ? weaken(body, {hx}) : replace_hyp(body, t1, hx);
    Deriv p0 = eq(mk_app(k2, mk_fvar(x)), b);
    return xi_i(g, k1, k2, x, p0, h_t1);
}

// From Γ ⊢ t1 => t2 and Γ ⊢ t1 derive Γ ⊢ t2.
inline Deriv elaborate_pe(const Deriv& imp, const Deriv& arg) {
    auto im = match_imp(imp.goal);
    if (!im) throw std::runtime_error("Pe: first premise is not an implication");
    auto x = match_xi(imp.goal);
    Term t1 = im->first;
    Deriv minor = eq(mk_app(x->first, t1), arg);
    Deriv e = xi_e(imp, minor);
    return eq(im->second, e);
}

// From Γ, t1 ⊢ H t2 and Γ ⊢ H t1 derive Γ ⊢ H (t1 => t2).
inline Deriv elaborate_ph(const Deriv& body, const Deriv& h_t1, const Term& t1) {
    const std::vector<Term>& g = h_t1.hyps;
    auto t2 = match_H(body.goal);
    if (!t2) throw std::runtime_error("PH: first premise must prove H t2");
    if (!term_eq(h_t1.goal, mk_H(t1))) throw std::runtime_error("PH: second premise must prove H t1");
    Term k1 = mk_K(t1), k2 = mk_K(*t2);
    std::string x = fresh_eigen(body.hyps, {t1, *t2});
    Term hx = mk_app(k1, mk_fvar(x));
    Deriv b = has_hyp(g, t1) ? weaken(body, {hx}) : replace_hyp(body, t1, hx);
    Deriv p0 = eq(mk_H(mk_app(k2, mk_fvar(x))), b);
    return xi_h(g, k1, k2, x, p0, h_t1);
}

inline Deriv elaborate_weak(const Deriv& d, const Term& extra) { return weaken(d, {extra}); }

// ---------------------------------------------------------------- bounded search

struct SearchOptions {
    System system = System::Iw;
    Budget budget{200, 20000};
    int depth = 6;
    std::vector<Term> extra_terms;   // further mediator and argument candidates
    std::set<std::string> base_types;
};

class Searcher {
public:
    Searcher(SearchOptions o) : o_(std::move(o)) {}

    std::optional<Deriv> prove(const std::vector<Term>& g, const Term& goal) {
        pool_.clear();
        failed_.clear();
        std::vector<Term> seeds = g;
        seeds.push_back(goal);
        for (auto& t : o_.extra_terms) seeds.push_back(t);
        for (auto& t : seeds) harvest(t);
        for (int d = 1; d <= o_.depth; ++d)
            if (auto r = go(g, goal, d)) return r;
        return std::nullopt;
    }

private:
    void harvest(const Term& t) {
        if (t->loose == 0 && t->size <= 64) pool_.insert(t);
        if (t->fn) harvest(t->fn);
        if (t->arg) harvest(t->arg);
    }

    std::optional<Term> nf(const Term& t) {
        auto r = beta_eta_normalize(t, o_.budget);
        if (r.exhausted()) return std::nullopt;
        return *r.term;
    }

    std::string key(const std::vector<Term>& g, const Term& goal) {
        std::string k;
        for (auto& h : hyp_set(g)) k += std::to_string(h->hash) + ",";
        return k + "|" + std::to_string(goal->hash);
    }

    std::optional<Deriv> go(const std::vector<Term>& g, const Term& goal, int depth) {
        if (depth <= 0) return std::nullopt;
        std::string k = key(g, goal);
        if (auto it = failed_.find(k); it != failed_.end() && it->second >= depth) return std::nullopt;
        auto r = attempt(g, goal, depth);
        if (!r) failed_[k] = std::max(failed_[k], depth);
        return r;
    }

    std::optional<Deriv> attempt(const std::vector<Term>& g, const Term& goal, int depth) {
        if (has_hyp(g, goal)) return ax(g, goal);
        auto ng = nf(goal);
        for (auto& h : g) {
            if (!ng) break;
            auto nh = nf(h);
            if (nh && term_eq(*nh, *ng)) return eq(goal, ax(g, h));
        }
        if (!ng) return std::nullopt;
        const Term& t = *ng;
        auto wrap = [&](std::optional<Deriv> d) -> std::optional<Deriv> {
            if (!d) return d;
            return eq(goal, std::move(*d));
        };
        if (term_eq(t, lh())) return wrap(ax_lh(g));
        if (auto a = match_L(t); a && is_const(*a, ConstKind::BaseTypePred) &&
                                 (o_.base_types.empty() || o_.base_types.count((*a)->name)))
            return wrap(ax_la(g, (*a)->name));
        if (o_.system == System::Iwc && term_eq(t, dn_term())) return wrap(Deriv{"DN", g, t, "", "", {}, {}, {}, 0, {}});
        if (auto x = match_xi(t)) {
            std::string v = fresh_eigen(g, {x->first, x->second});
            Term hx = mk_app(x->first, mk_fvar(v));
            if (auto lt = go(g, mk_app(ell(), x->first), depth - 1))
                if (auto body = go(with_hyp(g, hx), mk_app(x->second, mk_fvar(v)), depth - 1))
                    return wrap(xi_i(g, x->first, x->second, v, *body, *lt));
        }
        if (auto h = match_H(t)) {
            if (auto x = match_xi(*h)) {
                std::string v = fresh_eigen(g, {x->first, x->second});
                Term hx = mk_app(x->first, mk_fvar(v));
                if (auto lt = go(g, mk_app(ell(), x->first), depth - 1))
                    if (auto body = go(with_hyp(g, hx), mk_H(mk_app(x->second, mk_fvar(v))), depth - 1))
                        return wrap(xi_h(g, x->first, x->second, v, *body, *lt));
            }
            if (auto p = go(g, *h, depth - 1)) return wrap(hi(*p));
        }
        if (o_.system != System::I0)
            if (auto l = match_L(t))
                if (auto f = match_F(*l)) {
                    std::string v = fresh_eigen(g, {f->first, f->second});
                    Term hx = mk_app(f->first, mk_fvar(v));
                    if (auto lt = go(g, mk_app(ell(), f->first), depth - 1))
                        if (auto body = go(with_hyp(g, hx), mk_app(ell(), f->second), depth - 1))
                            return wrap(f_l(g, f->first, f->second, v, *body, *lt));
                }
        // Xi elimination through mediators harvested from the problem.
        std::vector<Term> mediators;
        for (auto& h : g) collect_xis(h, mediators);
        for (auto& p : pool_) collect_xis(p, mediators);
        for (auto& m : mediators) {
            auto x = match_xi(m);
            for (auto& t3 : pool_) {
                Term app = mk_app(x->second, t3);
                auto na = nf(app);
                if (!na || !term_eq(*na, t)) continue;
                if (auto maj = go(g, m, depth - 1))
                    if (auto mnr = go(g, mk_app(x->first, t3), depth - 1)) return eq(goal, xi_e(*maj, *mnr));
            }
        }
        return std::nullopt;
    }

    static void collect_xis(const Term& t, std::vector<Term>& out) {
        if (t->loose == 0 && match_xi(t)) {
            bool seen = false;
            for (auto& o : out)
                if (term_eq(o, t)) seen = true;
            if (!seen) out.push_back(t);
        }
        if (t->fn) collect_xis(t->fn, out);
        if (t->arg) collect_xis(t->arg, out);
    }

    SearchOptions o_;
    TermSet pool_;
    std::map<std::string, int> failed_;
};

// True with a re-checked proof, or Unknown; never False.
struct SearchResult {
    Verdict verdict = Verdict::Unknown;
    std::optional<Deriv> proof;
};

inline SearchResult term_model_eval(const std::vector<Term>& g, const Term& goal, const SearchOptions& o = {}) {
    Searcher s(o);
    auto p = s.prove(g, goal);
    if (!p) return {};
    CheckOptions co{o.system, o.budget, o.base_types};
    if (!check(*p, co).ok()) return {};
    return {Verdict::True, p};
}

// ---------------------------------------------------------------- JSON

struct JsonContext {
    ParseOptions parse;
    PrintOptions print{};
};

inline nlohmann::json to_json(const Deriv& d) {
    nlohmann::json j;
    j["rule"] = d.rule;
    j["hyps"] = nlohmann::json::array();
    for (auto& h : d.hyps) j["hyps"].push_back(print_term(h));
    j["goal"] = print_term(d.goal);
    nlohmann::json p = nlohmann::json::object();
    if (!d.x.empty()) p["x"] = d.x;
    if (!d.tau.empty()) p["tau"] = d.tau;
    if (d.t1) p["t1"] = print_term(d.t1);
    if (d.t2) p["t2"] = print_term(d.t2);
    if (d.t3) p["t3"] = print_term(d.t3);
    if (d.budget) p["budget"] = d.budget;
    j["params"] = p;
    j["premises"] = nlohmann::json::array();
    for (auto& q : d.premises) j["premises"].push_back(to_json(q));
    return j;
}

inline Deriv from_json(const nlohmann::json& j, const ParseOptions& po) {
    Deriv d;
    d.rule = j.at("rule").get<std::string>();
    const auto hyps = j.value("hyps", nlohmann::json::array());
    for (auto& h : hyps) d.hyps.push_back(parse_term(h.get<std::string>(), po));
    d.goal = parse_term(j.at("goal").get<std::string>(), po);
    const auto p = j.value("params", nlohmann::json::object());
    d.x = p.value("x", "");
    d.tau = p.value("tau", "");
    if (p.contains("t1")) d.t1 = parse_term(p["t1"].get<std::string>(), po);
    if (p.contains("t2")) d.t2 = parse_term(p["t2"].get<std::string>(), po);
    if (p.contains("t3")) d.t3 = parse_term(p["t3"].get<std::string>(), po);
    d.budget = p.value("budget", std::size_t{0});
    const auto prem = j.value("premises", nlohmann::json::array());
    for (auto& q : prem) d.premises.push_back(from_json(q, po));
    return d;
}

}  // namespace illatra::ill
