// Finite-stage approximation of the term model for the classical illative
// system over a finite full model: canonical universes, the stage-indexed
// reduction systems, and the relations ~, ≻ and ⇝ as memoized three-valued
// queries, together with the invariant suite those relations must satisfy.
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reduce.hpp"
#include "sugar.hpp"
#include "syntax.hpp"
#include "term.hpp"
#include "verdict.hpp"

namespace illatra::stage {

// ---------------------------------------------------------------- extended types

struct TyNode;
using Ty = std::shared_ptr<const TyNode>;

struct TyNode {
    enum Kind { O, Base, Arrow, Omega, Eps } kind{};
    std::string name;  // Base
    Ty dom, cod;       // Arrow
    std::string text;  // cached printed form, also the identity of the type
};

struct TypeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Ty ty_atom(TyNode::Kind k, std::string name, std::string text) {
    auto n = std::make_shared<TyNode>();
    n->kind = k;
    n->name = std::move(name);
    n->text = std::move(text);
    return n;
}

inline Ty ty_o() { return ty_atom(TyNode::O, "", "o"); }
inline Ty ty_omega() { return ty_atom(TyNode::Omega, "", "omega"); }
inline Ty ty_eps() { return ty_atom(TyNode::Eps, "", "eps"); }
inline Ty ty_base(const std::string& b) {
    if (b == "o" || b == "omega" || b == "eps") throw TypeError("reserved base type name " + b);
    return ty_atom(TyNode::Base, b, b);
}

inline bool ty_eq(const Ty& a, const Ty& b) { return a->text == b->text; }

// τ→ε = ε for τ ≠ ε, ε→τ = ω, τ→ω = ω.
inline Ty ty_arrow(const Ty& a, const Ty& b) {
    if (a->kind == TyNode::Eps) return ty_omega();
    if (b->kind == TyNode::Eps) return ty_eps();
    if (b->kind == TyNode::Omega) return ty_omega();
    auto n = std::make_shared<TyNode>();
    n->kind = TyNode::Arrow;
    n->dom = a;
    n->cod = b;
    n->text = (a->kind == TyNode::Arrow ? "(" + a->text + ")" : a->text) + "->" + b->text;
    return n;
}

inline int ty_rank(const Ty& t) {
    if (t->kind != TyNode::Arrow) return 1;
    return std::max(ty_rank(t->dom) + 1, ty_rank(t->cod));
}

// Whether the type mentions neither ω nor ε.
inline bool ty_plain(const Ty& t) {
    switch (t->kind) {
        case TyNode::O:
        case TyNode::Base: return true;
        case TyNode::Arrow: return ty_plain(t->dom) && ty_plain(t->cod);
        default: return false;
    }
}

namespace detail {

class TyParser {
public:
    explicit TyParser(const std::string& s) : s_(s) {}
    Ty parse() {
        Ty t = arrow();
        skip();
        if (i_ != s_.size()) throw TypeError("trailing input in type: " + s_);
        return t;
    }

private:
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    Ty arrow() {
        Ty a = atom();
        skip();
        if (s_.compare(i_, 2, "->") == 0) {
            i_ += 2;
            return ty_arrow(a, arrow());
        }
        return a;
    }
    Ty atom() {
        skip();
        if (i_ < s_.size() && s_[i_] == '(') {
            ++i_;
            Ty t = arrow();
            skip();
            if (i_ >= s_.size() || s_[i_] != ')') throw TypeError("expected ) in type: " + s_);
            ++i_;
            return t;
        }
        std::size_t j = i_;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        if (j == i_) throw TypeError("expected a type at position " + std::to_string(i_) + " in " + s_);
        std::string id = s_.substr(i_, j - i_);
        i_ = j;
        if (id == "o") return ty_o();
        if (id == "omega") return ty_omega();
        if (id == "eps") return ty_eps();
        return ty_base(id);
    }
    const std::string& s_;
    std::size_t i_ = 0;
};

}  // namespace detail

inline Ty parse_ty(const std::string& s) { return detail::TyParser(s).parse(); }

// ---------------------------------------------------------------- canonical universe

struct SizeExplosion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UniverseSpec {
    std::map<std::string, std::vector<std::string>> base_domains;
    int rank_bound = 2;
    int stage_bound = 8;
    std::size_t step_budget = 200;
    std::vector<std::string> extra_witnesses;
    std::size_t size_cap = 1u << 16;  // largest canonical set we materialize
    int arrow_cap = 2;                // eager builds enumerate types with at most this many arrows
    std::size_t work_budget = 50000;  // terms explored per top-level query
};

inline UniverseSpec universe_spec_from_json(const nlohmann::json& j) {
    UniverseSpec s;
    for (auto& [b, els] : j.at("base_domains").items()) {
        ty_base(b);
        s.base_domains[b] = els.get<std::vector<std::string>>();
        if (s.base_domains[b].empty()) throw TypeError("empty base domain " + b);
    }
    s.rank_bound = j.value("rank_bound", s.rank_bound);
    s.stage_bound = j.value("stage_bound", s.stage_bound);
    s.step_budget = j.value("step_budget", s.step_budget);
    s.extra_witnesses = j.value("extra_witnesses", s.extra_witnesses);
    s.size_cap = j.value("size_cap", s.size_cap);
    s.arrow_cap = j.value("arrow_cap", s.arrow_cap);
    s.work_budget = j.value("work_budget", s.work_budget);
    if (s.rank_bound < 1 || s.stage_bound < 0 || s.step_budget == 0) throw TypeError("budgets must be positive");
    return s;
}

inline nlohmann::json to_json(const UniverseSpec& s) {
    return {{"base_domains", s.base_domains}, {"rank_bound", s.rank_bound},       {"stage_bound", s.stage_bound},
            {"step_budget", s.step_budget},   {"extra_witnesses", s.extra_witnesses}, {"size_cap", s.size_cap},
            {"arrow_cap", s.arrow_cap},       {"work_budget", s.work_budget}};
}

// The sets 𝕋_τ of canonical terms, materialized on demand. Constants carry
// their type in the name, "{type}label", so the table of a function
// constant is recovered from its label by mixed-radix decoding.
class Universe {
public:
    struct Space {
        std::vector<Term> elems;
        TermMap<std::size_t> index;
    };

    explicit Universe(UniverseSpec spec) : spec_(std::move(spec)) {
        for (auto& [b, els] : spec_.base_domains) {
            std::set<std::string> seen;
            for (auto& e : els)
                if (!seen.insert(e).second) throw TypeError("duplicate element " + e + " in domain " + b);
        }
    }

    const UniverseSpec& spec() const { return spec_; }

    std::vector<std::string> base_types() const {
        std::vector<std::string> out;
        for (auto& [b, _] : spec_.base_domains) out.push_back(b);
        return out;
    }

    bool is_base(const std::string& b) const { return spec_.base_domains.count(b) > 0; }

    static Term constant(const Ty& t, const std::string& label) { return canon_const("{" + t->text + "}" + label); }
    static Term top() { return constant(ty_o(), "top"); }
    static Term bot() { return constant(ty_o(), "bot"); }

    // 𝕋_τ for τ ≠ ω.
    const Space& space(const Ty& t) {
        if (auto it = spaces_.find(t->text); it != spaces_.end()) return it->second;
        Space s;
        switch (t->kind) {
            case TyNode::Omega: throw TypeError("the canonical set of omega is not materialized");
            case TyNode::Eps: break;
            case TyNode::O: s.elems = {top(), bot()}; break;
            case TyNode::Base: {
                auto it = spec_.base_domains.find(t->name);
                if (it == spec_.base_domains.end()) throw TypeError("undeclared base type " + t->name);
                for (auto& e : it->second) s.elems.push_back(constant(t, e));
                break;
            }
            case TyNode::Arrow: {
                if (t->dom->kind == TyNode::Omega) {
                    for (auto& r : space(t->cod).elems) s.elems.push_back(mk_lam("x", r));
                    break;
                }
                if (ty_rank(t->dom) > spec_.rank_bound || ty_rank(t->cod) > spec_.rank_bound)
                    throw SizeExplosion("type " + t->text + " exceeds the rank bound");
                std::size_t n = function_count(t);
                for (std::size_t k = 0; k < n; ++k) s.elems.push_back(constant(t, "f" + std::to_string(k)));
                break;
            }
        }
        for (std::size_t i = 0; i < s.elems.size(); ++i) s.index.emplace(s.elems[i], i);
        return spaces_.emplace(t->text, std::move(s)).first->second;
    }

    // |𝕋_τ2|^|𝕋_τ1|, or SizeExplosion.
    std::size_t function_count(const Ty& t) {
        std::size_t n1 = space(t->dom).elems.size(), n2 = space(t->cod).elems.size();
        std::size_t n = 1;
        for (std::size_t i = 0; i < n1; ++i) {
            if (n2 != 0 && n > spec_.size_cap / n2) throw SizeExplosion("canonical set of " + t->text + " is too large");
            n *= n2;
        }
        if (n > spec_.size_cap) throw SizeExplosion("canonical set of " + t->text + " is too large");
        return n;
    }

    // Type of a canonical constant, if the constant belongs to this universe.
    std::optional<Ty> const_type(const Term& c) {
        if (!is_const(c, ConstKind::Canon)) return std::nullopt;
        if (auto it = const_types_.find(c->name); it != const_types_.end()) return it->second;
        std::optional<Ty> out;
        try {
            const std::string& n = c->name;
            if (!n.empty() && n[0] == '{') {
                int depth = 0;
                std::size_t k = 0;
                for (; k < n.size(); ++k) {
                    if (n[k] == '{') ++depth;
                    if (n[k] == '}' && --depth == 0) break;
                }
                if (k < n.size()) {
                    Ty t = parse_ty(n.substr(1, k - 1));
                    if (t->kind != TyNode::Omega && t->kind != TyNode::Eps &&
                        !(t->kind == TyNode::Arrow && t->dom->kind == TyNode::Omega) && space(t).index.count(c))
                        out = t;
                }
            }
        } catch (const std::exception&) {
            out.reset();
        }
        const_types_.emplace(c->name, out);
        return out;
    }

    // Canonical type of ρ ≡ λx1..xn.c, namely ω→…→ω→type(c); nullopt if ρ is not canonical.
    std::optional<Ty> canonical_type(const Term& rho) {
        std::size_t n = 0;
        Term b = rho;
        while (b->tag == Tag::Lam) {
            if (has_index(b->fn, 0)) return std::nullopt;
            b = instantiate(b->fn, mk_bvar(0));
            ++n;
        }
        auto t = const_type(b);
        if (!t) return std::nullopt;
        Ty out = *t;
        for (std::size_t i = 0; i < n; ++i) out = ty_arrow(ty_omega(), out);
        return out;
    }

    bool is_canonical(const Term& t) { return canonical_type(t).has_value(); }

    // 𝓕(ρ)(ρ1). For ρ of type ω→τ the argument is ignored.
    Term apply_table(const Term& rho, const Term& arg) {
        auto t = canonical_type(rho);
        if (!t || (*t)->kind != TyNode::Arrow) throw TypeError("not a canonical function: " + print_term(rho));
        if (t->get()->dom->kind == TyNode::Omega) return instantiate(rho->fn, mk_bvar(0));
        const Space& dom = space((*t)->dom);
        auto it = dom.index.find(arg);
        if (it == dom.index.end()) throw TypeError("argument outside the table domain: " + print_term(arg));
        const Space& cod = space((*t)->cod);
        std::size_t k = std::stoull(label(rho).substr(1));
        for (std::size_t i = 0; i < it->second; ++i) k /= cod.elems.size();
        return cod.elems[k % cod.elems.size()];
    }

    // The constant whose table is `values` (indexed like 𝕋_dom).
    Term function_constant(const Ty& t, const std::vector<Term>& values) {
        const Space& cod = space(t->cod);
        std::size_t k = 0;
        for (std::size_t i = values.size(); i-- > 0;) {
            auto it = cod.index.find(values[i]);
            if (it == cod.index.end()) throw TypeError("table value outside the codomain");
            k = k * cod.elems.size() + it->second;
        }
        return constant(t, "f" + std::to_string(k));
    }

    static std::string label(const Term& c) {
        const std::string& n = c->name;
        int depth = 0;
        for (std::size_t k = 0; k < n.size(); ++k) {
            if (n[k] == '{') ++depth;
            if (n[k] == '}' && --depth == 0) return n.substr(k + 1);
        }
        return n;
    }

    // Every type over the base types, o and ω with at most arrow_cap arrows and
    // rank within the bound, materialized eagerly.
    std::vector<Ty> build() {
        std::vector<std::vector<Ty>> by_arrows(static_cast<std::size_t>(spec_.arrow_cap) + 1);
        by_arrows[0].push_back(ty_o());
        for (auto& b : base_types()) by_arrows[0].push_back(ty_base(b));
        std::vector<Ty> atoms_with_omega = by_arrows[0];
        atoms_with_omega.push_back(ty_omega());
        for (int k = 1; k <= spec_.arrow_cap; ++k)
            for (int i = 0; i < k; ++i) {
                int j = k - 1 - i;
                const auto& left = i == 0 ? atoms_with_omega : by_arrows[static_cast<std::size_t>(i)];
                for (auto& a : left)
                    for (auto& b : by_arrows[static_cast<std::size_t>(j)]) {
                        Ty t = ty_arrow(a, b);
                        if (t->kind == TyNode::Arrow && ty_rank(t) <= spec_.rank_bound)
                            by_arrows[static_cast<std::size_t>(k)].push_back(t);
                    }
            }
        std::vector<Ty> out{ty_eps()};
        for (auto& level : by_arrows)
            for (auto& t : level) {
                space(t);
                out.push_back(t);
            }
        return out;
    }

private:
    UniverseSpec spec_;
    std::map<std::string, Space> spaces_;
    std::unordered_map<std::string, std::optional<Ty>> const_types_;
};

// ---------------------------------------------------------------- stage relations

struct SimResult {
    Verdict v = Verdict::False;  // True: t ~ type; False: no rule applies
    Ty type;
};

struct Violation {
    std::string property;
    std::string detail;
};

struct CertifyResult {
    Verdict verdict = Verdict::Unknown;
    int stage = -1;          // first stage with a definite answer
    bool saturated = false;  // the last sweep added no new True entry
};

class Engine {
public:
    struct Config {
        int stage_bound = 8;
        std::size_t step_budget = 200;  // terms explored per ⇝ query
        std::size_t max_term_size = 400;
        std::size_t work_budget = 50000;  // terms explored per top-level query, over all nested ⇝ queries
        std::vector<Term> extra_witnesses;
    };

    Engine(Universe& u, Config c) : u_(u), cfg_(std::move(c)) {}

    static Config config_of(const UniverseSpec& s) {
        Config c;
        c.stage_bound = s.stage_bound;
        c.step_budget = s.step_budget;
        c.work_budget = s.work_budget;
        ParseOptions po;
        po.allow_internal = true;
        for (auto& w : s.extra_witnesses) c.extra_witnesses.push_back(parse_term(w, po));
        return c;
    }

    Universe& universe() { return u_; }
    const Config& config() const { return cfg_; }
    const std::vector<Violation>& recorded_violations() const { return recorded_; }

    // t ≻_n ρ
    Verdict succ(const Term& t, const Term& rho, int n) {
        if (n < 0) return Verdict::False;
        Query q(*this);
        Key k{t, rho, n};
        if (auto it = succ_memo_.find(k); it != succ_memo_.end() && usable(it->second)) return it->second.v;
        Verdict v = Verdict::False;
        if (n > 0 && succ(t, rho, n - 1) == Verdict::True) v = Verdict::True;
        else v = succ_clauses(t, rho, n);
        succ_memo_.insert_or_assign(k, cell(v));
        return v;
    }

    // t ⇝_n ρ: some R_n-reduct of t within the step budget is ≻_n ρ.
    Verdict leadsto(const Term& t, const Term& rho, int n) {
        if (n < 0) return Verdict::False;
        Query q(*this);
        Key k{t, rho, n};
        if (auto it = lead_memo_.find(k); it != lead_memo_.end() && usable(it->second)) return it->second.v;
        Verdict v = Verdict::Unknown;
        if (n > 0 && leadsto(t, rho, n - 1) == Verdict::True) v = Verdict::True;
        else v = explore(t, rho, n);
        lead_memo_.insert_or_assign(k, cell(v));
        return v;
    }

    // The type τ with t ~_n τ, if one is derivable.
    SimResult sim(const Term& t, int n) {
        if (n < 0) return {};
        Query q(*this);
        std::pair<Term, int> k{t, n};
        if (auto it = sim_memo_.find(k); it != sim_memo_.end() && usable(it->second.second)) return it->second.first;
        SimResult r;
        if (n > 0) {
            SimResult prev = sim(t, n - 1);
            if (prev.v == Verdict::True) r = prev;
        }
        if (r.v != Verdict::True) r = sim_rules(t, n);
        sim_memo_.insert_or_assign(k, std::make_pair(r, cell(r.v)));
        return r;
    }

    // Whether the last top-level query ran out of work budget.
    bool starved() const { return starved_; }

    // One-step reducts under R_n. `undecided` is set when some table rule
    // could neither be confirmed nor ruled out.
    std::vector<Term> reduce_step(const Term& t, int n, bool* undecided = nullptr) {
        bool unk = false;
        DeltaStepHook hook = [&](const Term& c, const Term& arg, std::uint32_t depth) {
            std::vector<Term> out;
            if (n < 1) return out;
            auto ct = u_.const_type(c);
            if (!ct || (*ct)->kind != TyNode::Arrow) return out;
            const Ty& dom = (*ct)->dom;
            Term a = open_loose(arg, depth);
            try {
                for (auto& r1 : u_.space(dom).elems) {
                    Verdict v = succ(a, r1, n - 1);
                    if (v == Verdict::True) out.push_back(u_.apply_table(c, r1));
                    else if (v == Verdict::Unknown) unk = true;
                }
            } catch (const SizeExplosion&) {
                unk = true;
            }
            return out;
        };
        auto out = one_step_reducts(t, &hook);
        if (undecided) *undecided = unk;
        return out;
    }

    // The model-level truth query: ⇝ ⊤ at the stage bound, stage by stage.
    CertifyResult certify_true(const Term& t) {
        CertifyResult r;
        std::size_t prev_true = count_true();
        for (int n = 0; n <= cfg_.stage_bound; ++n) {
            Verdict v = leadsto(t, Universe::top(), n);
            std::size_t now = count_true();
            r.saturated = n > 0 && now == prev_true;
            prev_true = now;
            r.verdict = v;
            if (v != Verdict::Unknown && r.stage < 0) r.stage = n;
            if (v == Verdict::True) break;
        }
        return r;
    }

    // Whether a and b have a common R_n-reduct among the first `budget` terms reachable from each.
    Verdict joinable(const Term& a, const Term& b, int n, std::size_t budget) {
        auto ra = reachable(a, n, budget), rb = reachable(b, n, budget);
        for (auto& x : ra.terms)
            if (rb.terms.count(x)) return Verdict::True;
        return ra.complete && rb.complete ? Verdict::False : Verdict::Unknown;
    }

    struct Reach {
        TermSet terms;
        bool complete = true;
    };

    Reach reachable(const Term& t, int n, std::size_t budget) {
        Reach r;
        std::deque<Term> q{t};
        r.terms.insert(t);
        while (!q.empty()) {
            Term u = q.front();
            q.pop_front();
            bool unk = false;
            for (auto& x : reduce_step(u, n, &unk)) {
                if (x->size > cfg_.max_term_size) {
                    r.complete = false;
                    continue;
                }
                if (r.terms.count(x)) continue;
                if (r.terms.size() >= budget) {
                    r.complete = false;
                    continue;
                }
                r.terms.insert(x);
                q.push_back(x);
            }
            if (unk) r.complete = false;
        }
        return r;
    }

    // ---------------------------------------------------------------- invariant suite

    struct Entry {
        Term t, rho;
        int n;
        Verdict v;
    };

    std::vector<Entry> succ_entries() const { return entries(succ_memo_); }
    std::vector<Entry> leadsto_entries() const { return entries(lead_memo_); }

    std::size_t count_true() const {
        std::size_t k = 0;
        for (auto& [key, c] : succ_memo_) k += c.v == Verdict::True;
        for (auto& [key, c] : lead_memo_) k += c.v == Verdict::True;
        for (auto& [key, r] : sim_memo_) k += r.first.v == Verdict::True;
        return k;
    }

    std::size_t cache_size() const { return succ_memo_.size() + lead_memo_.size() + sim_memo_.size(); }

    // Stage monotonicity, determinism of ⇝, type uniqueness, ⊤/⊥ disjointness
    // and the H-dichotomy over everything cached so far.
    std::vector<Violation> check_invariants() {
        std::vector<Violation> out = recorded_;
        auto succ_e = succ_entries();
        auto lead_e = leadsto_entries();
        for (auto& e : succ_e)
            if (e.v == Verdict::True && e.n < cfg_.stage_bound && succ(e.t, e.rho, e.n + 1) != Verdict::True)
                out.push_back({"monotonicity", describe(e)});
        for (auto& e : lead_e)
            if (e.v == Verdict::True && e.n < cfg_.stage_bound && leadsto(e.t, e.rho, e.n + 1) != Verdict::True)
                out.push_back({"monotonicity", describe(e)});

        // determinism: one canonical value per canonical type
        for (auto* list : {&succ_e, &lead_e}) {
            TermMap<std::map<std::string, Term>> seen;
            for (auto& e : *list) {
                if (e.v != Verdict::True) continue;
                auto ty = u_.canonical_type(e.rho);
                auto& m = seen[e.t];
                auto [it, fresh] = m.emplace((*ty)->text, e.rho);
                if (!fresh && !term_eq(it->second, e.rho))
                    out.push_back({"determinism", print_term(e.t) + " behaves as both " + print_term(it->second) +
                                                      " and " + print_term(e.rho)});
            }
        }

        TermMap<Ty> types;
        for (auto& [k, entry] : sim_memo_) {
            const SimResult& r = entry.first;
            if (r.v != Verdict::True) continue;
            auto [it, fresh] = types.emplace(k.first, r.type);
            if (!fresh && !ty_eq(it->second, r.type))
                out.push_back({"type uniqueness", print_term(k.first) + " ~ " + it->second->text + " and " + r.type->text});
        }

        for (auto& e : lead_e) {
            if (e.v != Verdict::True || !term_eq(e.rho, Universe::top())) continue;
            auto h = match_H(e.t);
            if (!h) continue;
            Verdict a = leadsto(*h, Universe::top(), e.n);
            Verdict b = a == Verdict::True ? Verdict::True : leadsto(*h, Universe::bot(), e.n + 1);
            if (a == Verdict::False && b == Verdict::False) out.push_back({"H dichotomy", describe(e)});
        }
        return out;
    }

    // One-state model conditions, sampled over cached terms with canonical
    // arguments. Only definite verdicts can witness a violation.
    // `max_pool` bounds how many cached terms are examined, smallest first.
    std::vector<Violation> check_model_conditions(std::size_t max_pool = SIZE_MAX) {
        std::vector<Violation> out;
        const Term top = Universe::top();
        const int N = cfg_.stage_bound;
        auto truth = [&](const Term& t) { return leadsto(t, top, N); };
        // conclusions get one extra stage, since each condition is a one-step closure property
        auto concl = [&](const Term& t) { return leadsto(t, top, N + 1); };

        // conditions 6 and 7
        if (truth(mk_app(ell(), comb_H())) != Verdict::True) out.push_back({"model condition 6", "L H"});
        for (auto& b : u_.base_types())
            if (truth(mk_app(ell(), base_pred(b))) != Verdict::True) out.push_back({"model condition 7", "L A@" + b});

        TermSet pool;
        for (auto& e : leadsto_entries()) pool.insert(e.t);
        for (auto& e : succ_entries()) pool.insert(e.t);
        if (pool.size() > max_pool) {
            std::vector<Term> v(pool.begin(), pool.end());
            std::sort(v.begin(), v.end(), [](const Term& a, const Term& b) {
                return a->size != b->size ? a->size < b->size : term_cmp(a, b) < 0;
            });
            v.resize(max_pool);
            pool = TermSet(v.begin(), v.end());
        }

        for (auto& t : pool) {
            Verdict tv = lead_true_at(t, top);
            // condition 5: X ∈ 𝒯 implies H X ∈ 𝒯
            if (tv == Verdict::True && t->size * 2 < cfg_.max_term_size && concl(mk_H(t)) == Verdict::False)
                out.push_back({"model condition 5", print_term(t)});
            auto x = match_xi(t);
            if (!x) continue;
            auto s = sim(x->first, N);
            if (s.v != Verdict::True || s.type->kind == TyNode::Omega) continue;
            const auto& zs = space_or_empty(s.type);
            // condition 2: Ξ X Y ∈ 𝒯 and X Z ∈ 𝒯 give Y Z ∈ 𝒯
            if (tv == Verdict::True)
                for (auto& z : zs)
                    if (truth(mk_app(x->first, z)) == Verdict::True && concl(mk_app(x->second, z)) == Verdict::False)
                        out.push_back({"model condition 2", print_term(t) + " at " + print_term(z)});
            // condition 1: L X ∈ 𝒯 and Y Z ∈ 𝒯 for all canonical Z give Ξ X Y ∈ 𝒯
            if (tv != Verdict::True && concl(t) == Verdict::False && truth(mk_app(ell(), x->first)) == Verdict::True) {
                bool all = true;
                for (auto& z : zs) all = all && truth(mk_app(x->second, z)) == Verdict::True;
                if (all) out.push_back({"model condition 1", print_term(t)});
            }
        }
        // conditions 3 and 4 on cached L- and H-terms
        for (auto& t : pool) {
            auto l = match_L(t);
            if (!l) continue;
            if (concl(t) != Verdict::False) continue;
            if (auto h = match_K(*l)) {
                auto x = match_xi(*h);
                if (!x) continue;
                auto s = sim(x->first, N);
                if (s.v != Verdict::True || s.type->kind == TyNode::Omega) continue;
                bool all = truth(mk_app(ell(), x->first)) == Verdict::True;
                for (auto& z : space_or_empty(s.type)) all = all && truth(mk_H(mk_app(x->second, z))) == Verdict::True;
                if (all) out.push_back({"model condition 3", print_term(t)});
            } else if (auto f = match_F(*l)) {
                auto s = sim(f->first, N);
                if (s.v != Verdict::True || s.type->kind == TyNode::Omega) continue;
                if (truth(mk_app(ell(), f->first)) != Verdict::True) continue;
                bool empty = true;
                for (auto& z : space_or_empty(s.type)) empty = empty && truth(mk_app(f->first, z)) == Verdict::False;
                if (truth(mk_app(ell(), f->second)) == Verdict::True || empty)
                    out.push_back({"model condition 4", print_term(t)});
            }
        }
        return out;
    }

private:
    struct Key {
        Term t, rho;
        int n;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return static_cast<std::size_t>(illatra::detail::mix(illatra::detail::mix(k.t->hash, k.rho->hash), static_cast<std::uint64_t>(k.n)));
        }
    };
    struct KeyEq {
        bool operator()(const Key& a, const Key& b) const {
            return a.n == b.n && term_eq(a.t, b.t) && term_eq(a.rho, b.rho);
        }
    };
    struct SimHash {
        std::size_t operator()(const std::pair<Term, int>& k) const {
            return static_cast<std::size_t>(illatra::detail::mix(k.first->hash, static_cast<std::uint64_t>(k.second)));
        }
    };
    struct SimEq {
        bool operator()(const std::pair<Term, int>& a, const std::pair<Term, int>& b) const {
            return a.second == b.second && term_eq(a.first, b.first);
        }
    };
    // An Unknown produced after the work budget ran out is provisional and
    // gets recomputed by later top-level queries.
    struct Cell {
        Verdict v = Verdict::Unknown;
        bool provisional = false;
        std::uint64_t epoch = 0;
    };
    using Memo = std::unordered_map<Key, Cell, KeyHash, KeyEq>;

    struct Query {
        Engine& e;
        explicit Query(Engine& en) : e(en) {
            if (e.depth_++ == 0) {
                ++e.epoch_;
                e.fuel_ = e.cfg_.work_budget;
                e.starved_ = false;
            }
        }
        ~Query() { --e.depth_; }
        Query(const Query&) = delete;
        Query& operator=(const Query&) = delete;
    };

    Cell cell(Verdict v) const { return {v, v == Verdict::Unknown && starved_, epoch_}; }
    bool usable(const Cell& c) const { return !c.provisional || c.epoch == epoch_; }

    static std::vector<Entry> entries(const Memo& m) {
        std::vector<Entry> out;
        for (auto& [k, c] : m) out.push_back({k.t, k.rho, k.n, c.v});
        // fixed order so that sweeps are reproducible
        std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
            if (a.n != b.n) return a.n < b.n;
            if (int c = term_cmp(a.t, b.t)) return c < 0;
            return term_cmp(a.rho, b.rho) < 0;
        });
        return out;
    }

    static std::string describe(const Entry& e) {
        return print_term(e.t) + " / " + print_term(e.rho) + " at stage " + std::to_string(e.n);
    }

    Verdict lead_true_at(const Term& t, const Term& rho) { return leadsto(t, rho, cfg_.stage_bound); }

    const std::vector<Term>& space_or_empty(const Ty& t) {
        static const std::vector<Term> none;
        try {
            return u_.space(t).elems;
        } catch (const std::exception&) {
            return none;
        }
    }

    // Loose indices below `depth` become distinct internal variables.
    static Term open_loose(const Term& t, std::uint32_t depth, std::uint32_t under = 0) {
        if (t->loose <= under) return t;
        switch (t->tag) {
            case Tag::BVar: return mk_fvar("%u" + std::to_string(t->index - under));
            case Tag::App: return mk_app(open_loose(t->fn, depth, under), open_loose(t->arg, depth, under));
            case Tag::Lam: return mk_lam(t->name, open_loose(t->fn, depth, under + 1));
            default: return t;
        }
    }

    // A variable standing for an arbitrary element of 𝕋_ω.
    static Term generic(const Term& t) {
        std::set<std::string> fv = free_vars(t);
        for (int i = 0;; ++i) {
            std::string n = "%g" + std::to_string(i);
            if (!fv.count(n)) return mk_fvar(n);
        }
    }

    // ∀ t3 ∈ 𝕋_τ. pred(t3); ω via the generic element, definite False only from a witness.
    template <class P>
    Verdict forall_in(const Ty& ty, const Term& ctx, P pred) {
        if (ty->kind == TyNode::Eps) return Verdict::True;
        if (ty->kind == TyNode::Omega) {
            for (auto& w : cfg_.extra_witnesses)
                if (pred(w) == Verdict::False) return Verdict::False;
            return pred(generic(ctx)) == Verdict::True ? Verdict::True : Verdict::Unknown;
        }
        Verdict acc = Verdict::True;
        try {
            for (auto& e : u_.space(ty).elems) {
                acc = v_and(acc, pred(e));
                if (acc == Verdict::False) return acc;
            }
        } catch (const SizeExplosion&) {
            return Verdict::Unknown;
        }
        return acc;
    }

    // ∃ t3 ∈ 𝕋_τ. pred(t3); for ω only witnesses can confirm.
    template <class P>
    Verdict exists_in(const Ty& ty, const Term& ctx, P pred) {
        if (ty->kind == TyNode::Eps) return Verdict::False;
        if (ty->kind == TyNode::Omega) {
            if (pred(generic(ctx)) == Verdict::True) return Verdict::True;
            for (auto& w : cfg_.extra_witnesses)
                if (pred(w) == Verdict::True) return Verdict::True;
            return Verdict::Unknown;
        }
        Verdict acc = Verdict::False;
        try {
            for (auto& e : u_.space(ty).elems) {
                acc = v_or(acc, pred(e));
                if (acc == Verdict::True) return acc;
            }
        } catch (const SizeExplosion&) {
            return Verdict::Unknown;
        }
        return acc;
    }

    bool is_base_pred(const Term& t) const {
        return is_const(t, ConstKind::BaseTypePred) && u_.is_base(t->name);
    }

    // ∃τ. t1 ~_n τ and check(τ)
    template <class P>
    Verdict with_type(const Term& t1, int n, P check) {
        SimResult s = sim(t1, n);
        if (s.v != Verdict::True) return s.v;
        return check(s.type);
    }

    Verdict succ_clauses(const Term& t, const Term& rho, int n) {
        if (term_eq(t, rho)) return Verdict::True;
        auto rty = u_.canonical_type(rho);
        if (!rty) throw TypeError("not a canonical term: " + print_term(rho));
        Verdict acc = Verdict::False;

        if ((*rty)->kind == TyNode::Arrow && n >= 1) {
            const Ty& dom = (*rty)->dom;
            acc = v_or(acc, forall_in(dom, mk_app(t, rho), [&](const Term& t1) {
                return leadsto(mk_app(t, t1), u_.apply_table(rho, t1), n - 1);
            }));
            if (acc == Verdict::True) return acc;
        }

        const Term top = Universe::top(), bot = Universe::bot();
        if (term_eq(rho, top)) {
            if (auto l = match_L(t)) {
                if (is_base_pred(*l) || term_eq(*l, comb_H())) return Verdict::True;
                if (auto h = match_K(*l); h && (term_eq(*h, top) || term_eq(*h, bot))) return Verdict::True;
            }
            if (t->tag == Tag::App && is_base_pred(t->fn)) {
                auto ct = u_.const_type(t->arg);
                if (ct && (*ct)->kind == TyNode::Base && (*ct)->name == t->fn->name) return Verdict::True;
            }
            if (n == 0) return acc;
            if (auto x = match_xi(t)) {
                acc = v_or(acc, with_type(x->first, n, [&](const Ty& ty) {
                    return forall_in(ty, t, [&](const Term& t3) { return leadsto(mk_app(x->second, t3), top, n - 1); });
                }));
                if (acc == Verdict::True) return acc;
            }
            if (auto l = match_L(t)) {
                if (auto h = match_K(*l)) {
                    if (auto x = match_xi(*h)) {
                        acc = v_or(acc, with_type(x->first, n, [&](const Ty& ty) {
                            return forall_in(ty, t, [&](const Term& t3) {
                                return leadsto(mk_H(mk_app(x->second, t3)), top, n - 1);
                            });
                        }));
                        if (acc == Verdict::True) return acc;
                    }
                    acc = v_or(acc, leadsto(*h, top, n - 1));
                    if (acc == Verdict::True) return acc;
                }
                if (auto f = match_F(*l)) {
                    acc = v_or(acc, with_type(f->first, n, [&](const Ty& ty) {
                        if (ty->kind == TyNode::Eps) return Verdict::True;
                        return leadsto(mk_app(ell(), f->second), top, n - 1);
                    }));
                }
            }
            return acc;
        }

        if (term_eq(rho, bot) && n > 0) {
            if (auto x = match_xi(t)) {
                Verdict h = succ(mk_H(t), top, n - 1);
                if (h != Verdict::False) {
                    Verdict w = with_type(x->first, n, [&](const Ty& ty) {
                        return exists_in(ty, t, [&](const Term& t3) { return leadsto(mk_app(x->second, t3), bot, n - 1); });
                    });
                    acc = v_or(acc, v_and(h, w));
                }
            }
        }
        return acc;
    }

    SimResult sim_rules(const Term& t, int n) {
        std::vector<SimResult> found;
        bool unknown = false;
        auto add = [&](Verdict v, const Ty& ty) {
            if (v == Verdict::True) found.push_back({v, ty});
            else if (v == Verdict::Unknown) unknown = true;
        };
        if (is_base_pred(t)) add(Verdict::True, ty_base(t->name));
        if (term_eq(t, comb_H())) add(Verdict::True, ty_o());
        if (n >= 1) {
            if (auto k = match_K(t)) {
                add(leadsto(*k, Universe::top(), n - 1), ty_omega());
                add(leadsto(*k, Universe::bot(), n - 1), ty_eps());
            }
            if (auto f = match_F(t)) {
                SimResult s1 = sim(f->first, n - 1);
                if (s1.v == Verdict::True && s1.type->kind == TyNode::Eps) add(Verdict::True, ty_omega());
                else if (s1.v != Verdict::False) {
                    SimResult s2 = sim(f->second, n - 1);
                    if (s1.v == Verdict::True && s2.v == Verdict::True) add(Verdict::True, ty_arrow(s1.type, s2.type));
                    else if (s2.v != Verdict::False) unknown = true;
                }
            }
        }
        if (!found.empty()) {
            for (auto& r : found)
                if (!ty_eq(r.type, found.front().type))
                    recorded_.push_back({"type uniqueness", print_term(t) + " ~ " + found.front().type->text + " and " +
                                                                r.type->text + " at stage " + std::to_string(n)});
            return found.front();
        }
        return {unknown ? Verdict::Unknown : Verdict::False, nullptr};
    }

    // Breadth-first search of the R_n-reducts of t for one that is ≻_n ρ.
    Verdict explore(const Term& t, const Term& rho, int n) {
        std::deque<Term> q{t};
        TermSet seen{t};
        bool complete = true, unknown = false;
        while (!q.empty()) {
            Term u = q.front();
            q.pop_front();
            if (fuel_ == 0) {
                starved_ = true;
                return Verdict::Unknown;
            }
            --fuel_;
            Verdict v = succ(u, rho, n);
            if (v == Verdict::True) return v;
            if (v == Verdict::Unknown) unknown = true;
            bool unk = false;
            for (auto& x : reduce_step(u, n, &unk)) {
                if (seen.count(x)) continue;
                if (x->size > cfg_.max_term_size || seen.size() >= cfg_.step_budget) {
                    complete = false;
                    continue;
                }
                seen.insert(x);
                q.push_back(x);
            }
            if (unk) complete = false;
        }
        return complete && !unknown ? Verdict::False : Verdict::Unknown;
    }

    Universe& u_;
    Config cfg_;
    Memo succ_memo_, lead_memo_;
    std::unordered_map<std::pair<Term, int>, std::pair<SimResult, Cell>, SimHash, SimEq> sim_memo_;
    std::vector<Violation> recorded_;
    int depth_ = 0;
    std::uint64_t epoch_ = 0;
    std::size_t fuel_ = 0;
    bool starved_ = false;
};

}  // namespace illatra::stage
