// The mirror of a finite Kripke model: canonical constants for its elements,
// the fixed reduction system of beta, eta and the function tables, and the
// per-state stage relations ~, ≻ and ⇝ over closed terms. Forcing of a
// translated formula is read off as ⇝ ⊤ at a state.
#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "kripke.hpp"
#include "reduce.hpp"
#include "stagesem_omega.hpp"
#include "sugar.hpp"
#include "syntax.hpp"
#include "term.hpp"
#include "translate.hpp"
#include "verdict.hpp"

namespace illatra::mirror {

using pred::PTerm;
using stage::SimResult;
using stage::Ty;
using stage::TyNode;
using stage::Violation;

struct MirrorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Where the type of a quantifier range is computed in the Ξ clauses.
// EachSuccessor takes t1 ~^{s'} τ at every s' ≥ s; QueryState takes it once at s
// and then quantifies over s', which loses monotonicity on chains (see tests).
enum class TypeAt { EachSuccessor, QueryState };

class Mirror {
public:
    struct Rule {
        Term lhs, rhs;
    };

    explicit Mirror(kripke::Model m, const pred::Signature* sig = nullptr) : m_(std::move(m)) {
        for (auto& [ty, els] : m_.domains) {
            for (std::size_t k = 0; k < els.size(); ++k) {
                Term c = canon_const("{" + ty + "}d" + std::to_string(k));
                info_.emplace(c, Info{ty, els[k]});
                by_elem_[ty][els[k]] = c;
                spaces_[ty].push_back(c);
            }
            if (ty != "o" && ty.find("->") == std::string::npos && ty.find('(') == std::string::npos) bases_.push_back(ty);
        }
        if (!m_.domains.count("o")) throw MirrorError("model has no domain for o");
        for (auto& e : m_.domains.at("o")) {
            auto it = m_.sigma.find(e);
            if (it == m_.sigma.end()) throw MirrorError("o-element " + e + " has no truth set");
            bool all = std::all_of(it->second.begin(), it->second.end(), [](bool b) { return b; });
            bool none = std::none_of(it->second.begin(), it->second.end(), [](bool b) { return b; });
            if (all && !top_) top_ = by_elem_["o"][e];
            if (none && !bot_) bot_ = by_elem_["o"][e];
        }
        if (!top_ || !bot_) throw MirrorError("o needs elements true everywhere and nowhere");

        // table rules c c1 -> c2
        for (auto& [ty, els] : m_.domains) {
            pred::Type pt;
            try {
                pt = pred::parse_type(ty);
            } catch (const std::exception&) {
                continue;
            }
            if (pt->kind != pred::TypeNode::Arrow) continue;
            const std::string dom = pt->dom->text, cod = pt->cod->text;
            if (!m_.domains.count(dom) || !m_.domains.count(cod))
                throw MirrorError("function type " + ty + " lacks component domains");
            for (auto& f : els) {
                auto row = m_.app.find(f);
                for (auto& a : m_.domains.at(dom)) {
                    if (row == m_.app.end() || !row->second.count(a))
                        throw MirrorError("table of " + f + " misses " + a);
                    const std::string& v = row->second.at(a);
                    auto vt = by_elem_[cod].find(v);
                    if (vt == by_elem_[cod].end()) throw MirrorError("table of " + f + " leaves " + cod);
                    Term lhs = mk_app(by_elem_[ty][f], by_elem_[dom][a]);
                    table_.emplace(lhs, vt->second);
                    rules_.push_back({lhs, vt->second});
                }
            }
        }

        // c ↦ c⁺
        for (auto& [c, e] : m_.interp) {
            std::optional<std::string> ty;
            if (sig) {
                auto it = sig->consts.find(c);
                if (it != sig->consts.end()) ty = it->second->text;
            }
            if (!ty)
                for (auto& [t, els] : m_.domains)
                    if (std::find(els.begin(), els.end(), e) != els.end()) {
                        if (ty) throw MirrorError("interpretation of " + c + " is ambiguous; pass a signature");
                        ty = t;
                    }
            if (!ty || !by_elem_[*ty].count(e)) throw MirrorError("interpretation of " + c + " is not an element");
            plus_.emplace(c, by_elem_[*ty][e]);
        }
    }

    const kripke::Model& model() const { return m_; }
    std::size_t state_count() const { return m_.states.size(); }
    std::vector<std::size_t> successors(std::size_t s) const { return m_.successors(s); }
    const std::vector<std::string>& base_types() const { return bases_; }
    bool is_base(const std::string& b) const { return std::find(bases_.begin(), bases_.end(), b) != bases_.end(); }

    const Term& top() const { return *top_; }
    const Term& bot() const { return *bot_; }

    Term constant(const std::string& type, const std::string& elem) const {
        auto it = by_elem_.find(type);
        if (it == by_elem_.end() || !it->second.count(elem)) throw MirrorError("no element " + elem + " of type " + type);
        return it->second.at(elem);
    }

    bool is_canonical(const Term& c) const { return c->tag == Tag::Const && info_.count(c); }
    // δ: the type and the element behind a canonical constant
    std::optional<std::pair<std::string, std::string>> element(const Term& c) const {
        auto it = info_.find(c);
        if (it == info_.end()) return std::nullopt;
        return std::make_pair(it->second.type, it->second.elem);
    }
    bool has_type(const Term& c, const std::string& type) const {
        auto it = info_.find(c);
        return it != info_.end() && it->second.type == type;
    }

    const std::vector<Term>& space(const std::string& type) const {
        static const std::vector<Term> none;
        auto it = spaces_.find(type);
        return it == spaces_.end() ? none : it->second;
    }

    // s ∈ ς(δ(c)) for c of type o
    bool holds(const Term& c, std::size_t s) const { return m_.sigma.at(info_.at(c).elem)[s]; }

    std::optional<Term> table(const Term& f, const Term& a) const {
        auto it = table_.find(mk_app(f, a));
        if (it == table_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<Rule>& rules() const { return rules_; }

    Term plus(const std::string& c) const {
        auto it = plus_.find(c);
        if (it == plus_.end()) throw MirrorError("constant " + c + " is not interpreted");
        return it->second;
    }
    const std::map<std::string, Term>& plus_map() const { return plus_; }

    // The closed instance of the translation of phi under the mirrored valuation.
    Term instance(const PTerm& phi, const kripke::Valuation& w) const {
        Term t = replace_user(tr::translate(phi));
        for (auto& [x, ty] : pred::free_vars(phi)) {
            auto it = w.find(x);
            if (it == w.end()) throw MirrorError("valuation does not cover " + x);
            t = subst(t, x, constant(ty->text, it->second));
        }
        return t;
    }

    // Overlaps between left-hand sides, ill-typed rules and non-functional
    // tables. β and η never overlap a table rule, whose left-hand side is a
    // pair of constants.
    std::vector<std::string> critical_pairs() const {
        std::vector<std::string> out;
        TermMap<Term> seen;
        for (auto& r : rules_) {
            auto [it, fresh] = seen.emplace(r.lhs, r.rhs);
            if (!fresh && !term_eq(it->second, r.rhs))
                out.push_back(print_term(r.lhs) + " rewrites to " + print_term(it->second) + " and " + print_term(r.rhs));
            if (!is_canonical(r.lhs->fn) || !is_canonical(r.lhs->arg) || !is_canonical(r.rhs))
                out.push_back("rule " + print_term(r.lhs) + " mentions a non-canonical constant");
            auto ft = pred::parse_type(info_.at(r.lhs->fn).type);
            if (ft->kind != pred::TypeNode::Arrow || !has_type(r.lhs->arg, ft->dom->text) || !has_type(r.rhs, ft->cod->text))
                out.push_back("rule " + print_term(r.lhs) + " is ill-typed");
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["top"] = print_term(top());
        j["bot"] = print_term(bot());
        auto& cs = j["constants"] = nlohmann::json::array();
        for (auto& [ty, els] : m_.domains)
            for (auto& e : els) cs.push_back({{"type", ty}, {"element", e}, {"term", print_term(by_elem_.at(ty).at(e))}});
        auto& rs = j["rules"] = nlohmann::json::array();
        for (auto& r : rules_) rs.push_back(print_term(r.lhs) + " -> " + print_term(r.rhs));
        auto& ps = j["plus"] = nlohmann::json::object();
        for (auto& [c, t] : plus_) ps[c] = print_term(t);
        return j;
    }

private:
    struct Info {
        std::string type, elem;
    };

    Term replace_user(const Term& t) const {
        switch (t->tag) {
            case Tag::Const: return t->ckind == ConstKind::User ? plus(t->name) : t;
            case Tag::App: return mk_app(replace_user(t->fn), replace_user(t->arg));
            case Tag::Lam: return mk_lam(t->name, replace_user(t->fn));
            default: return t;
        }
    }

    kripke::Model m_;
    TermMap<Info> info_;
    std::map<std::string, std::map<std::string, Term>> by_elem_;
    std::map<std::string, std::vector<Term>> spaces_;
    std::vector<std::string> bases_;
    std::optional<Term> top_, bot_;
    TermMap<Term> table_;
    std::vector<Rule> rules_;
    std::map<std::string, Term> plus_;
};

struct ForceResult {
    Verdict verdict = Verdict::Unknown;
    int stage = -1;  // first stage at which ⊤ or ⊥ was reached
};

class Engine {
public:
    struct Config {
        int stage_bound = 8;
        std::size_t step_budget = 200;
        std::size_t max_term_size = 400;
        std::size_t work_budget = 200000;
        TypeAt type_at = TypeAt::EachSuccessor;
    };

    Engine(const Mirror& m, Config c) : m_(m), cfg_(c) {}
    explicit Engine(const Mirror& m) : Engine(m, Config{}) {}

    const Mirror& mirror() const { return m_; }
    const Config& config() const { return cfg_; }
    const std::vector<Violation>& recorded_violations() const { return recorded_; }
    bool starved() const { return starved_; }

    // t ≻_n^s ρ
    Verdict succ(const Term& t, const Term& rho, int n, std::size_t s) {
        if (n < 0) return Verdict::False;
        require_closed(t);
        Query q(*this);
        Key k{t, is_top(rho), n, s};
        if (auto it = succ_memo_.find(k); it != succ_memo_.end() && usable(it->second)) return it->second.v;
        Verdict v = Verdict::False;
        if (n > 0 && succ(t, rho, n - 1, s) == Verdict::True) v = Verdict::True;
        else v = succ_clauses(t, k.top, n, s);
        succ_memo_.insert_or_assign(k, cell(v));
        return v;
    }

    // t ⇝_n^s ρ: some R-reduct of t within the step budget is ≻_n^s ρ.
    Verdict leadsto(const Term& t, const Term& rho, int n, std::size_t s) {
        if (n < 0) return Verdict::False;
        require_closed(t);
        Query q(*this);
        Key k{t, is_top(rho), n, s};
        if (auto it = lead_memo_.find(k); it != lead_memo_.end() && usable(it->second)) return it->second.v;
        Verdict v = Verdict::Unknown;
        if (n > 0 && leadsto(t, rho, n - 1, s) == Verdict::True) v = Verdict::True;
        else v = explore(t, rho, n, s);
        lead_memo_.insert_or_assign(k, cell(v));
        return v;
    }

    SimResult sim(const Term& t, int n, std::size_t s) {
        if (n < 0) return {};
        require_closed(t);
        Query q(*this);
        SimKey k{t, n, s};
        if (auto it = sim_memo_.find(k); it != sim_memo_.end() && usable(it->second.second)) return it->second.first;
        SimResult r;
        if (n > 0) {
            SimResult prev = sim(t, n - 1, s);
            if (prev.v == Verdict::True) r = prev;
        }
        if (r.v != Verdict::True) r = sim_rules(t, n, s);
        sim_memo_.insert_or_assign(k, std::make_pair(r, cell(r.v)));
        return r;
    }

    // Truth of a closed term at s: True once it reaches ⊤, False once it
    // reaches ⊥ (the two are disjoint in the limit), Unknown otherwise.
    ForceResult truth(const Term& t, std::size_t s) {
        ForceResult r;
        for (int n = 0; n <= cfg_.stage_bound; ++n) {
            if (leadsto(t, m_.top(), n, s) == Verdict::True) return {Verdict::True, n};
            if (leadsto(t, m_.bot(), n, s) == Verdict::True) return {Verdict::False, n};
        }
        return r;
    }

    // One-step R-reducts; R does not depend on the stage or the state.
    const std::vector<Term>& reducts(const Term& t) {
        if (auto it = red_cache_.find(t); it != red_cache_.end()) return it->second;
        DeltaStepHook hook = [&](const Term& c, const Term& arg, std::uint32_t) {
            std::vector<Term> out;
            if (auto r = m_.table(c, arg)) out.push_back(*r);
            return out;
        };
        return red_cache_.emplace(t, one_step_reducts(t, &hook)).first->second;
    }

    // R-normal form within the given number of steps.
    std::optional<Term> normal_form(const Term& t, std::size_t steps = 10000) {
        DeltaHook hook = [&](const Term& c, const Term& arg, std::uint32_t) {
            if (auto r = m_.table(c, arg)) return DeltaResult{DeltaKind::Rewrite, *r};
            return DeltaResult{};
        };
        Budget b;
        b.steps = steps;
        return beta_eta_normalize(t, b, &hook).term;
    }

    struct Reach {
        TermSet terms;
        bool complete = true;
    };

    Reach reachable(const Term& t, std::size_t budget) {
        Reach r;
        std::deque<Term> q{t};
        r.terms.insert(t);
        while (!q.empty()) {
            Term u = q.front();
            q.pop_front();
            for (auto& x : reducts(u)) {
                if (r.terms.count(x)) continue;
                if (r.terms.size() >= budget || x->size > cfg_.max_term_size) {
                    r.complete = false;
                    continue;
                }
                r.terms.insert(x);
                q.push_back(x);
            }
        }
        return r;
    }

    Verdict joinable(const Term& a, const Term& b, std::size_t budget) {
        auto ra = reachable(a, budget), rb = reachable(b, budget);
        for (auto& x : ra.terms)
            if (rb.terms.count(x)) return Verdict::True;
        return ra.complete && rb.complete ? Verdict::False : Verdict::Unknown;
    }

    // A constant not occurring in t, standing for an arbitrary closed term.
    static Term fresh_external(const Term& t) {
        std::set<std::string> used;
        collect_external(t, used);
        for (int i = 0;; ++i) {
            std::string n = "nu" + std::to_string(i);
            if (!used.count(n)) return external_const(n);
        }
    }

    // ---------------------------------------------------------------- invariant suite

    struct Entry {
        Term t;
        bool top;
        int n;
        std::size_t s;
        Verdict v;
    };

    std::vector<Entry> succ_entries() const { return entries(succ_memo_); }
    std::vector<Entry> leadsto_entries() const { return entries(lead_memo_); }
    std::size_t cache_size() const { return succ_memo_.size() + lead_memo_.size() + sim_memo_.size(); }
    std::size_t count_true() const {
        std::size_t k = 0;
        for (auto& [key, c] : succ_memo_) k += c.v == Verdict::True;
        for (auto& [key, c] : lead_memo_) k += c.v == Verdict::True;
        return k;
    }

    // Stage monotonicity, upward closure, ⊤/⊥ disjointness, type uniqueness,
    // the H-dichotomy and the L-classification over everything cached so far.
    std::vector<Violation> check_invariants() {
        std::vector<Violation> out = recorded_;
        auto succ_e = succ_entries();
        auto lead_e = leadsto_entries();
        const int N = cfg_.stage_bound;
        for (auto& e : succ_e) {
            if (e.v != Verdict::True) continue;
            if (e.n < N && succ(e.t, rho(e.top), e.n + 1, e.s) != Verdict::True) out.push_back({"monotonicity", describe(e)});
            if (e.top)
                for (std::size_t s2 : m_.successors(e.s))
                    if (succ(e.t, m_.top(), e.n, s2) != Verdict::True)
                        out.push_back({"upward closure", describe(e) + " but not at " + m_.model().states[s2]});
            if (succ(e.t, rho(!e.top), e.n, e.s) == Verdict::True) out.push_back({"top/bot disjointness", describe(e)});
        }
        for (auto& e : lead_e) {
            if (e.v != Verdict::True) continue;
            if (e.n < N && leadsto(e.t, rho(e.top), e.n + 1, e.s) != Verdict::True)
                out.push_back({"monotonicity", describe(e)});
            if (!e.top) continue;
            for (std::size_t s2 : m_.successors(e.s))
                if (leadsto(e.t, m_.top(), e.n, s2) != Verdict::True)
                    out.push_back({"upward closure", describe(e) + " but not at " + m_.model().states[s2]});
            if (auto h = h_arg(e.t)) {
                Verdict a = leadsto(*h, m_.top(), e.n, e.s);
                Verdict b = a == Verdict::True ? a : leadsto(*h, m_.bot(), e.n + 1, e.s);
                if (a == Verdict::False && b == Verdict::False) out.push_back({"H dichotomy", describe(e)});
            }
            if (auto l = match_L(e.t)) {
                auto r = reachable(*l, cfg_.step_budget);
                bool typed = false, unknown = !r.complete;
                for (auto& x : r.terms) {
                    Verdict v = sim(x, e.n + 2, e.s).v;
                    typed = typed || v == Verdict::True;
                    unknown = unknown || v == Verdict::Unknown;
                }
                if (!typed && !unknown) out.push_back({"L classification", describe(e)});
            }
        }
        return out;
    }

    // Conditions for an illative Kripke model, sampled over cached terms with
    // canonical and generic arguments. Conclusions are evaluated one stage
    // later, and only definite verdicts can witness a violation.
    std::vector<Violation> check_model_conditions() {
        std::vector<Violation> out;
        const int N = cfg_.stage_bound;
        const Term& top = m_.top();
        auto truth_at = [&](const Term& t, std::size_t s) { return leadsto(t, top, N, s); };
        auto concl = [&](const Term& t, std::size_t s) { return leadsto(t, top, N + 1, s); };
        const std::size_t S = m_.state_count();

        for (std::size_t s = 0; s < S; ++s) {
            if (truth_at(mk_app(ell(), comb_H()), s) != Verdict::True) out.push_back({"model condition 8", "L H"});
            for (auto& b : m_.base_types())
                if (truth_at(mk_app(ell(), base_pred(b)), s) != Verdict::True)
                    out.push_back({"model condition 9", "L A@" + b});
        }

        TermSet pool;
        for (auto& e : leadsto_entries()) pool.insert(e.t);
        for (auto& e : succ_entries()) pool.insert(e.t);

        auto samples = [&](const Term& ctx) {
            std::vector<Term> zs;
            for (auto& [ty, els] : m_.model().domains)
                for (auto& z : m_.space(ty)) zs.push_back(z);
            zs.push_back(fresh_external(ctx));
            return zs;
        };

        for (auto& t : pool) {
            if (t->size * 2 >= cfg_.max_term_size) continue;
            for (std::size_t s = 0; s < S; ++s) {
                Verdict tv = truth_at(t, s);
                if (tv == Verdict::True) {
                    // condition 1, forward direction: reducts keep the truth value
                    for (auto& r : reducts(t))
                        if (concl(r, s) == Verdict::False) out.push_back({"model condition 1", print_term(t)});
                    // condition 2
                    for (std::size_t s2 : m_.successors(s))
                        if (concl(t, s2) == Verdict::False) out.push_back({"model condition 2", print_term(t)});
                    // condition 7
                    if (concl(mk_H(t), s) == Verdict::False) out.push_back({"model condition 7", print_term(t)});
                }
                auto x = match_xi(t);
                if (!x) continue;
                auto zs = samples(t);
                // condition 5
                if (tv == Verdict::True)
                    for (auto& z : zs)
                        if (truth_at(mk_app(x->first, z), s) == Verdict::True &&
                            concl(mk_app(x->second, z), s) == Verdict::False)
                            out.push_back({"model condition 5", print_term(t) + " at " + print_term(z)});
                // conditions 4 and 6
                if (truth_at(mk_app(ell(), x->first), s) != Verdict::True) continue;
                auto premise = [&](bool under_h) {
                    for (std::size_t s2 : m_.successors(s))
                        for (auto& z : zs) {
                            if (truth_at(mk_app(x->first, z), s2) != Verdict::True) continue;
                            Term body = mk_app(x->second, z);
                            if (truth_at(under_h ? mk_H(body) : body, s2) != Verdict::True) return false;
                        }
                    return true;
                };
                if (concl(t, s) == Verdict::False && premise(false)) out.push_back({"model condition 4", print_term(t)});
                if (concl(mk_H(t), s) == Verdict::False && premise(true))
                    out.push_back({"model condition 6", print_term(t)});
            }
        }
        return out;
    }

private:
    struct Key {
        Term t;
        bool top;
        int n;
        std::size_t s;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = illatra::detail::mix(k.t->hash, static_cast<std::uint64_t>(k.n) * 2 + (k.top ? 1 : 0));
            return static_cast<std::size_t>(illatra::detail::mix(h, k.s));
        }
    };
    struct KeyEq {
        bool operator()(const Key& a, const Key& b) const {
            return a.n == b.n && a.s == b.s && a.top == b.top && term_eq(a.t, b.t);
        }
    };
    struct SimKey {
        Term t;
        int n;
        std::size_t s;
    };
    struct SimHash {
        std::size_t operator()(const SimKey& k) const {
            return static_cast<std::size_t>(
                illatra::detail::mix(illatra::detail::mix(k.t->hash, static_cast<std::uint64_t>(k.n)), k.s));
        }
    };
    struct SimEq {
        bool operator()(const SimKey& a, const SimKey& b) const {
            return a.n == b.n && a.s == b.s && term_eq(a.t, b.t);
        }
    };
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

    bool is_top(const Term& rho) const {
        if (term_eq(rho, m_.top())) return true;
        if (term_eq(rho, m_.bot())) return false;
        throw MirrorError("target must be the top or bottom constant: " + print_term(rho));
    }
    const Term& rho(bool top) const { return top ? m_.top() : m_.bot(); }

    static void require_closed(const Term& t) {
        if (t->loose != 0 || t->has_fvar) throw MirrorError("mirror queries take closed terms: " + print_term(t));
    }

    static void collect_external(const Term& t, std::set<std::string>& out) {
        switch (t->tag) {
            case Tag::Const:
                if (t->ckind == ConstKind::External) out.insert(t->name);
                break;
            case Tag::App:
                collect_external(t->fn, out);
                collect_external(t->arg, out);
                break;
            case Tag::Lam: collect_external(t->fn, out); break;
            default: break;
        }
    }

    std::vector<Entry> entries(const Memo& memo) const {
        std::vector<Entry> out;
        for (auto& [k, c] : memo) out.push_back({k.t, k.top, k.n, k.s, c.v});
        std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
            if (a.n != b.n) return a.n < b.n;
            if (a.s != b.s) return a.s < b.s;
            if (a.top != b.top) return a.top < b.top;
            return term_cmp(a.t, b.t) < 0;
        });
        return out;
    }

    std::string describe(const Entry& e) const {
        return print_term(e.t) + (e.top ? " / top" : " / bot") + " at stage " + std::to_string(e.n) + ", state " +
               m_.model().states[e.s];
    }

    // The argument of H, either as the combinator applied or in the form L (K t).
    static std::optional<Term> h_arg(const Term& t) {
        if (auto h = match_H(t)) return h;
        if (t->tag == Tag::App && term_eq(t->fn, comb_H())) return t->arg;
        return std::nullopt;
    }

    bool is_base_pred(const Term& t) const { return is_const(t, ConstKind::BaseTypePred) && m_.is_base(t->name); }

    // ∀ t3 ∈ 𝕋_τ. pred(t3). 𝕋_ω is all closed terms; a fresh external
    // constant is one of them and, having no rules, stands for the rest.
    template <class P>
    Verdict forall_in(const Ty& ty, const Term& ctx, P pred) {
        switch (ty->kind) {
            case TyNode::Eps: return Verdict::True;
            case TyNode::Omega: return pred(fresh_external(ctx));
            default: break;
        }
        Verdict acc = Verdict::True;
        for (auto& e : m_.space(ty->text)) {
            acc = v_and(acc, pred(e));
            if (acc == Verdict::False) return acc;
        }
        return acc;
    }

    template <class P>
    Verdict exists_in(const Ty& ty, const Term& ctx, P pred) {
        switch (ty->kind) {
            case TyNode::Eps: return Verdict::False;
            case TyNode::Omega: return pred(fresh_external(ctx)) == Verdict::True ? Verdict::True : Verdict::Unknown;
            default: break;
        }
        Verdict acc = Verdict::False;
        for (auto& e : m_.space(ty->text)) {
            acc = v_or(acc, pred(e));
            if (acc == Verdict::True) return acc;
        }
        return acc;
    }

    template <class P>
    Verdict with_type(const Term& t1, int n, std::size_t s, P check) {
        SimResult r = sim(t1, n, s);
        if (r.v != Verdict::True) return r.v;
        return check(r.type);
    }

    // For all s' ≥ s and all t3 of the range type of t1: body(t3, s').
    template <class B>
    Verdict all_successors(const Term& ctx, const Term& t1, int n, std::size_t s, B body) {
        auto over = [&](const Ty& ty, std::size_t s2) {
            return forall_in(ty, ctx, [&](const Term& t3) { return body(t3, s2); });
        };
        Verdict acc = Verdict::True;
        if (cfg_.type_at == TypeAt::QueryState)
            return with_type(t1, n, s, [&](const Ty& ty) {
                for (std::size_t s2 : m_.successors(s)) {
                    acc = v_and(acc, over(ty, s2));
                    if (acc == Verdict::False) break;
                }
                return acc;
            });
        for (std::size_t s2 : m_.successors(s)) {
            acc = v_and(acc, with_type(t1, n, s2, [&](const Ty& ty) { return over(ty, s2); }));
            if (acc == Verdict::False) break;
        }
        return acc;
    }

    // For some s' ≥ s and some t3 of the range type of t1: body(t3, s').
    template <class B>
    Verdict some_successor(const Term& ctx, const Term& t1, int n, std::size_t s, B body) {
        auto over = [&](const Ty& ty, std::size_t s2) {
            return exists_in(ty, ctx, [&](const Term& t3) { return body(t3, s2); });
        };
        Verdict acc = Verdict::False;
        if (cfg_.type_at == TypeAt::QueryState)
            return with_type(t1, n, s, [&](const Ty& ty) {
                for (std::size_t s2 : m_.successors(s)) {
                    acc = v_or(acc, over(ty, s2));
                    if (acc == Verdict::True) break;
                }
                return acc;
            });
        for (std::size_t s2 : m_.successors(s)) {
            acc = v_or(acc, with_type(t1, n, s2, [&](const Ty& ty) { return over(ty, s2); }));
            if (acc == Verdict::True) break;
        }
        return acc;
    }

    Verdict succ_clauses(const Term& t, bool top, int n, std::size_t s) {
        if (m_.has_type(t, "o")) return v_of(m_.holds(t, s) == top);
        if (!top) {
            if (n == 0) return Verdict::False;
            auto x = match_xi(t);
            if (!x) return Verdict::False;
            Verdict h = succ(mk_H(t), m_.top(), n - 1, s);
            if (h == Verdict::False) return h;
            Verdict w = some_successor(t, x->first, n, s, [&](const Term& t3, std::size_t s2) {
                return leadsto(mk_app(x->second, t3), m_.bot(), n - 1, s2);
            });
            return v_and(h, w);
        }

        if (auto l = match_L(t); l && (is_base_pred(*l) || term_eq(*l, comb_H()))) return Verdict::True;
        if (t->tag == Tag::App && is_base_pred(t->fn) && m_.has_type(t->arg, t->fn->name)) return Verdict::True;
        auto h = h_arg(t);
        if (h && m_.has_type(*h, "o")) return Verdict::True;
        if (n == 0) return Verdict::False;

        Verdict acc = Verdict::False;
        if (auto x = match_xi(t)) {
            acc = v_or(acc, all_successors(t, x->first, n, s, [&](const Term& t3, std::size_t s2) {
                return leadsto(mk_app(x->second, t3), m_.top(), n - 1, s2);
            }));
            if (acc == Verdict::True) return acc;
        }
        if (h) {
            if (auto x = match_xi(*h)) {
                acc = v_or(acc, all_successors(t, x->first, n, s, [&](const Term& t3, std::size_t s2) {
                    return leadsto(mk_H(mk_app(x->second, t3)), m_.top(), n - 1, s2);
                }));
                if (acc == Verdict::True) return acc;
            }
            acc = v_or(acc, leadsto(*h, m_.top(), n - 1, s));
        }
        return acc;
    }

    // Rules (A), (H), (Kω) and (Kε); there is no rule for F here.
    SimResult sim_rules(const Term& t, int n, std::size_t s) {
        std::vector<SimResult> found;
        bool unknown = false;
        auto add = [&](Verdict v, const Ty& ty) {
            if (v == Verdict::True) found.push_back({v, ty});
            else if (v == Verdict::Unknown) unknown = true;
        };
        if (is_base_pred(t)) add(Verdict::True, stage::ty_base(t->name));
        if (term_eq(t, comb_H())) add(Verdict::True, stage::ty_o());
        if (n >= 1)
            if (auto k = match_K(t)) {
                add(leadsto(*k, m_.top(), n - 1, s), stage::ty_omega());
                add(leadsto(*k, m_.bot(), n - 1, s), stage::ty_eps());
            }
        if (!found.empty()) {
            for (auto& r : found)
                if (!stage::ty_eq(r.type, found.front().type))
                    recorded_.push_back({"type uniqueness", print_term(t) + " ~ " + found.front().type->text + " and " +
                                                                r.type->text + " at stage " + std::to_string(n)});
            return found.front();
        }
        return {unknown ? Verdict::Unknown : Verdict::False, nullptr};
    }

    Verdict explore(const Term& t, const Term& rho, int n, std::size_t s) {
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
            Verdict v = succ(u, rho, n, s);
            if (v == Verdict::True) return v;
            if (v == Verdict::Unknown) unknown = true;
            for (auto& x : reducts(u)) {
                if (seen.count(x)) continue;
                if (x->size > cfg_.max_term_size || seen.size() >= cfg_.step_budget) {
                    complete = false;
                    continue;
                }
                seen.insert(x);
                q.push_back(x);
            }
        }
        return complete && !unknown ? Verdict::False : Verdict::Unknown;
    }

    const Mirror& m_;
    Config cfg_;
    Memo succ_memo_, lead_memo_;
    std::unordered_map<SimKey, std::pair<SimResult, Cell>, SimHash, SimEq> sim_memo_;
    TermMap<std::vector<Term>> red_cache_;
    std::vector<Violation> recorded_;
    int depth_ = 0;
    std::uint64_t epoch_ = 0;
    std::size_t fuel_ = 0;
    bool starved_ = false;
};

// s, w̃ forces the translation of phi in the mirror.
inline ForceResult mirror_forces(Engine& e, std::size_t s, const kripke::Valuation& w, const PTerm& phi) {
    return e.truth(e.mirror().instance(phi, w), s);
}

struct EquivReport {
    struct Item {
        std::string state, formula, valuation;
        bool kripke = false;
        ForceResult mirror;
    };
    std::size_t checked = 0, agreed = 0;
    std::vector<Item> disagreements, unknowns;
    bool ok() const { return disagreements.empty(); }
};

inline std::string valuation_text(const kripke::Valuation& w) {
    std::string out;
    for (auto& [x, d] : w) out += (out.empty() ? "" : ",") + x + "=" + d;
    return out;
}

// Compares Kripke forcing with mirror forcing for every state and valuation.
inline EquivReport forcing_equiv_suite(Engine& e, const std::vector<PTerm>& formulas) {
    EquivReport r;
    const kripke::Model& m = e.mirror().model();
    for (auto& phi : formulas) {
        auto vars = pred::free_vars(phi);
        for (std::size_t s = 0; s < m.states.size(); ++s)
            kripke::for_each_valuation(m, vars, [&](const kripke::Valuation& w) {
                ++r.checked;
                bool k = kripke::forces(m, s, w, phi);
                ForceResult f = mirror_forces(e, s, w, phi);
                EquivReport::Item it{m.states[s], pred::print(phi), valuation_text(w), k, f};
                if (f.verdict == Verdict::Unknown) r.unknowns.push_back(it);
                else if ((f.verdict == Verdict::True) != k) r.disagreements.push_back(it);
                else ++r.agreed;
                return true;
            });
    }
    return r;
}

}  // namespace illatra::mirror
