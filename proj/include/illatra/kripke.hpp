// Finite Kripke models for the restricted higher-order logic: forcing,
// model validation and a small exhaustive countermodel search.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pred2.hpp"

namespace illatra::kripke {

using pred::PTag;
using pred::PTerm;
using pred::Type;

struct Model {
    std::vector<std::string> states;
    std::vector<std::vector<bool>> le;                             // le[i][j]: state i <= state j
    std::map<std::string, std::vector<std::string>> domains;       // type text -> elements
    std::map<std::string, std::map<std::string, std::string>> app; // function element -> argument -> value
    std::map<std::string, std::string> interp;                     // constant -> element
    std::map<std::string, std::vector<bool>> sigma;                // o-element -> states where it holds
    std::map<std::string, std::string> denotes;                    // optional: o-element -> closed formula text

    std::size_t state_index(const std::string& s) const {
        auto it = std::find(states.begin(), states.end(), s);
        if (it == states.end()) throw std::runtime_error("unknown state '" + s + "'");
        return static_cast<std::size_t>(it - states.begin());
    }

    const std::vector<std::string>& domain(const Type& t) const {
        auto it = domains.find(t->text);
        if (it == domains.end()) throw std::runtime_error("model has no domain for type " + t->text);
        return it->second;
    }

    std::vector<std::size_t> successors(std::size_t s) const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < states.size(); ++j)
            if (le[s][j]) out.push_back(j);
        return out;
    }
};

using Valuation = std::map<std::string, std::string>;

// The result refers into m or u.
inline const std::string& eval_ref(const Model& m, const Valuation& u, const PTerm& q) {
    switch (q->tag) {
        case PTag::Var: {
            auto it = u.find(q->name);
            if (it == u.end()) throw std::runtime_error("valuation does not cover " + q->name);
            return it->second;
        }
        case PTag::Const: {
            auto it = m.interp.find(q->name);
            if (it == m.interp.end()) throw std::runtime_error("constant " + q->name + " is not interpreted");
            return it->second;
        }
        case PTag::App: {
            const std::string &f = eval_ref(m, u, q->a), &a = eval_ref(m, u, q->b);
            auto it = m.app.find(f);
            if (it == m.app.end()) throw std::runtime_error("element " + f + " has no application table");
            auto jt = it->second.find(a);
            if (jt == it->second.end()) throw std::runtime_error("application table of " + f + " misses " + a);
            return jt->second;
        }
        default: throw std::runtime_error("eval_term on a connective");
    }
}

inline std::string eval_term(const Model& m, const Valuation& u, const PTerm& q) { return eval_ref(m, u, q); }

// As forces, without copying u: quantifiers rebind in place and restore the
// previous binding on exit.
inline bool forces_in(const Model& m, std::size_t s, Valuation& u, const PTerm& phi) {
    const std::size_t n = m.states.size();
    switch (phi->tag) {
        case PTag::Imp:
            for (std::size_t t = 0; t < n; ++t)
                if (m.le[s][t] && forces_in(m, t, u, phi->a) && !forces_in(m, t, u, phi->b)) return false;
            return true;
        case PTag::Forall: {
            auto [it, fresh] = u.try_emplace(phi->name);
            std::string saved = fresh ? std::string() : it->second;
            bool ok = true;
            for (std::size_t t = 0; t < n && ok; ++t) {
                if (!m.le[s][t]) continue;
                for (const auto& d : m.domain(phi->vtype)) {
                    it->second = d;
                    if (!forces_in(m, t, u, phi->a)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (fresh) u.erase(it);
            else it->second = std::move(saved);
            return ok;
        }
        default: {
            const std::string& e = eval_ref(m, u, phi);
            auto it = m.sigma.find(e);
            if (it == m.sigma.end()) throw std::runtime_error("element " + e + " has no truth set");
            return it->second[s];
        }
    }
}

inline bool forces(const Model& m, std::size_t s, const Valuation& u, const PTerm& phi) {
    Valuation v = u;
    return forces_in(m, s, v, phi);
}

struct Violation {
    std::string condition;
    std::string witness;
};

// All valuations of the given variables, in domain order.
inline void for_each_valuation(const Model& m, const std::map<std::string, Type>& vars,
                               const std::function<bool(const Valuation&)>& f) {
    std::vector<std::pair<std::string, const std::vector<std::string>*>> vs;
    for (auto& [n, t] : vars) vs.emplace_back(n, &m.domain(t));
    Valuation u;
    std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
        if (i == vs.size()) return f(u);
        for (const auto& d : *vs[i].second) {
            u[vs[i].first] = d;
            if (!rec(i + 1)) return false;
        }
        return true;
    };
    rec(0);
}

// Pre-model conditions, the falsum condition and, for the given alphabet,
// monotonicity of forcing; `denotes` entries are reconciled with sigma.
inline std::vector<Violation> validate_model(const Model& m, const pred::Signature& sig,
                                             const std::vector<PTerm>& alphabet = {}) {
    std::vector<Violation> out;
    const std::size_t n = m.states.size();
    if (n == 0) out.push_back({"nonempty-states", ""});
    if (m.le.size() != n) {
        out.push_back({"order-shape", "order matrix does not match the states"});
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!m.le[i][i]) out.push_back({"reflexivity", m.states[i]});
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && m.le[i][j] && m.le[j][i]) out.push_back({"antisymmetry", m.states[i] + "," + m.states[j]});
            for (std::size_t k = 0; k < n; ++k)
                if (m.le[i][j] && m.le[j][k] && !m.le[i][k])
                    out.push_back({"transitivity", m.states[i] + "," + m.states[j] + "," + m.states[k]});
        }
    }
    std::map<std::string, std::string> type_of;
    for (auto& [t, els] : m.domains) {
        if (els.empty()) out.push_back({"nonempty-domain", t});
        for (auto& e : els) {
            if (type_of.count(e)) out.push_back({"unique-element-names", e});
            type_of[e] = t;
        }
    }
    for (auto& [t, els] : m.domains) {
        Type ty = pred::parse_type(t);
        if (ty->kind != pred::TypeNode::Arrow) continue;
        auto dom = m.domains.find(ty->dom->text);
        auto cod = m.domains.find(ty->cod->text);
        if (dom == m.domains.end() || cod == m.domains.end()) {
            out.push_back({"function-domains", t});
            continue;
        }
        for (auto& f : els) {
            auto it = m.app.find(f);
            for (auto& a : dom->second) {
                if (it == m.app.end() || !it->second.count(a)) {
                    out.push_back({"total-application", f + " " + a});
                    continue;
                }
                const std::string& r = it->second.at(a);
                if (!type_of.count(r) || type_of[r] != ty->cod->text) out.push_back({"typed-application", f + " " + a + " = " + r});
            }
        }
    }
    for (auto& [c, t] : sig.consts) {
        auto it = m.interp.find(c);
        if (it == m.interp.end()) out.push_back({"interpretation", c + " uninterpreted"});
        else if (!type_of.count(it->second) || type_of[it->second] != t->text)
            out.push_back({"interpretation", c + " -> " + it->second});
    }
    if (!m.domains.count("o")) out.push_back({"truth-values", "no domain for o"});
    else
        for (auto& e : m.domains.at("o")) {
            auto it = m.sigma.find(e);
            if (it == m.sigma.end() || it->second.size() != n) {
                out.push_back({"truth-set", e});
                continue;
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (m.le[i][j] && it->second[i] && !it->second[j])
                        out.push_back({"upward-closure", e + ": " + m.states[i] + " <= " + m.states[j]});
        }
    if (!out.empty()) return out;
    PTerm falsum = pred::p_bot();
    for (std::size_t s = 0; s < n; ++s)
        if (forces(m, s, {}, falsum)) out.push_back({"falsum", m.states[s]});
    for (auto& phi : alphabet) {
        for_each_valuation(m, pred::free_vars(phi), [&](const Valuation& u) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (m.le[i][j] && forces(m, i, u, phi) && !forces(m, j, u, phi)) {
                        out.push_back({"monotonicity", pred::print(phi) + " at " + m.states[i] + " <= " + m.states[j]});
                        return false;
                    }
            return true;
        });
    }
    for (auto& [e, text] : m.denotes) {
        PTerm phi = pred::parse_formula(text, sig);
        auto it = m.sigma.find(e);
        if (it == m.sigma.end()) {
            out.push_back({"denotation", e + " is not an o-element"});
            continue;
        }
        for (std::size_t s = 0; s < n; ++s)
            if (forces(m, s, {}, phi) != it->second[s]) out.push_back({"denotation", e + " at " + m.states[s]});
    }
    return out;
}

// ---------------------------------------------------------------- JSON

inline Model model_from_json(const nlohmann::json& j) {
    Model m;
    for (auto& s : j.at("states")) m.states.push_back(s.get<std::string>());
    std::size_t n = m.states.size();
    m.le.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) m.le[i][i] = true;
    const auto le = j.value("le", nlohmann::json::array());
    for (auto& p : le) m.le[m.state_index(p.at(0))][m.state_index(p.at(1))] = true;
    for (auto& [t, els] : j.at("domains").items()) {
        std::string key = pred::parse_type(t)->text;
        for (auto& e : els) m.domains[key].push_back(e.get<std::string>());
    }
    const auto app = j.value("app", nlohmann::json::object());
    const auto interp = j.value("interp", nlohmann::json::object());
    const auto sigma = j.value("sigma", nlohmann::json::object());
    const auto denotes = j.value("denotes", nlohmann::json::object());
    for (auto& [f, tab] : app.items())
        for (auto& [a, r] : tab.items()) m.app[f][a] = r.get<std::string>();
    for (auto& [c, e] : interp.items()) m.interp[c] = e.get<std::string>();
    for (auto& [e, ss] : sigma.items()) {
        std::vector<bool> v(n, false);
        for (auto& s : ss) v[m.state_index(s)] = true;
        m.sigma[e] = v;
    }
    for (auto& [e, f] : denotes.items()) m.denotes[e] = f.get<std::string>();
    return m;
}

inline nlohmann::json model_to_json(const Model& m) {
    nlohmann::json j;
    j["states"] = m.states;
    j["le"] = nlohmann::json::array();
    for (std::size_t i = 0; i < m.states.size(); ++i)
        for (std::size_t k = 0; k < m.states.size(); ++k)
            if (i != k && m.le[i][k]) j["le"].push_back({m.states[i], m.states[k]});
    j["domains"] = m.domains;
    j["app"] = m.app;
    j["interp"] = m.interp;
    j["sigma"] = nlohmann::json::object();
    for (auto& [e, v] : m.sigma) {
        nlohmann::json ss = nlohmann::json::array();
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i]) ss.push_back(m.states[i]);
        j["sigma"][e] = ss;
    }
    if (!m.denotes.empty()) j["denotes"] = m.denotes;
    return j;
}

// ---------------------------------------------------------------- enumeration

// Partial orders on n <= 3 states, one per isomorphism class, as lists of
// strict pairs.
inline std::vector<std::vector<std::pair<int, int>>> posets(int n) {
    switch (n) {
        case 1: return {{}};
        case 2: return {{}, {{0, 1}}};
        case 3: return {{}, {{0, 1}}, {{0, 1}, {1, 2}, {0, 2}}, {{0, 1}, {0, 2}}, {{0, 2}, {1, 2}}};
        default: throw std::runtime_error("posets are tabulated up to 3 states");
    }
}

inline std::string up_set_name(const std::vector<bool>& v) {
    std::string s = "o.";
    for (bool b : v) s += b ? '1' : '0';
    return s;
}

// The full model over a poset: base domains of the given sizes, o as all
// up-sets, and every function space needed by `types`. Interpretations are
// left empty.
inline Model full_frame(int nstates, const std::vector<std::pair<int, int>>& order,
                        const std::map<std::string, int>& base_sizes, const std::set<std::string>& types) {
    Model m;
    for (int i = 0; i < nstates; ++i) m.states.push_back("s" + std::to_string(i));
    m.le.assign(static_cast<std::size_t>(nstates), std::vector<bool>(static_cast<std::size_t>(nstates), false));
    for (int i = 0; i < nstates; ++i) m.le[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = true;
    for (auto [a, b] : order) m.le[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
    for (auto& [b, k] : base_sizes)
        for (int i = 0; i < k; ++i) m.domains[b].push_back(b + "." + std::to_string(i));
    // Up-sets in increasing bitmask order, so the empty set comes first and the full set last.
    auto& dom_o = m.domains["o"];
    std::vector<std::vector<bool>> ups;
    for (unsigned mask = 0; mask < (1u << nstates); ++mask) {
        std::vector<bool> v(static_cast<std::size_t>(nstates));
        for (int i = 0; i < nstates; ++i) v[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
        bool closed = true;
        for (int i = 0; i < nstates; ++i)
            for (int j = 0; j < nstates; ++j)
                if (m.le[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] && v[static_cast<std::size_t>(i)] &&
                    !v[static_cast<std::size_t>(j)])
                    closed = false;
        if (closed) ups.push_back(v);
    }
    std::sort(ups.begin(), ups.end(), [](const auto& a, const auto& b) {
        auto ca = std::count(a.begin(), a.end(), true), cb = std::count(b.begin(), b.end(), true);
        return ca != cb ? ca < cb : a > b;
    });
    for (auto& v : ups) {
        dom_o.push_back(up_set_name(v));
        m.sigma[dom_o.back()] = v;
    }
    // Function spaces, smallest types first.
    std::vector<Type> pending;
    for (auto& t : types) pending.push_back(pred::parse_type(t));
    std::function<void(const Type&)> build = [&](const Type& t) {
        if (m.domains.count(t->text)) return;
        if (t->kind != pred::TypeNode::Arrow) throw std::runtime_error("no domain for type " + t->text);
        build(t->dom);
        build(t->cod);
        const auto dom = m.domains.at(t->dom->text);
        const auto cod = m.domains.at(t->cod->text);
        std::size_t count = 1;
        for (std::size_t i = 0; i < dom.size(); ++i) {
            count *= cod.size();
            if (count > 100000) throw std::runtime_error("function space " + t->text + " too large");
        }
        auto& out = m.domains[t->text];
        for (std::size_t k = 0; k < count; ++k) {
            std::string name = t->text + "." + std::to_string(k);
            out.push_back(name);
            std::size_t rest = k;
            for (auto& a : dom) {
                m.app[name][a] = cod[rest % cod.size()];
                rest /= cod.size();
            }
        }
    };
    for (auto& t : pending) build(t);
    return m;
}

inline void collect_types(const PTerm& t, std::set<std::string>& out) {
    out.insert(t->type->text);
    if (t->tag == PTag::Forall) out.insert(t->vtype->text);
    if (t->a) collect_types(t->a, out);
    if (t->b) collect_types(t->b, out);
}

inline void collect_consts(const PTerm& t, std::map<std::string, Type>& out) {
    if (t->tag == PTag::Const) out.emplace(t->name, t->type);
    if (t->a) collect_consts(t->a, out);
    if (t->b) collect_consts(t->b, out);
}

struct Bounds {
    int max_states = 3;
    int max_dom = 2;
};

struct Countermodel {
    Model model;
    std::size_t state = 0;
    Valuation valuation;
};

// Every (frame, interpretation) in canonical order; f returns false to stop.
inline void for_each_model(const std::set<std::string>& base_types, const std::set<std::string>& types,
                           const std::map<std::string, Type>& consts, Bounds b,
                           const std::function<bool(const Model&)>& f) {
    std::vector<std::string> bases(base_types.begin(), base_types.end());
    for (int n = 1; n <= b.max_states; ++n)
        for (auto& order : posets(n)) {
            std::map<std::string, int> sizes;
            for (auto& x : bases) sizes[x] = 1;
            while (true) {
                Model m = full_frame(n, order, sizes, types);
                std::vector<std::pair<std::string, const std::vector<std::string>*>> cs;
                for (auto& [c, t] : consts) cs.emplace_back(c, &m.domain(t));
                std::vector<std::size_t> idx(cs.size(), 0);
                while (true) {
                    for (std::size_t i = 0; i < cs.size(); ++i) m.interp[cs[i].first] = (*cs[i].second)[idx[i]];
                    if (!f(m)) return;
                    std::size_t i = 0;
                    while (i < idx.size() && ++idx[i] == cs[i].second->size()) idx[i++] = 0;
                    if (i == idx.size()) break;
                }
                std::size_t i = 0;
                while (i < bases.size() && ++sizes[bases[i]] > b.max_dom) sizes[bases[i++]] = 1;
                if (i == bases.size()) break;
            }
        }
}

// Searches small models for a state forcing all of delta but not phi.
inline std::optional<Countermodel> enumerate_countermodel(const pred::Signature& sig, const std::vector<PTerm>& delta,
                                                          const PTerm& phi, Bounds b = {}) {
    std::set<std::string> types{"o"};
    std::map<std::string, Type> consts, vars;
    std::vector<PTerm> all = delta;
    all.push_back(phi);
    for (auto& t : all) {
        collect_types(t, types);
        collect_consts(t, consts);
        for (auto& [n, ty] : pred::free_vars(t)) vars.emplace(n, ty);
    }
    for (auto& [n, ty] : vars) types.insert(ty->text);
    for (auto& [n, ty] : consts) types.insert(ty->text);
    for (auto& [n, ty] : sig.consts) types.insert(ty->text);
    std::set<std::string> bases = sig.base_types;
    std::optional<Countermodel> found;
    for_each_model(bases, types, consts, b, [&](const Model& m) {
        for (std::size_t s = 0; s < m.states.size(); ++s) {
            for_each_valuation(m, vars, [&](const Valuation& u) {
                for (auto& d : delta)
                    if (!forces(m, s, u, d)) return true;
                if (forces(m, s, u, phi)) return true;
                found = Countermodel{m, s, u};
                // Constants outside the goal get their first candidate.
                for (auto& [c, ty] : sig.consts)
                    if (!found->model.interp.count(c)) found->model.interp[c] = m.domain(ty).front();
                return false;
            });
            if (found) return false;
        }
        return true;
    });
    return found;
}

}  // namespace illatra::kripke
