// Simple types, typed terms and formulas of the higher-order intuitionistic
// logic, plus a checker for its natural-deduction derivations.
#pragma once

#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace illatra::pred {

// ---------------------------------------------------------------- types

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

struct TypeNode {
    enum Kind { O, Base, Arrow } kind;
    std::string name;  // Base
    Type dom, cod;     // Arrow
    std::string text;  // canonical rendering, used for equality
};

inline Type type_o() {
    static const Type t = std::make_shared<TypeNode>(TypeNode{TypeNode::O, "", nullptr, nullptr, "o"});
    return t;
}

inline Type type_base(const std::string& b) {
    return std::make_shared<TypeNode>(TypeNode{TypeNode::Base, b, nullptr, nullptr, b});
}

inline Type type_arrow(const Type& a, const Type& b) {
    std::string l = a->kind == TypeNode::Arrow ? "(" + a->text + ")" : a->text;
    return std::make_shared<TypeNode>(TypeNode{TypeNode::Arrow, "", a, b, l + "->" + b->text});
}

inline bool type_eq(const Type& a, const Type& b) { return a->text == b->text; }
inline const std::string& to_string(const Type& t) { return t->text; }
inline bool is_base(const Type& t) { return t->kind == TypeNode::Base; }
inline bool is_o(const Type& t) { return t->kind == TypeNode::O; }

// Types of the restricted grammar: o | b | b -> tau.
inline bool is_pred2_type(const Type& t) {
    if (t->kind != TypeNode::Arrow) return true;
    return is_base(t->dom) && is_pred2_type(t->cod);
}

inline int arrow_count(const Type& t) { return t->kind == TypeNode::Arrow ? 1 + arrow_count(t->dom) + arrow_count(t->cod) : 0; }

struct TypeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Type parse_type_at(const std::string& s, std::size_t& i) {
    auto skip = [&] { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; };
    skip();
    Type left;
    if (i < s.size() && s[i] == '(') {
        ++i;
        left = parse_type_at(s, i);
        skip();
        if (i >= s.size() || s[i] != ')') throw TypeError("expected ')' in type '" + s + "'");
        ++i;
    } else {
        std::size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
        if (j == i) throw TypeError("expected type in '" + s + "'");
        std::string n = s.substr(i, j - i);
        i = j;
        left = n == "o" ? type_o() : type_base(n);
    }
    skip();
    if (s.compare(i, 2, "->") == 0) {
        i += 2;
        return type_arrow(left, parse_type_at(s, i));
    }
    return left;
}

}  // namespace detail

inline Type parse_type(const std::string& s) {
    std::size_t i = 0;
    Type t = detail::parse_type_at(s, i);
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i != s.size()) throw TypeError("trailing input in type '" + s + "'");
    return t;
}

// ---------------------------------------------------------------- signature

enum class Mode { Pred2_0, PredOmega };

struct Signature {
    std::set<std::string> base_types;
    std::map<std::string, Type> consts;
    std::map<std::string, Type> vars;

    void check_type(const Type& t, Mode m) const {
        if (t->kind == TypeNode::Base && !base_types.count(t->name))
            throw TypeError("undeclared base type '" + t->name + "'");
        if (t->kind == TypeNode::Arrow) {
            check_type(t->dom, m);
            check_type(t->cod, m);
        }
        if (m == Mode::Pred2_0 && !is_pred2_type(t))
            throw TypeError("type " + t->text + " is outside the restricted grammar");
    }

    void validate(Mode m) const {
        for (auto& [n, t] : consts) {
            check_type(t, m);
            if (vars.count(n)) throw TypeError("name '" + n + "' is both a constant and a variable");
        }
        for (auto& [n, t] : vars) check_type(t, m);
    }
};

inline Signature signature_from_json(const nlohmann::json& j) {
    Signature s;
    const auto bases = j.value("base_types", nlohmann::json::array());
    const auto consts = j.value("consts", nlohmann::json::object());
    const auto vars = j.value("vars", nlohmann::json::object());
    for (auto& b : bases) s.base_types.insert(b.get<std::string>());
    for (auto& [k, v] : consts.items()) s.consts[k] = parse_type(v.get<std::string>());
    for (auto& [k, v] : vars.items()) s.vars[k] = parse_type(v.get<std::string>());
    return s;
}

inline nlohmann::json signature_to_json(const Signature& s) {
    nlohmann::json j;
    j["base_types"] = s.base_types;
    j["consts"] = nlohmann::json::object();
    j["vars"] = nlohmann::json::object();
    for (auto& [k, v] : s.consts) j["consts"][k] = v->text;
    for (auto& [k, v] : s.vars) j["vars"][k] = v->text;
    return j;
}

// ---------------------------------------------------------------- terms and formulas

struct PNode;
using PTerm = std::shared_ptr<const PNode>;

enum class PTag { Var, Const, App, Imp, Forall };

struct PNode {
    PTag tag;
    std::string name;  // Var, Const, bound variable of Forall
    Type type;         // type of this term (o for formulas)
    Type vtype;        // Forall: type of the bound variable
    PTerm a, b;        // App: fn arg; Imp: lhs rhs; Forall: body in a
};

inline PTerm p_var(const std::string& n, const Type& t) { return std::make_shared<PNode>(PNode{PTag::Var, n, t, nullptr, nullptr, nullptr}); }
inline PTerm p_const(const std::string& n, const Type& t) { return std::make_shared<PNode>(PNode{PTag::Const, n, t, nullptr, nullptr, nullptr}); }
inline PTerm p_app(const PTerm& f, const PTerm& a) {
    if (f->type->kind != TypeNode::Arrow || !type_eq(f->type->dom, a->type))
        throw TypeError("ill-typed application");
    return std::make_shared<PNode>(PNode{PTag::App, "", f->type->cod, nullptr, f, a});
}
inline PTerm p_imp(const PTerm& a, const PTerm& b) { return std::make_shared<PNode>(PNode{PTag::Imp, "", type_o(), nullptr, a, b}); }
inline PTerm p_forall(const std::string& x, const Type& t, const PTerm& body) {
    return std::make_shared<PNode>(PNode{PTag::Forall, x, type_o(), t, body, nullptr});
}

inline void free_vars_into(const PTerm& t, std::map<std::string, Type>& out, std::set<std::string>& bound) {
    switch (t->tag) {
        case PTag::Var:
            if (!bound.count(t->name)) out.emplace(t->name, t->type);
            break;
        case PTag::Const: break;
        case PTag::App:
        case PTag::Imp:
            free_vars_into(t->a, out, bound);
            free_vars_into(t->b, out, bound);
            break;
        case PTag::Forall: {
            bool had = bound.count(t->name) > 0;
            bound.insert(t->name);
            free_vars_into(t->a, out, bound);
            if (!had) bound.erase(t->name);
            break;
        }
    }
}

// Free variables with their types, in name order.
inline std::map<std::string, Type> free_vars(const PTerm& t) {
    std::map<std::string, Type> out;
    std::set<std::string> bound;
    free_vars_into(t, out, bound);
    return out;
}

inline std::set<std::string> fv_names(const PTerm& t) {
    std::set<std::string> s;
    for (auto& [k, v] : free_vars(t)) s.insert(k);
    return s;
}

inline std::set<std::string> all_var_names(const PTerm& t) {
    std::set<std::string> s;
    if (t->tag == PTag::Var || t->tag == PTag::Forall) s.insert(t->name);
    if (t->a) for (auto& n : all_var_names(t->a)) s.insert(n);
    if (t->b) for (auto& n : all_var_names(t->b)) s.insert(n);
    return s;
}

inline std::string fresh_var(std::string base, const std::set<std::string>& avoid) {
    while (avoid.count(base)) base += '\'';
    return base;
}

// Canonical text with bound variables replaced by binder depth.
inline std::string alpha_key(const PTerm& t, std::vector<std::string>& env) {
    switch (t->tag) {
        case PTag::Var:
            for (std::size_t i = env.size(); i-- > 0;)
                if (env[i] == t->name) return "#" + std::to_string(env.size() - 1 - i);
            return "v:" + t->name + ":" + t->type->text;
        case PTag::Const: return "c:" + t->name;
        case PTag::App: return "(" + alpha_key(t->a, env) + " " + alpha_key(t->b, env) + ")";
        case PTag::Imp: return "(" + alpha_key(t->a, env) + " -> " + alpha_key(t->b, env) + ")";
        case PTag::Forall: {
            env.push_back(t->name);
            std::string s = "(A:" + t->vtype->text + ". " + alpha_key(t->a, env) + ")";
            env.pop_back();
            return s;
        }
    }
    return "";
}

inline std::string alpha_key(const PTerm& t) {
    std::vector<std::string> env;
    return alpha_key(t, env);
}

inline bool alpha_eq(const PTerm& a, const PTerm& b) { return alpha_key(a) == alpha_key(b); }

// Capture-avoiding t[x := q]; bound variables clashing with FV(q) get primed.
inline PTerm subst(const PTerm& t, const std::string& x, const PTerm& q) {
    switch (t->tag) {
        case PTag::Var:
            if (t->name != x) return t;
            if (!type_eq(t->type, q->type))
                throw TypeError("substituting " + q->type->text + " for variable " + x + ":" + t->type->text);
            return q;
        case PTag::Const: return t;
        case PTag::App: return p_app(subst(t->a, x, q), subst(t->b, x, q));
        case PTag::Imp: return p_imp(subst(t->a, x, q), subst(t->b, x, q));
        case PTag::Forall: {
            if (t->name == x || !fv_names(t->a).count(x)) return t;
            auto fq = fv_names(q);
            if (!fq.count(t->name)) return p_forall(t->name, t->vtype, subst(t->a, x, q));
            std::set<std::string> avoid = fq;
            for (auto& n : all_var_names(t->a)) avoid.insert(n);
            avoid.insert(x);
            std::string y = fresh_var(t->name, avoid);
            PTerm body = subst(t->a, t->name, p_var(y, t->vtype));
            return p_forall(y, t->vtype, subst(body, x, q));
        }
    }
    return t;
}

// bot = forall p:o. p
inline PTerm p_bot() { return p_forall("p", type_o(), p_var("p", type_o())); }

inline bool is_bot(const PTerm& t) {
    return t->tag == PTag::Forall && is_o(t->vtype) && t->a->tag == PTag::Var && t->a->name == t->name;
}

inline PTerm p_not(const PTerm& a) { return p_imp(a, p_bot()); }

inline PTerm p_and(const PTerm& a, const PTerm& b) {
    std::set<std::string> avoid = fv_names(a);
    for (auto& n : fv_names(b)) avoid.insert(n);
    std::string r = fresh_var("r", avoid);
    PTerm rv = p_var(r, type_o());
    return p_forall(r, type_o(), p_imp(p_imp(a, p_imp(b, rv)), rv));
}

inline PTerm p_or(const PTerm& a, const PTerm& b) {
    std::set<std::string> avoid = fv_names(a);
    for (auto& n : fv_names(b)) avoid.insert(n);
    std::string r = fresh_var("r", avoid);
    PTerm rv = p_var(r, type_o());
    return p_forall(r, type_o(), p_imp(p_imp(a, rv), p_imp(p_imp(b, rv), rv)));
}

// Number of nested connectives.
inline int connective_depth(const PTerm& t) {
    switch (t->tag) {
        case PTag::Imp: return 1 + std::max(connective_depth(t->a), connective_depth(t->b));
        case PTag::Forall: return 1 + connective_depth(t->a);
        default: return 0;
    }
}

// Every formula of connective depth at most `depth` over the signature.
// Atoms apply a declared name to declared names of base type; quantifiers
// bind the declared variables at their declared types.
inline std::vector<PTerm> enumerate_formulas(const Signature& sig, int depth) {
    std::vector<PTerm> names;
    for (auto& [c, t] : sig.consts) names.push_back(p_const(c, t));
    for (auto& [v, t] : sig.vars) names.push_back(p_var(v, t));
    std::vector<std::vector<PTerm>> lvl(static_cast<std::size_t>(depth + 1));
    std::function<void(const PTerm&)> saturate = [&](const PTerm& h) {
        if (is_o(h->type)) {
            lvl[0].push_back(h);
            return;
        }
        if (h->type->kind != TypeNode::Arrow || !is_base(h->type->dom)) return;
        for (auto& a : names)
            if (type_eq(a->type, h->type->dom)) saturate(p_app(h, a));
    };
    for (auto& h : names) saturate(h);
    for (int d = 1; d <= depth; ++d) {
        auto& cur = lvl[static_cast<std::size_t>(d)];
        for (auto& f : lvl[static_cast<std::size_t>(d - 1)]) {
            for (auto& [v, t] : sig.vars) cur.push_back(p_forall(v, t, f));
            for (int e = 0; e < d; ++e)
                for (auto& g : lvl[static_cast<std::size_t>(e)]) {
                    cur.push_back(p_imp(f, g));
                    if (e < d - 1) cur.push_back(p_imp(g, f));
                }
        }
    }
    std::vector<PTerm> out;
    for (auto& l : lvl) out.insert(out.end(), l.begin(), l.end());
    return out;
}

// ---------------------------------------------------------------- text syntax

namespace detail {

struct FRaw {
    enum Kind { Name, App, Imp, Forall, Bot, Not, And, Or } kind;
    std::string name;
    std::string type;
    std::vector<FRaw> kids;
};

class FormulaParser {
public:
    explicit FormulaParser(const std::string& s) : s_(s) {}

    FRaw parse() {
        FRaw r = formula();
        skip();
        if (i_ != s_.size()) fail("trailing input");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& m) const {
        throw TypeError("parse error: " + m + " at " + std::to_string(i_) + " in '" + s_ + "'");
    }
    void skip() { while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_; }
    bool lit(const char* l) {
        skip();
        std::size_t n = std::char_traits<char>::length(l);
        if (s_.compare(i_, n, l) == 0) { i_ += n; return true; }
        return false;
    }
    bool keyword(const char* k) {
        skip();
        std::size_t n = std::char_traits<char>::length(k);
        if (s_.compare(i_, n, k) == 0 && (i_ + n >= s_.size() || !ident_char(s_[i_ + n]))) { i_ += n; return true; }
        return false;
    }
    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
    std::string ident() {
        skip();
        std::size_t j = i_;
        if (j < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) {
            while (j < s_.size() && ident_char(s_[j])) ++j;
        }
        if (j == i_) fail("expected identifier");
        std::string r = s_.substr(i_, j - i_);
        i_ = j;
        return r;
    }
    bool at_ident() {
        skip();
        if (i_ >= s_.size()) return false;
        if (!(std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) return false;
        std::size_t j = i_;
        while (j < s_.size() && ident_char(s_[j])) ++j;
        std::string w = s_.substr(i_, j - i_);
        return w != "forall";
    }

    FRaw formula() {
        if (keyword("forall") || lit("\xe2\x88\x80")) {
            std::string x = ident();
            if (!lit(":")) fail("expected ':' after bound variable");
            std::size_t start = i_;
            int depth = 0;
            while (i_ < s_.size() && !(depth == 0 && s_[i_] == '.')) {
                if (s_[i_] == '(') ++depth;
                if (s_[i_] == ')') --depth;
                ++i_;
            }
            if (i_ >= s_.size()) fail("expected '.' after binder type");
            std::string ty = s_.substr(start, i_ - start);
            ++i_;
            FRaw body = formula();
            return FRaw{FRaw::Forall, x, ty, {std::move(body)}};
        }
        FRaw lhs = disj();
        if (lit("->") || lit("\xe2\x8a\x83")) {
            FRaw rhs = formula();
            return FRaw{FRaw::Imp, "", "", {std::move(lhs), std::move(rhs)}};
        }
        return lhs;
    }
    FRaw disj() {
        FRaw l = conj();
        if (lit("|") || lit("\xe2\x88\xa8")) return FRaw{FRaw::Or, "", "", {std::move(l), disj()}};
        return l;
    }
    FRaw conj() {
        FRaw l = unary();
        if (lit("&") || lit("\xe2\x88\xa7")) return FRaw{FRaw::And, "", "", {std::move(l), conj()}};
        return l;
    }
    FRaw unary() {
        if (lit("~") || lit("\xc2\xac")) return FRaw{FRaw::Not, "", "", {unary()}};
        return app();
    }
    FRaw app() {
        std::vector<FRaw> items;
        while (true) {
            skip();
            if (i_ < s_.size() && s_[i_] == '(') {
                ++i_;
                items.push_back(formula());
                if (!lit(")")) fail("expected ')'");
            } else if (lit("\xe2\x8a\xa5")) {
                items.push_back(FRaw{FRaw::Bot, "", "", {}});
            } else if (at_ident()) {
                std::string n = ident();
                items.push_back(n == "bot" ? FRaw{FRaw::Bot, "", "", {}} : FRaw{FRaw::Name, n, "", {}});
            } else if (keyword("forall") || lit("\xe2\x88\x80")) {
                fail("quantifier in argument position must be parenthesised");
            } else {
                break;
            }
        }
        if (items.empty()) fail("expected formula");
        FRaw r = std::move(items[0]);
        for (std::size_t k = 1; k < items.size(); ++k) r = FRaw{FRaw::App, "", "", {std::move(r), std::move(items[k])}};
        return r;
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

struct Checker {
    const Signature& sig;
    Mode mode;
    std::vector<std::pair<std::string, Type>> env;

    PTerm tc(const FRaw& r) {
        switch (r.kind) {
            case FRaw::Name: {
                for (std::size_t i = env.size(); i-- > 0;)
                    if (env[i].first == r.name) return p_var(r.name, env[i].second);
                if (auto it = sig.consts.find(r.name); it != sig.consts.end()) return p_const(r.name, it->second);
                if (auto it = sig.vars.find(r.name); it != sig.vars.end()) return p_var(r.name, it->second);
                throw TypeError("unknown identifier '" + r.name + "'");
            }
            case FRaw::App: {
                PTerm f = tc(r.kids[0]), a = tc(r.kids[1]);
                if (f->type->kind != TypeNode::Arrow)
                    throw TypeError("applying a term of type " + f->type->text + " which is not a function");
                if (!type_eq(f->type->dom, a->type))
                    throw TypeError("argument has type " + a->type->text + ", expected " + f->type->dom->text);
                if (mode == Mode::Pred2_0 && !is_base(a->type))
                    throw TypeError("argument of type " + a->type->text + " is not of base type");
                return p_app(f, a);
            }
            case FRaw::Imp: {
                PTerm a = formula(r.kids[0]), b = formula(r.kids[1]);
                return p_imp(a, b);
            }
            case FRaw::Forall: {
                Type t = parse_type(r.type);
                sig.check_type(t, mode);
                if (mode == Mode::Pred2_0 && !(is_base(t) || is_o(t)))
                    throw TypeError("quantifier over type " + t->text + " outside base types and o");
                env.emplace_back(r.name, t);
                PTerm body = formula(r.kids[0]);
                env.pop_back();
                return p_forall(r.name, t, body);
            }
            case FRaw::Bot: return p_bot();
            case FRaw::Not: return p_not(formula(r.kids[0]));
            case FRaw::And: return p_and(formula(r.kids[0]), formula(r.kids[1]));
            case FRaw::Or: return p_or(formula(r.kids[0]), formula(r.kids[1]));
        }
        throw TypeError("bad formula tree");
    }

    PTerm formula(const FRaw& r) {
        PTerm t = tc(r);
        if (!is_o(t->type)) throw TypeError("expected a formula, got a term of type " + t->type->text);
        return t;
    }
};

}  // namespace detail

// Parses and typechecks a term of any type.
inline PTerm parse_pterm(const std::string& s, const Signature& sig, Mode m = Mode::Pred2_0,
                         const std::vector<std::pair<std::string, Type>>& bound = {}) {
    detail::FRaw r = detail::FormulaParser(s).parse();
    detail::Checker c{sig, m, bound};
    return c.tc(r);
}

inline PTerm parse_formula(const std::string& s, const Signature& sig, Mode m = Mode::Pred2_0) {
    PTerm t = parse_pterm(s, sig, m);
    if (!is_o(t->type)) throw TypeError("expected a formula, got a term of type " + t->type->text);
    return t;
}

inline std::string print(const PTerm& t, int prec = 0) {
    // prec: 0 top, 1 left of ->, 2 function position, 3 argument
    std::string s;
    switch (t->tag) {
        case PTag::Var:
        case PTag::Const: return t->name;
        case PTag::App:
            s = print(t->a, 2) + " " + print(t->b, 3);
            return prec >= 3 ? "(" + s + ")" : s;
        case PTag::Imp:
            s = print(t->a, 1) + " -> " + print(t->b, 0);
            return prec >= 1 ? "(" + s + ")" : s;
        case PTag::Forall:
            if (is_bot(t)) return "bot";
            s = "forall " + t->name + ":" + t->vtype->text + ". " + print(t->a, 0);
            return prec >= 1 ? "(" + s + ")" : s;
    }
    return s;
}

// ---------------------------------------------------------------- derivations

struct Derivation {
    std::string rule;  // Axiom ImpI ImpE ForallI ForallE DoubleNeg
    std::vector<PTerm> hyps;
    PTerm concl;
    PTerm inst;         // ForallE: instantiating term
    std::string eigen;  // ForallI: eigenvariable (defaults to the binder name)
    std::vector<Derivation> premises;
};

struct CheckResult {
    bool ok = true;
    std::string path;    // node address, premise indices joined by '/'
    std::string kind;    // RuleError or FreshnessViolation
    std::string reason;
};

inline std::set<std::string> hyp_keys(const std::vector<PTerm>& hs) {
    std::set<std::string> s;
    for (auto& h : hs) s.insert(alpha_key(h));
    return s;
}

inline std::set<std::string> fv_of_all(const std::vector<PTerm>& hs) {
    std::set<std::string> s;
    for (auto& h : hs) for (auto& n : fv_names(h)) s.insert(n);
    return s;
}

namespace detail {

inline CheckResult fail_at(const std::string& path, const std::string& reason, const char* kind = "RuleError") {
    return CheckResult{false, path.empty() ? "root" : path, kind, reason};
}

inline CheckResult check_node(const Derivation& d, bool classical, const std::string& path) {
    auto sub = [&](std::size_t i) { return path + (path.empty() ? "" : "/") + std::to_string(i); };
    auto need = [&](std::size_t n) -> std::optional<CheckResult> {
        if (d.premises.size() != n)
            return fail_at(path, d.rule + " expects " + std::to_string(n) + " premises, got " + std::to_string(d.premises.size()));
        return std::nullopt;
    };
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
        CheckResult r = check_node(d.premises[i], classical, sub(i));
        if (!r.ok) return r;
    }
    if (!d.concl || !is_o(d.concl->type)) return fail_at(path, "conclusion is not a formula");
    auto here = hyp_keys(d.hyps);
    auto same_hyps = [&](const Derivation& p) { return hyp_keys(p.hyps) == here; };

    if (d.rule == "Axiom") {
        if (auto e = need(0)) return *e;
        if (!here.count(alpha_key(d.concl))) return fail_at(path, "conclusion is not among the hypotheses");
        return {};
    }
    if (d.rule == "ImpI") {
        if (auto e = need(1)) return *e;
        if (d.concl->tag != PTag::Imp) return fail_at(path, "conclusion is not an implication");
        const Derivation& p = d.premises[0];
        auto expect = here;
        expect.insert(alpha_key(d.concl->a));
        if (hyp_keys(p.hyps) != expect) return fail_at(path, "premise hypotheses must be the conclusion's plus the antecedent");
        if (!alpha_eq(p.concl, d.concl->b)) return fail_at(path, "premise proves something other than the consequent");
        return {};
    }
    if (d.rule == "ImpE") {
        if (auto e = need(2)) return *e;
        const Derivation& major = d.premises[0];
        const Derivation& minor = d.premises[1];
        if (!same_hyps(major) || !same_hyps(minor)) return fail_at(path, "premises must share the conclusion's hypotheses");
        if (major.concl->tag != PTag::Imp) return fail_at(path, "major premise is not an implication");
        if (!alpha_eq(major.concl->a, minor.concl)) return fail_at(path, "minor premise does not match the antecedent");
        if (!alpha_eq(major.concl->b, d.concl)) return fail_at(path, "conclusion does not match the consequent");
        return {};
    }
    if (d.rule == "ForallI") {
        if (auto e = need(1)) return *e;
        const Derivation& p = d.premises[0];
        if (d.concl->tag != PTag::Forall) return fail_at(path, "conclusion is not a universal formula");
        if (!same_hyps(p)) return fail_at(path, "premise must share the conclusion's hypotheses");
        std::string x = d.eigen.empty() ? d.concl->name : d.eigen;
        PTerm expect = p_forall(x, d.concl->vtype, p.concl);
        auto fvp = free_vars(p.concl);
        if (auto it = fvp.find(x); it != fvp.end() && !type_eq(it->second, d.concl->vtype))
            return fail_at(path, "eigenvariable " + x + " has type " + it->second->text);
        if (!alpha_eq(expect, d.concl)) return fail_at(path, "conclusion does not generalise the premise over " + x);
        if (fv_of_all(d.hyps).count(x))
            return fail_at(path, "eigenvariable " + x + " is free in the hypotheses", "FreshnessViolation");
        return {};
    }
    if (d.rule == "ForallE") {
        if (auto e = need(1)) return *e;
        const Derivation& p = d.premises[0];
        if (!same_hyps(p)) return fail_at(path, "premise must share the conclusion's hypotheses");
        if (p.concl->tag != PTag::Forall) return fail_at(path, "premise is not a universal formula");
        if (!d.inst) return fail_at(path, "missing instantiation term");
        if (!type_eq(d.inst->type, p.concl->vtype))
            return fail_at(path, "instantiation has type " + d.inst->type->text + ", expected " + p.concl->vtype->text);
        PTerm expect = subst(p.concl->a, p.concl->name, d.inst);
        if (!alpha_eq(expect, d.concl)) return fail_at(path, "conclusion is not the instance " + print(expect));
        return {};
    }
    if (d.rule == "DoubleNeg") {
        if (auto e = need(0)) return *e;
        if (!classical) return fail_at(path, "double negation is only available classically");
        const PTerm& c = d.concl;
        bool shape = c->tag == PTag::Imp && c->a->tag == PTag::Imp && is_bot(c->a->b) && c->a->a->tag == PTag::Imp &&
                     is_bot(c->a->a->b) && alpha_eq(c->a->a->a, c->b);
        if (!shape) return fail_at(path, "not an instance of ((phi -> bot) -> bot) -> phi");
        return {};
    }
    return fail_at(path, "unknown rule '" + d.rule + "'");
}

}  // namespace detail

inline CheckResult check_derivation(const Derivation& d, bool classical = false) {
    return detail::check_node(d, classical, "");
}

// Adds extra hypotheses to every node.
inline Derivation weaken(const Derivation& d, const std::vector<PTerm>& extra) {
    Derivation r = d;
    auto keys = hyp_keys(r.hyps);
    for (auto& e : extra)
        if (keys.insert(alpha_key(e)).second) r.hyps.push_back(e);
    for (auto& p : r.premises) p = weaken(p, extra);
    return r;
}

inline std::size_t derivation_size(const Derivation& d) {
    std::size_t n = 1;
    for (auto& p : d.premises) n += derivation_size(p);
    return n;
}

inline std::set<std::string> rules_used(const Derivation& d) {
    std::set<std::string> s{d.rule};
    for (auto& p : d.premises) for (auto& r : rules_used(p)) s.insert(r);
    return s;
}

// ---------------------------------------------------------------- JSON

inline Derivation derivation_from_json(const nlohmann::json& j, const Signature& sig, Mode m = Mode::Pred2_0) {
    Derivation d;
    d.rule = j.at("rule").get<std::string>();
    const auto hyps = j.value("hyps", nlohmann::json::array());
    for (auto& h : hyps) d.hyps.push_back(parse_formula(h.get<std::string>(), sig, m));
    d.concl = parse_formula(j.at("concl").get<std::string>(), sig, m);
    auto params = j.value("params", nlohmann::json::object());
    if (params.contains("var")) d.eigen = params["var"].get<std::string>();
    if (params.contains("term")) {
        // The instantiating term is read with the premise's bound variable type in scope via the signature.
        d.inst = parse_pterm(params["term"].get<std::string>(), sig, m);
    }
    const auto premises = j.value("premises", nlohmann::json::array());
    for (auto& p : premises) d.premises.push_back(derivation_from_json(p, sig, m));
    return d;
}

inline nlohmann::json derivation_to_json(const Derivation& d) {
    nlohmann::json j;
    j["rule"] = d.rule;
    j["hyps"] = nlohmann::json::array();
    for (auto& h : d.hyps) j["hyps"].push_back(print(h));
    j["concl"] = print(d.concl);
    j["params"] = nlohmann::json::object();
    if (!d.eigen.empty()) j["params"]["var"] = d.eigen;
    if (d.inst) j["params"]["term"] = print(d.inst);
    j["premises"] = nlohmann::json::array();
    for (auto& p : d.premises) j["premises"].push_back(derivation_to_json(p));
    return j;
}

}  // namespace illatra::pred
