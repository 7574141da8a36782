// Concrete syntax for lambda terms.
//
//   term  ::= '\' ident+ '.' term | app ['=>' term]
//   app   ::= atom+ ['\' ...]
//   atom  ::= ident | 'A@'ident | '#'['{'type'}']label | '$'ident | '[' [n] ']' | '(' term ')'
//
// Reserved identifiers: Xi L H K S I F bot. Applied K/H/F expand to their
// lambda forms, so `K t`, `H t` and `a => b` are literal shapes rather than
// redexes. Unicode λ Ξ ⊃ ⊥ are accepted as aliases.
#pragma once

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "sugar.hpp"
#include "term.hpp"

namespace illatra {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseOptions {
    std::set<std::string> constants;  // identifiers read as signature constants
    bool allow_internal = false;      // accept %names
};

inline bool is_reserved_name(const std::string& s) {
    static const std::set<std::string> r{"Xi", "L", "H", "K", "S", "I", "F", "bot"};
    return r.count(s) > 0;
}

namespace detail {

enum class Tok { Lambda, Dot, LParen, RParen, Arrow, Ident, BasePred, Canon, External, Internal, Box, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

inline bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline std::vector<Token> lex_term(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto starts = [&](const char* lit) { return s.compare(i, std::char_traits<char>::length(lit), lit) == 0; };
    auto read_ident = [&](std::size_t from) {
        std::size_t j = from;
        while (j < s.size() && ident_char(s[j])) ++j;
        return j;
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        std::size_t start = i;
        if (c == '\\') { out.push_back({Tok::Lambda, "\\", start}); ++i; continue; }
        if (starts("\xce\xbb")) { out.push_back({Tok::Lambda, "\\", start}); i += 2; continue; }
        if (c == '.') { out.push_back({Tok::Dot, ".", start}); ++i; continue; }
        if (c == '(') { out.push_back({Tok::LParen, "(", start}); ++i; continue; }
        if (c == ')') { out.push_back({Tok::RParen, ")", start}); ++i; continue; }
        if (starts("=>")) { out.push_back({Tok::Arrow, "=>", start}); i += 2; continue; }
        if (starts("\xe2\x8a\x83")) { out.push_back({Tok::Arrow, "=>", start}); i += 3; continue; }
        if (starts("\xce\x9e")) { out.push_back({Tok::Ident, "Xi", start}); i += 2; continue; }
        if (starts("\xe2\x8a\xa5")) { out.push_back({Tok::Ident, "bot", start}); i += 3; continue; }
        if (starts("A@")) {
            std::size_t j = read_ident(i + 2);
            if (j == i + 2) throw ParseError("expected base type after A@ at " + std::to_string(start));
            out.push_back({Tok::BasePred, s.substr(i + 2, j - i - 2), start});
            i = j;
            continue;
        }
        if (c == '#') {
            std::size_t j = i + 1;
            std::string name;
            if (j < s.size() && s[j] == '{') {
                int depth = 0;
                std::size_t k = j;
                for (; k < s.size(); ++k) {
                    if (s[k] == '{') ++depth;
                    if (s[k] == '}' && --depth == 0) break;
                }
                if (k >= s.size()) throw ParseError("unterminated type in canonical constant at " + std::to_string(start));
                name = s.substr(j, k - j + 1);
                j = k + 1;
            }
            std::size_t e = read_ident(j);
            if (e == j) throw ParseError("expected label in canonical constant at " + std::to_string(start));
            name += s.substr(j, e - j);
            out.push_back({Tok::Canon, name, start});
            i = e;
            continue;
        }
        if (c == '$' || c == '%') {
            std::size_t j = read_ident(i + 1);
            if (j == i + 1) throw ParseError(std::string("expected name after ") + c + " at " + std::to_string(start));
            out.push_back({c == '$' ? Tok::External : Tok::Internal, s.substr(i + (c == '$' ? 1 : 0), j - i - (c == '$' ? 1 : 0)), start});
            i = j;
            continue;
        }
        if (c == '[') {
            std::size_t j = i + 1;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j >= s.size() || s[j] != ']') throw ParseError("malformed hole at " + std::to_string(start));
            std::string n = j == i + 1 ? "1" : s.substr(i + 1, j - i - 1);
            out.push_back({Tok::Box, n, start});
            i = j + 1;
            continue;
        }
        if (ident_char(c) && c != '\'') {
            std::size_t j = read_ident(i);
            out.push_back({Tok::Ident, s.substr(i, j - i), start});
            i = j;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "' at " + std::to_string(start));
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

struct Raw {
    enum Kind { Var, Lam, Spine, Imp, Const, Box } kind;
    std::string name;
    ConstKind ckind{};
    std::vector<Raw> kids;  // Lam: body; Spine: head, args...; Imp: lhs, rhs
};

class TermParser {
public:
    TermParser(const std::string& src, const ParseOptions& opt) : toks_(lex_term(src)), opt_(opt) {}

    Term parse() {
        Raw r = term();
        if (peek().kind != Tok::End) fail("unexpected token '" + peek().text + "'");
        std::vector<std::string> env;
        return resolve(r, env);
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_++]; }
    [[noreturn]] void fail(const std::string& m) const {
        throw ParseError(m + " at " + std::to_string(peek().pos));
    }

    bool atom_start() const {
        switch (peek().kind) {
            case Tok::Ident: case Tok::BasePred: case Tok::Canon: case Tok::External:
            case Tok::Internal: case Tok::Box: case Tok::LParen: return true;
            default: return false;
        }
    }

    Raw lambda() {
        next();
        std::vector<std::string> names;
        while (peek().kind == Tok::Ident || peek().kind == Tok::Internal) {
            Token t = next();
            if (t.kind == Tok::Internal && !opt_.allow_internal) fail("internal name %" + t.text.substr(1));
            if (is_reserved_name(t.text)) fail("reserved name '" + t.text + "' used as binder");
            if (opt_.constants.count(t.text)) fail("constant '" + t.text + "' used as binder");
            names.push_back(t.text);
        }
        if (names.empty()) fail("expected binder");
        if (peek().kind != Tok::Dot) fail("expected '.'");
        next();
        Raw body = term();
        for (auto it = names.rbegin(); it != names.rend(); ++it) body = Raw{Raw::Lam, *it, {}, {std::move(body)}};
        return body;
    }

    Raw term() {
        if (peek().kind == Tok::Lambda) return lambda();
        Raw lhs = app();
        if (peek().kind == Tok::Arrow) {
            next();
            Raw rhs = term();
            return Raw{Raw::Imp, "", {}, {std::move(lhs), std::move(rhs)}};
        }
        return lhs;
    }

    Raw app() {
        std::vector<Raw> items;
        while (true) {
            if (atom_start()) items.push_back(atom());
            else if (peek().kind == Tok::Lambda) { items.push_back(lambda()); break; }
            else break;
        }
        if (items.empty()) fail("expected term");
        if (items.size() == 1) return std::move(items[0]);
        return Raw{Raw::Spine, "", {}, std::move(items)};
    }

    Raw atom() {
        Token t = next();
        switch (t.kind) {
            case Tok::Ident: return Raw{Raw::Var, t.text, {}, {}};
            case Tok::Internal:
                if (!opt_.allow_internal) throw ParseError("internal name " + t.text + " at " + std::to_string(t.pos));
                return Raw{Raw::Var, t.text, {}, {}};
            case Tok::BasePred: return Raw{Raw::Const, t.text, ConstKind::BaseTypePred, {}};
            case Tok::Canon: return Raw{Raw::Const, t.text, ConstKind::Canon, {}};
            case Tok::External: return Raw{Raw::Const, t.text, ConstKind::External, {}};
            case Tok::Box: return Raw{Raw::Box, t.text, ConstKind::Box, {}};
            case Tok::LParen: {
                Raw r = term();
                if (peek().kind != Tok::RParen) fail("expected ')'");
                next();
                return r;
            }
            default: throw ParseError("unexpected token at " + std::to_string(t.pos));
        }
    }

    Term resolve_name(const std::string& n, const std::vector<std::string>& env) const {
        for (std::size_t i = env.size(); i-- > 0;)
            if (env[i] == n) return mk_bvar(static_cast<std::uint32_t>(env.size() - 1 - i));
        if (n == "Xi") return xi();
        if (n == "L") return ell();
        if (n == "H") return comb_H();
        if (n == "K") return comb_K();
        if (n == "S") return comb_S();
        if (n == "I") return comb_I();
        if (n == "F") return comb_F();
        if (n == "bot") return comb_bot();
        if (opt_.constants.count(n)) return user_const(n);
        return mk_fvar(n);
    }

    Term resolve(const Raw& r, std::vector<std::string>& env) {
        switch (r.kind) {
            case Raw::Var: return resolve_name(r.name, env);
            case Raw::Const: return mk_const(r.ckind, r.name);
            case Raw::Box: return mk_const(ConstKind::Box, r.name);
            case Raw::Lam: {
                env.push_back(r.name);
                Term b = resolve(r.kids[0], env);
                env.pop_back();
                return mk_lam(r.name, b);
            }
            case Raw::Imp: return mk_imp(resolve(r.kids[0], env), resolve(r.kids[1], env));
            case Raw::Spine: {
                const Raw& h = r.kids[0];
                std::size_t used = 1;
                Term head;
                bool sugar = h.kind == Raw::Var && std::find(env.begin(), env.end(), h.name) == env.end();
                if (sugar && h.name == "K") {
                    head = mk_K(resolve(r.kids[1], env));
                    used = 2;
                } else if (sugar && h.name == "H") {
                    head = mk_H(resolve(r.kids[1], env));
                    used = 2;
                } else if (sugar && h.name == "F" && r.kids.size() >= 3) {
                    head = mk_F(resolve(r.kids[1], env), resolve(r.kids[2], env));
                    used = 3;
                } else {
                    head = resolve(h, env);
                }
                for (std::size_t i = used; i < r.kids.size(); ++i) head = mk_app(head, resolve(r.kids[i], env));
                return head;
            }
        }
        throw ParseError("bad syntax tree");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const ParseOptions& opt_;
};

}  // namespace detail

inline Term parse_term(const std::string& src, const ParseOptions& opt = {}) {
    return detail::TermParser(src, opt).parse();
}

struct PrintOptions {
    bool sugar = true;  // print K/H/F/=>/bot shapes with their notation
};

namespace detail {

class TermPrinter {
public:
    TermPrinter(const Term& t, PrintOptions o) : opt_(o), free_(free_vars(t)) { collect_user(t); }

    // prec: 0 top, 1 left of =>, 2 function position, 3 argument position
    std::string print(const Term& t, int prec) {
        if (opt_.sugar) {
            if (term_eq(t, comb_bot())) return "bot";
            if (term_eq(t, comb_H())) return "H";
            if (auto im = match_imp(t)) {
                std::string s = print(im->first, 1) + " => " + print(im->second, 0);
                return prec >= 1 ? "(" + s + ")" : s;
            }
            if (auto h = match_H(t)) {
                std::string s = "H " + print(*h, 3);
                return prec >= 3 ? "(" + s + ")" : s;
            }
            if (auto f = match_F(t)) {
                std::string s = "F " + print(f->first, 3) + " " + print(f->second, 3);
                return prec >= 3 ? "(" + s + ")" : s;
            }
        }
        switch (t->tag) {
            case Tag::BVar:
                if (t->index >= names_.size()) return "<" + std::to_string(t->index) + ">";
                return names_[names_.size() - 1 - t->index];
            case Tag::FVar: return t->name;
            case Tag::Const: return const_text(t);
            case Tag::App: {
                // A sugared head must not absorb further arguments.
                std::vector<Term> args;
                Term head = spine(t, args);
                std::size_t k = 0;
                while (opt_.sugar && k + 1 < args.size()) {
                    Term sub = mk_apps(head, std::vector<Term>(args.begin(), args.begin() + static_cast<long>(k + 1)));
                    if (match_H(sub) || match_imp(sub) || term_eq(sub, comb_bot())) break;
                    ++k;
                }
                std::string s;
                if (opt_.sugar && k + 1 < args.size()) {
                    Term sub = mk_apps(head, std::vector<Term>(args.begin(), args.begin() + static_cast<long>(k + 1)));
                    s = "(" + print(sub, 0) + ")";
                    for (std::size_t i = k + 1; i < args.size(); ++i) s += " " + print(args[i], 3);
                } else if (opt_.sugar && term_eq(head, comb_H())) {
                    opt_.sugar = false;
                    s = print(head, 2);
                    opt_.sugar = true;
                    for (const auto& a : args) s += " " + print(a, 3);
                } else {
                    s = print(head, 2);
                    for (const auto& a : args) s += " " + print(a, 3);
                }
                return prec >= 3 ? "(" + s + ")" : s;
            }
            case Tag::Lam: {
                std::string s = "\\";
                Term cur = t;
                std::size_t pushed = 0;
                while (cur->tag == Tag::Lam) {
                    if (pushed > 0 && opt_.sugar && (match_F(cur) || term_eq(cur, comb_H()))) break;
                    std::string n = pick(cur->name);
                    names_.push_back(n);
                    ++pushed;
                    s += (pushed > 1 ? " " : "") + n;
                    cur = cur->fn;
                }
                s += ". " + print(cur, 0);
                names_.resize(names_.size() - pushed);
                return prec >= 1 ? "(" + s + ")" : s;
            }
        }
        return "?";
    }

private:
    static std::string const_text(const Term& t) {
        switch (t->ckind) {
            case ConstKind::Xi: return "Xi";
            case ConstKind::L: return "L";
            case ConstKind::BaseTypePred: return "A@" + t->name;
            case ConstKind::User: return t->name;
            case ConstKind::Canon: return "#" + t->name;
            case ConstKind::External: return "$" + t->name;
            case ConstKind::Box: return "[" + t->name + "]";
        }
        return t->name;
    }

    void collect_user(const Term& t) {
        if (t->tag == Tag::Const && t->ckind == ConstKind::User) free_.insert(t->name);
        if (t->fn) collect_user(t->fn);
        if (t->arg) collect_user(t->arg);
    }

    std::string pick(const std::string& display) {
        std::string base = display;
        bool ok = !base.empty() && (std::isalpha(static_cast<unsigned char>(base[0])) || base[0] == '_' || base[0] == '%');
        for (char c : base.substr(ok ? 1 : 0))
            if (!ident_char(c)) ok = false;
        if (!ok || base == "_" || is_reserved_name(base)) base = "y";
        while (free_.count(base) || std::find(names_.begin(), names_.end(), base) != names_.end()) base += '\'';
        return base;
    }

    PrintOptions opt_;
    std::set<std::string> free_;
    std::vector<std::string> names_;
};

}  // namespace detail

inline std::string print_term(const Term& t, PrintOptions o = {}) { return detail::TermPrinter(t, o).print(t, 0); }

}  // namespace illatra
