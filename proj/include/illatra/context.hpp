// Multi-hole contexts: terms containing Box constants [1] .. [n].
#pragma once

#include <map>

#include "term.hpp"

namespace illatra {

struct CaptureViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Term fill_at(const Term& c, const std::map<std::string, Term>& fills, bool capture,
                    std::vector<std::string>& binders) {
    switch (c->tag) {
        case Tag::Const: {
            if (c->ckind != ConstKind::Box) return c;
            auto it = fills.find(c->name);
            if (it == fills.end()) return c;
            Term f = it->second;
            if (f->loose > 0) throw TermError("hole filler has loose indices");
            auto d = static_cast<std::uint32_t>(binders.size());
            if (!capture) {
                for (const auto& b : binders)
                    if (occurs_free(f, b))
                        throw CaptureViolation("free variable '" + b + "' of filler for [" + c->name +
                                               "] would be captured");
                return f;
            }
            // Bind each free name to the innermost enclosing binder of that name.
            for (std::uint32_t i = 0; i < d; ++i) {
                const std::string& b = binders[d - 1 - i];
                bool shadowed = false;
                for (std::uint32_t j = 0; j < i; ++j)
                    if (binders[d - 1 - j] == b) shadowed = true;
                if (!shadowed && occurs_free(f, b)) f = subst(f, b, mk_bvar(i));
            }
            return f;
        }
        case Tag::App: return mk_app(fill_at(c->fn, fills, capture, binders), fill_at(c->arg, fills, capture, binders));
        case Tag::Lam: {
            binders.push_back(c->name);
            Term b = fill_at(c->fn, fills, capture, binders);
            binders.pop_back();
            return mk_lam(c->name, b);
        }
        default: return c;
    }
}

}  // namespace detail

// C[t1, .., tn]. Without `capture`, a filler whose free variable is named
// like an enclosing binder is rejected; with it, that variable becomes bound.
inline Term fill_context(const Term& c, const std::map<std::string, Term>& fills, bool capture = false) {
    std::vector<std::string> binders;
    return detail::fill_at(c, fills, capture, binders);
}

inline std::set<std::string> context_holes(const Term& c) {
    std::set<std::string> out;
    if (c->tag == Tag::Const && c->ckind == ConstKind::Box) out.insert(c->name);
    if (c->fn) for (auto& h : context_holes(c->fn)) out.insert(h);
    if (c->arg) for (auto& h : context_holes(c->arg)) out.insert(h);
    return out;
}

}  // namespace illatra
