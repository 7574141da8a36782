// Budgeted beta-eta reduction, with an optional hook for extra rules of the
// shape `c t -> r` keyed on a constant head.
#pragma once

#include <functional>
#include <optional>

#include "term.hpp"
#include "verdict.hpp"

namespace illatra {

enum class DeltaKind { None, Rewrite, Unknown };

struct DeltaResult {
    DeltaKind kind = DeltaKind::None;
    Term result;
};

// Called on `c arg` with c a constant and arg already normal. depth counts
// the binders enclosing the redex, so arg may mention indices below it.
using DeltaHook = std::function<DeltaResult(const Term& c, const Term& arg, std::uint32_t depth)>;

// All one-step rule reducts of `c arg` (arg need not be normal).
using DeltaStepHook = std::function<std::vector<Term>(const Term& c, const Term& arg, std::uint32_t depth)>;

struct Budget {
    std::size_t steps = 1000;
    std::size_t max_size = 200000;
};

struct NormOutcome {
    std::optional<Term> term;   // empty when the budget ran out
    std::size_t steps = 0;
    bool incomplete = false;    // some rule application was undecided
    bool exhausted() const { return !term.has_value(); }
};

class Normalizer {
public:
    explicit Normalizer(Budget b, const DeltaHook* hook = nullptr) : budget_(b), hook_(hook) {}

    NormOutcome run(const Term& t) {
        NormOutcome out;
        steps_left_ = budget_.steps;
        incomplete_ = false;
        try {
            out.term = norm(t, 0);
        } catch (const Exhausted&) {
            out.term.reset();
        }
        out.steps = budget_.steps - steps_left_;
        out.incomplete = incomplete_;
        return out;
    }

private:
    struct Exhausted {};

    void tick(const Term& t) {
        if (steps_left_ == 0) throw Exhausted{};
        --steps_left_;
        if (t->size > budget_.max_size) throw Exhausted{};
    }

    Term norm(Term t, std::uint32_t depth) {
        std::vector<Term> args;
        for (;;) {
            switch (t->tag) {
                case Tag::BVar:
                case Tag::FVar:
                case Tag::Const: return t;
                case Tag::Lam: {
                    Term body = norm(t->fn, depth + 1);
                    if (body->tag == Tag::App && body->arg->tag == Tag::BVar && body->arg->index == 0 &&
                        !has_index(body->fn, 0)) {
                        Term r = instantiate(body->fn, mk_bvar(0));
                        tick(r);
                        return r;
                    }
                    return mk_lam(t->name, body);
                }
                case Tag::App: {
                    Term head = spine(t, args);
                    if (head->tag == Tag::Lam) {
                        Term r = instantiate(head->fn, args[0]);
                        for (std::size_t i = 1; i < args.size(); ++i) r = mk_app(r, args[i]);
                        tick(r);
                        t = r;
                        continue;
                    }
                    std::size_t from = 0;
                    if (head->tag == Tag::Const && hook_) {
                        Term a0 = norm(args[0], depth);
                        DeltaResult d = (*hook_)(head, a0, depth);
                        if (d.kind == DeltaKind::Rewrite) {
                            Term r = d.result;
                            for (std::size_t i = 1; i < args.size(); ++i) r = mk_app(r, args[i]);
                            tick(r);
                            t = r;
                            continue;
                        }
                        if (d.kind == DeltaKind::Unknown) incomplete_ = true;
                        args[0] = a0;
                        from = 1;
                    }
                    std::vector<Term> local(args);
                    for (std::size_t i = from; i < local.size(); ++i) local[i] = norm(local[i], depth);
                    return mk_apps(head, local);
                }
            }
        }
    }

    Budget budget_;
    const DeltaHook* hook_;
    std::size_t steps_left_ = 0;
    bool incomplete_ = false;
};

inline NormOutcome beta_eta_normalize(const Term& t, Budget b = {}, const DeltaHook* hook = nullptr) {
    return Normalizer(b, hook).run(t);
}

inline bool is_beta_eta_normal(const Term& t) {
    switch (t->tag) {
        case Tag::App:
            if (t->fn->tag == Tag::Lam) return false;
            return is_beta_eta_normal(t->fn) && is_beta_eta_normal(t->arg);
        case Tag::Lam: {
            const Term& b = t->fn;
            if (b->tag == Tag::App && b->arg->tag == Tag::BVar && b->arg->index == 0 && !has_index(b->fn, 0))
                return false;
            return is_beta_eta_normal(b);
        }
        default: return true;
    }
}

namespace detail {

inline void reducts_at(const Term& t, std::uint32_t depth, const DeltaStepHook* hook,
                       const std::function<Term(const Term&)>& rebuild, std::vector<Term>& out) {
    switch (t->tag) {
        case Tag::App: {
            if (t->fn->tag == Tag::Lam) out.push_back(rebuild(instantiate(t->fn->fn, t->arg)));
            if (hook && t->fn->tag == Tag::Const)
                for (auto& r : (*hook)(t->fn, t->arg, depth)) out.push_back(rebuild(r));
            reducts_at(t->fn, depth, hook, [&](const Term& x) { return rebuild(mk_app(x, t->arg)); }, out);
            reducts_at(t->arg, depth, hook, [&](const Term& x) { return rebuild(mk_app(t->fn, x)); }, out);
            break;
        }
        case Tag::Lam: {
            const Term& b = t->fn;
            if (b->tag == Tag::App && b->arg->tag == Tag::BVar && b->arg->index == 0 && !has_index(b->fn, 0))
                out.push_back(rebuild(instantiate(b->fn, mk_bvar(0))));
            reducts_at(b, depth + 1, hook, [&](const Term& x) { return rebuild(mk_lam(t->name, x)); }, out);
            break;
        }
        default: break;
    }
}

}  // namespace detail

// Every term reachable in exactly one step, deduplicated, in position order.
inline std::vector<Term> one_step_reducts(const Term& t, const DeltaStepHook* hook = nullptr) {
    std::vector<Term> raw, out;
    detail::reducts_at(t, 0, hook, [](const Term& x) { return x; }, raw);
    TermSet seen;
    for (auto& r : raw)
        if (seen.insert(r).second) out.push_back(r);
    return out;
}

// Leftmost-outermost reduction sequence, at most `limit` steps long.
inline std::vector<Term> reduction_path(const Term& t, std::size_t limit, const DeltaStepHook* hook = nullptr) {
    std::vector<Term> path{t};
    for (std::size_t i = 0; i < limit; ++i) {
        auto next = one_step_reducts(path.back(), hook);
        if (next.empty()) break;
        path.push_back(next.front());
    }
    return path;
}

// Decides t1 =βη t2 when both normalise within budget; Unknown otherwise.
inline Verdict beta_eta_equal(const Term& a, const Term& b, Budget budget = {}, const DeltaHook* hook = nullptr) {
    if (term_eq(a, b)) return Verdict::True;
    auto na = beta_eta_normalize(a, budget, hook);
    auto nb = beta_eta_normalize(b, budget, hook);
    if (na.exhausted() || nb.exhausted()) return Verdict::Unknown;
    if (term_eq(*na.term, *nb.term)) return Verdict::True;
    if (na.incomplete || nb.incomplete) return Verdict::Unknown;
    return Verdict::False;
}

}  // namespace illatra
