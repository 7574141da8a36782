// Command-line front end. Structured I/O is JSON; terms and formulas use the
// library text syntaxes. Exit codes: 0 ok, 1 rule error or definite
// violation, 2 undecided only, 3 usage or parse error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <illatra/illative.hpp>
#include <illatra/kripke.hpp>
#include <illatra/pred2.hpp>
#include <illatra/stagesem_kripke.hpp>
#include <illatra/stagesem_omega.hpp>
#include <illatra/translate.hpp>

using namespace illatra;
using nlohmann::json;

namespace {

enum Exit { Ok = 0, Violated = 1, Undecided = 2, Usage = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Run {
    std::string out;
    int verbosity = 0;

    void emit(const json& j) const {
        if (out.empty() || out == "-") {
            std::cout << j.dump(2) << "\n";
            return;
        }
        std::ofstream f(out);
        if (!f) throw UsageError("cannot write " + out);
        f << j.dump(2) << "\n";
    }

    void note(const std::string& s) const {
        if (verbosity > 0) std::cerr << s << "\n";
    }
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    return json::parse(in);
}

int verdict_exit(Verdict v, bool false_is_violation) {
    switch (v) {
        case Verdict::True: return Ok;
        case Verdict::False: return false_is_violation ? Violated : Ok;
        default: return Undecided;
    }
}

kripke::Valuation parse_valuation(const std::vector<std::string>& vals) {
    kripke::Valuation w;
    for (auto& v : vals) {
        auto eq = v.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("valuation entries look like x=d, got '" + v + "'");
        w[v.substr(0, eq)] = v.substr(eq + 1);
    }
    return w;
}

void require_bound(const pred::PTerm& phi, const kripke::Valuation& w, const kripke::Model& m) {
    for (auto& [x, t] : pred::free_vars(phi)) {
        auto it = w.find(x);
        if (it == w.end()) throw UsageError("free variable " + x + " needs --val " + x + "=<element>");
        auto& dom = m.domain(t);
        if (std::find(dom.begin(), dom.end(), it->second) == dom.end())
            throw UsageError("element " + it->second + " is not in the domain of " + t->text);
    }
}

// Signature of a model file: its "signature" key, else --sig, else one read
// off the model (constants typed by domain membership, a variable per base
// type plus p over o).
pred::Signature model_signature(const json& j, const kripke::Model& m, const std::string& sig_path) {
    if (!sig_path.empty()) return pred::signature_from_json(read_json(sig_path));
    if (j.contains("signature")) return pred::signature_from_json(j.at("signature"));
    pred::Signature s;
    for (auto& [t, els] : m.domains)
        if (t != "o" && t.find("->") == std::string::npos && t.find('(') == std::string::npos) s.base_types.insert(t);
    for (auto& [c, e] : m.interp) {
        std::optional<std::string> found;
        for (auto& [t, els] : m.domains)
            if (std::find(els.begin(), els.end(), e) != els.end()) {
                if (found) throw UsageError("constant " + c + " has an ambiguous type; pass --sig");
                found = t;
            }
        if (!found) throw UsageError("constant " + c + " denotes no domain element");
        s.consts[c] = pred::parse_type(*found);
    }
    for (auto& b : s.base_types) s.vars["v_" + b] = pred::type_base(b);
    s.vars["p"] = pred::type_o();
    return s;
}

json pred_result(const pred::CheckResult& r) {
    return {{"ok", r.ok}, {"path", r.path}, {"kind", r.kind}, {"reason", r.reason}};
}

const char* status_text(ill::Status s) {
    switch (s) {
        case ill::Status::OK: return "OK";
        case ill::Status::RuleError: return "RuleError";
        default: return "Undecided";
    }
}

int status_exit(ill::Status s) {
    switch (s) {
        case ill::Status::OK: return Ok;
        case ill::Status::RuleError: return Violated;
        default: return Undecided;
    }
}

json violations_json(const std::vector<stage::Violation>& vs) {
    json a = json::array();
    for (auto& v : vs) a.push_back({{"property", v.property}, {"detail", v.detail}});
    return a;
}

Term stage_term(const std::string& s) {
    ParseOptions o;
    o.allow_internal = true;
    return parse_term(s, o);
}

stage::UniverseSpec universe_of(const std::string& path, int stage_bound, std::size_t step_budget) {
    stage::UniverseSpec s;
    if (path.empty()) s.base_domains["b"] = {"0"};
    else s = stage::universe_spec_from_json(read_json(path));
    if (stage_bound >= 0) s.stage_bound = stage_bound;
    if (step_budget > 0) s.step_budget = step_budget;
    return s;
}

// Terms the invariant suite exercises when none are given: the typing
// axioms, the classic inconsistency probes and a few quantifier shapes.
std::vector<std::string> default_probes() {
    return {"L H",
            "L A@b",
            "H (H (L H))",
            "Xi H I",
            "Xi A@b (\\x. H (A@b x))",
            "Xi A@b A@b",
            "Xi (K #{o}top) (K #{o}top)",
            "H #{o}bot",
            "#{o}top => #{o}bot"};
}

// ---------------------------------------------------------------- subcommands

int pred2_check(const Run& run, const std::string& file, bool classical, bool omega) {
    json j = read_json(file);
    auto mode = omega ? pred::Mode::PredOmega : pred::Mode::Pred2_0;
    auto sig = pred::signature_from_json(j.at("signature"));
    sig.validate(mode);
    auto d = pred::derivation_from_json(j.at("derivation"), sig, mode);
    auto r = pred::check_derivation(d, classical);
    run.emit(pred_result(r));
    return r.ok ? Ok : Violated;
}

int kripke_check_model(const Run& run, const std::string& file, const std::string& sig_path, int alphabet_depth) {
    json j = read_json(file);
    auto m = kripke::model_from_json(j);
    auto sig = model_signature(j, m, sig_path);
    std::vector<pred::PTerm> alphabet;
    if (alphabet_depth >= 0) alphabet = pred::enumerate_formulas(sig, alphabet_depth);
    auto vs = kripke::validate_model(m, sig, alphabet);
    json a = json::array();
    for (auto& v : vs) a.push_back({{"condition", v.condition}, {"witness", v.witness}});
    run.emit({{"ok", vs.empty()}, {"violations", a}});
    return vs.empty() ? Ok : Violated;
}

int kripke_force(const Run& run, const std::string& file, const std::string& sig_path, const std::string& state,
                 const std::string& formula, const std::vector<std::string>& vals) {
    json j = read_json(file);
    auto m = kripke::model_from_json(j);
    auto sig = model_signature(j, m, sig_path);
    auto phi = pred::parse_formula(formula, sig);
    auto w = parse_valuation(vals);
    require_bound(phi, w, m);
    bool f = kripke::forces(m, m.state_index(state), w, phi);
    run.emit({{"state", state}, {"formula", pred::print(phi)}, {"valuation", mirror::valuation_text(w)}, {"forces", f}});
    return Ok;
}

int kripke_countermodel(const Run& run, const std::string& file, int max_states, int max_dom) {
    json j = read_json(file);
    auto sig = pred::signature_from_json(j.at("signature"));
    sig.validate(pred::Mode::Pred2_0);
    std::vector<pred::PTerm> hyps;
    for (auto& h : j.value("hyps", json::array())) hyps.push_back(pred::parse_formula(h.get<std::string>(), sig));
    auto goal = pred::parse_formula(j.at("goal").get<std::string>(), sig);
    auto cm = kripke::enumerate_countermodel(sig, hyps, goal, kripke::Bounds{max_states, max_dom});
    if (!cm) {
        run.emit({{"found", false}, {"max_states", max_states}, {"max_dom", max_dom}});
        return Undecided;
    }
    json mj = kripke::model_to_json(cm->model);
    run.emit({{"found", true},
              {"model", mj},
              {"state", cm->model.states[cm->state]},
              {"valuation", json(cm->valuation)}});
    return Ok;
}

struct IllativeInput {
    ill::Deriv deriv;
    std::set<std::string> base_types;
    std::optional<ill::System> system;
};

IllativeInput read_illative(const std::string& file) {
    json j = read_json(file);
    IllativeInput in;
    ParseOptions po;
    po.allow_internal = true;
    json d = j;
    if (j.contains("derivation")) {
        d = j.at("derivation");
        for (auto& c : j.value("constants", json::array())) po.constants.insert(c.get<std::string>());
        for (auto& b : j.value("base_types", json::array())) in.base_types.insert(b.get<std::string>());
        if (j.contains("system")) in.system = ill::system_from_string(j.at("system").get<std::string>());
    }
    in.deriv = ill::from_json(d, po);
    return in;
}

int illative_check(const Run& run, const std::string& file, const std::string& system, std::size_t steps) {
    auto in = read_illative(file);
    ill::CheckOptions o;
    o.system = ill::system_from_string(system);
    if (steps > 0) o.budget.steps = steps;
    o.base_types = in.base_types;
    auto r = ill::check(in.deriv, o);
    run.emit({{"system", ill::to_string(o.system)}, {"status", status_text(r.status)}, {"path", r.path}, {"reason", r.reason}});
    return status_exit(r.status);
}

int illative_search(const Run& run, const std::string& goal, const std::vector<std::string>& hyps,
                    const std::vector<std::string>& consts, const std::string& system, int depth) {
    ParseOptions po;
    po.allow_internal = true;
    po.constants.insert(consts.begin(), consts.end());
    std::vector<Term> g;
    for (auto& h : hyps) g = ill::with_hyp(g, parse_term(h, po));
    ill::SearchOptions o;
    o.system = ill::system_from_string(system);
    o.depth = depth;
    auto r = ill::term_model_eval(g, parse_term(goal, po), o);
    json out{{"verdict", to_string(r.verdict)}};
    if (r.proof) out["proof"] = ill::to_json(*r.proof);
    run.emit(out);
    return r.verdict == Verdict::True ? Ok : Undecided;
}

std::vector<pred::PTerm> formulas_of(const json& j, const pred::Signature& sig) {
    std::vector<pred::PTerm> fs;
    if (j.contains("formula")) fs.push_back(pred::parse_formula(j.at("formula").get<std::string>(), sig));
    for (auto& f : j.value("formulas", json::array())) fs.push_back(pred::parse_formula(f.get<std::string>(), sig));
    return fs;
}

int translate_formula(const Run& run, const std::string& file) {
    json j = read_json(file);
    auto sig = pred::signature_from_json(j.at("signature"));
    sig.validate(pred::Mode::Pred2_0);
    json a = json::array();
    for (auto& f : formulas_of(j, sig)) a.push_back({{"formula", pred::print(f)}, {"term", print_term(tr::translate(f))}});
    run.emit({{"translations", a}});
    return Ok;
}

int translate_gamma(const Run& run, const std::string& file) {
    json j = read_json(file);
    auto sig = pred::signature_from_json(j.at("signature"));
    sig.validate(pred::Mode::Pred2_0);
    json a = json::array();
    for (auto& t : tr::gamma(sig, formulas_of(j, sig))) a.push_back(print_term(t));
    run.emit({{"gamma", a}});
    return Ok;
}

int translate_compile(const Run& run, const std::string& file) {
    json j = read_json(file);
    auto sig = pred::signature_from_json(j.at("signature"));
    sig.validate(pred::Mode::Pred2_0);
    auto d = pred::derivation_from_json(j.at("derivation"), sig);
    auto pr = pred::check_derivation(d);
    if (!pr.ok) {
        std::cerr << "source derivation rejected at " << pr.path << ": " << pr.reason << "\n";
        return Violated;
    }
    ill::Deriv out;
    try {
        out = tr::compile(d, sig);
    } catch (const tr::CompileError& e) {
        std::cerr << "compile: " << e.what() << "\n";
        return Violated;
    }
    ill::CheckOptions o;
    o.system = ill::System::I0;
    o.base_types = sig.base_types;
    auto r = ill::check(out, o);
    if (!r.ok()) std::cerr << "compiled derivation " << status_text(r.status) << " at " << r.path << ": " << r.reason << "\n";
    json consts = json::array();
    for (auto& [c, t] : sig.consts) consts.push_back(c);
    run.emit({{"system", "i0"}, {"constants", consts}, {"base_types", sig.base_types}, {"derivation", ill::to_json(out)}});
    return status_exit(r.status);
}

struct StageArgs {
    std::string universe;
    int stage = -1;
    std::size_t step_budget = 0;
};

int stagesem_build(const Run& run, const StageArgs& a) {
    stage::Universe u(universe_of(a.universe, a.stage, a.step_budget));
    json types = json::array();
    for (auto& t : u.build()) types.push_back({{"type", t->text}, {"size", u.space(t).elems.size()}});
    run.emit({{"universe", stage::to_json(u.spec())}, {"types", types}});
    return Ok;
}

int stagesem_query(const Run& run, const StageArgs& a, const std::vector<std::string>& succ,
                   const std::vector<std::string>& lead, const std::string& sim, int at) {
    auto spec = universe_of(a.universe, a.stage, a.step_budget);
    stage::Universe u(spec);
    stage::Engine e(u, stage::Engine::config_of(spec));
    int n = at >= 0 ? at : spec.stage_bound;
    json out{{"stage", n}};
    Verdict v;
    if (!succ.empty()) {
        v = e.succ(stage_term(succ[0]), stage_term(succ[1]), n);
        out["relation"] = "succ";
    } else if (!lead.empty()) {
        v = e.leadsto(stage_term(lead[0]), stage_term(lead[1]), n);
        out["relation"] = "leadsto";
    } else if (!sim.empty()) {
        auto r = e.sim(stage_term(sim), n);
        v = r.v;
        out["relation"] = "sim";
        if (r.type) out["type"] = r.type->text;
    } else {
        throw UsageError("query needs one of --succ, --leadsto, --sim");
    }
    out["verdict"] = to_string(v);
    run.emit(out);
    return verdict_exit(v, false);
}

int stagesem_certify(const Run& run, const StageArgs& a, const std::string& term) {
    auto spec = universe_of(a.universe, a.stage, a.step_budget);
    stage::Universe u(spec);
    stage::Engine e(u, stage::Engine::config_of(spec));
    auto r = e.certify_true(stage_term(term));
    run.emit({{"term", term},
              {"verdict", to_string(r.verdict)},
              {"stage", r.stage},
              {"saturated", r.saturated},
              {"starved", e.starved()}});
    return verdict_exit(r.verdict, true);
}

int stagesem_props(const Run& run, const StageArgs& a, std::vector<std::string> terms, std::size_t pool) {
    auto spec = universe_of(a.universe, a.stage, a.step_budget);
    stage::Universe u(spec);
    stage::Engine e(u, stage::Engine::config_of(spec));
    if (terms.empty()) terms = default_probes();
    json probes = json::array();
    for (auto& t : terms) {
        auto r = e.certify_true(stage_term(t));
        e.sim(stage_term(t), spec.stage_bound);
        probes.push_back({{"term", t}, {"verdict", to_string(r.verdict)}});
        run.note(t + ": " + to_string(r.verdict));
    }
    run.note("invariants");
    auto inv = e.check_invariants();
    run.note("model conditions");
    auto mc = e.check_model_conditions(pool);
    run.emit({{"probes", probes},
              {"cache_true", e.count_true()},
              {"invariants", violations_json(inv)},
              {"model_conditions", violations_json(mc)}});
    return inv.empty() && mc.empty() ? Ok : Violated;
}

struct MirrorArgs {
    std::string file, sig;
    int stage = -1;
    std::size_t step_budget = 0;
    bool query_state = false;
};

struct Loaded {
    kripke::Model model;
    pred::Signature sig;
};

Loaded load_model(const MirrorArgs& a) {
    json j = read_json(a.file);
    Loaded l{kripke::model_from_json(j), {}};
    l.sig = model_signature(j, l.model, a.sig);
    return l;
}

mirror::Engine::Config mirror_config(const MirrorArgs& a) {
    mirror::Engine::Config c;
    if (a.stage >= 0) c.stage_bound = a.stage;
    if (a.step_budget > 0) c.step_budget = a.step_budget;
    if (a.query_state) c.type_at = mirror::TypeAt::QueryState;
    return c;
}

int mirror_build(const Run& run, const MirrorArgs& a) {
    auto l = load_model(a);
    mirror::Mirror mm(l.model, &l.sig);
    auto cps = mm.critical_pairs();
    json j = mm.to_json();
    j["critical_pairs"] = cps;
    run.emit(j);
    return cps.empty() ? Ok : Violated;
}

int mirror_force(const Run& run, const MirrorArgs& a, const std::string& state, const std::string& formula,
                 const std::vector<std::string>& vals) {
    auto l = load_model(a);
    mirror::Mirror mm(l.model, &l.sig);
    mirror::Engine e(mm, mirror_config(a));
    auto phi = pred::parse_formula(formula, l.sig);
    auto w = parse_valuation(vals);
    require_bound(phi, w, l.model);
    std::size_t s = l.model.state_index(state);
    auto r = mirror::mirror_forces(e, s, w, phi);
    run.emit({{"state", state},
              {"formula", pred::print(phi)},
              {"term", print_term(mm.instance(phi, w))},
              {"verdict", to_string(r.verdict)},
              {"stage", r.stage},
              {"kripke", kripke::forces(l.model, s, w, phi)}});
    return verdict_exit(r.verdict, false);
}

json equiv_item(const mirror::EquivReport::Item& it) {
    return {{"state", it.state},
            {"formula", it.formula},
            {"valuation", it.valuation},
            {"kripke", it.kripke},
            {"mirror", to_string(it.mirror.verdict)}};
}

int mirror_equiv(const Run& run, const MirrorArgs& a, int depth) {
    auto l = load_model(a);
    auto bad = kripke::validate_model(l.model, l.sig);
    if (!bad.empty()) {
        std::cerr << "model violates " << bad.front().condition << " (" << bad.front().witness << ")\n";
        return Violated;
    }
    mirror::Mirror mm(l.model, &l.sig);
    mirror::Engine e(mm, mirror_config(a));
    auto formulas = pred::enumerate_formulas(l.sig, depth);
    run.note(std::to_string(formulas.size()) + " formulas");
    auto r = mirror::forcing_equiv_suite(e, formulas);
    json dis = json::array(), unk = json::array();
    for (auto& it : r.disagreements) dis.push_back(equiv_item(it));
    for (auto& it : r.unknowns) unk.push_back(equiv_item(it));
    run.emit({{"formulas", formulas.size()},
              {"checked", r.checked},
              {"agreed", r.agreed},
              {"disagreements", dis},
              {"unknowns", unk}});
    if (!r.disagreements.empty()) return Violated;
    return r.unknowns.empty() ? Ok : Undecided;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"illative logic toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Run run;
    app.add_option("-o,--out", run.out, "write the JSON result here instead of stdout");
    app.add_flag("-v,--verbose", run.verbosity, "progress notes on stderr");

    std::function<int()> action;
    auto bind = [&](CLI::App* sub, std::function<int()> f) { sub->callback([&action, f] { action = f; }); };

    // pred2
    auto* pred2 = app.add_subcommand("pred2", "natural-deduction derivations")->require_subcommand(1);
    std::string p_file;
    bool p_classical = false, p_omega = false;
    auto* p_check = pred2->add_subcommand("check", "check a derivation file {signature, derivation}");
    p_check->add_option("file", p_file)->required();
    p_check->add_flag("--classical", p_classical, "allow DoubleNeg");
    p_check->add_flag("--omega", p_omega, "accept the unrestricted type grammar");
    bind(p_check, [&] { return pred2_check(run, p_file, p_classical, p_omega); });

    // kripke
    auto* kr = app.add_subcommand("kripke", "finite Kripke models")->require_subcommand(1);
    std::string k_file, k_sig, k_state, k_formula;
    std::vector<std::string> k_vals;
    int k_alpha = -1, k_states = 3, k_dom = 2;
    auto* k_check = kr->add_subcommand("check-model", "validate a model file");
    k_check->add_option("file", k_file)->required();
    k_check->add_option("--sig", k_sig, "signature file");
    k_check->add_option("--alphabet-depth", k_alpha, "also check denotations against formulas up to this depth");
    bind(k_check, [&] { return kripke_check_model(run, k_file, k_sig, k_alpha); });
    auto* k_force = kr->add_subcommand("force", "decide forcing at a state");
    k_force->add_option("file", k_file)->required();
    k_force->add_option("--sig", k_sig, "signature file");
    k_force->add_option("--state", k_state)->required();
    k_force->add_option("--formula", k_formula)->required();
    k_force->add_option("--val", k_vals, "x=element");
    bind(k_force, [&] { return kripke_force(run, k_file, k_sig, k_state, k_formula, k_vals); });
    auto* k_cm = kr->add_subcommand("countermodel", "search small models refuting {signature, hyps, goal}");
    k_cm->add_option("file", k_file)->required();
    k_cm->add_option("--max-states", k_states)->check(CLI::Range(1, 3));
    k_cm->add_option("--max-dom", k_dom)->check(CLI::Range(1, 4));
    bind(k_cm, [&] { return kripke_countermodel(run, k_file, k_states, k_dom); });

    // illative
    auto* il = app.add_subcommand("illative", "illative derivations")->require_subcommand(1);
    std::string i_file, i_system = "iw", i_goal;
    std::vector<std::string> i_hyps, i_consts;
    std::size_t i_steps = 0;
    int i_depth = 6;
    auto* i_check = il->add_subcommand("check", "check a derivation file");
    i_check->add_option("file", i_file)->required();
    i_check->add_option("--system", i_system, "i0, iw or iwc")->required()->check(CLI::IsMember({"i0", "iw", "iwc"}));
    i_check->add_option("--steps", i_steps, "conversion step budget")->check(CLI::PositiveNumber);
    bind(i_check, [&] { return illative_check(run, i_file, i_system, i_steps); });
    auto* i_search = il->add_subcommand("search", "bounded proof search");
    i_search->add_option("goal", i_goal)->required();
    i_search->add_option("--hyp", i_hyps, "hypothesis term");
    i_search->add_option("--const", i_consts, "identifier read as a constant");
    i_search->add_option("--system", i_system, "i0, iw or iwc")->check(CLI::IsMember({"i0", "iw", "iwc"}));
    i_search->add_option("--depth", i_depth)->check(CLI::Range(1, 32));
    bind(i_search, [&] { return illative_search(run, i_goal, i_hyps, i_consts, i_system, i_depth); });

    // translate
    auto* trn = app.add_subcommand("translate", "formulas and proofs into illative terms")->require_subcommand(1);
    std::string t_file;
    auto* t_formula = trn->add_subcommand("formula", "translate {signature, formula|formulas}");
    t_formula->add_option("file", t_file)->required();
    bind(t_formula, [&] { return translate_formula(run, t_file); });
    auto* t_gamma = trn->add_subcommand("gamma", "typing context of {signature, formulas}");
    t_gamma->add_option("file", t_file)->required();
    bind(t_gamma, [&] { return translate_gamma(run, t_file); });
    auto* t_compile = trn->add_subcommand("compile", "compile {signature, derivation} and check it in i0");
    t_compile->add_option("file", t_file)->required();
    bind(t_compile, [&] { return translate_compile(run, t_file); });

    // stagesem
    auto* st = app.add_subcommand("stagesem", "stage semantics over a canonical universe")->require_subcommand(1);
    StageArgs sa;
    std::vector<std::string> s_succ, s_lead, s_terms;
    std::string s_sim, s_term;
    int s_at = -1;
    auto stage_opts = [&](CLI::App* c) {
        c->add_option("--universe", sa.universe, "universe spec file (default: one base type b with one element)");
        c->add_option("--stage-bound", sa.stage, "override the stage bound")->check(CLI::NonNegativeNumber);
        c->add_option("--step-budget", sa.step_budget, "override the step budget")->check(CLI::PositiveNumber);
    };
    auto* s_build = st->add_subcommand("build", "materialize the canonical sets");
    stage_opts(s_build);
    bind(s_build, [&] { return stagesem_build(run, sa); });
    auto* s_query = st->add_subcommand("query", "one relation query");
    stage_opts(s_query);
    s_query->add_option("--succ", s_succ, "t rho")->expected(2);
    s_query->add_option("--leadsto", s_lead, "t rho")->expected(2);
    s_query->add_option("--sim", s_sim, "t");
    s_query->add_option("--at", s_at, "stage (default: the stage bound)")->check(CLI::NonNegativeNumber);
    bind(s_query, [&] { return stagesem_query(run, sa, s_succ, s_lead, s_sim, s_at); });
    auto* s_cert = st->add_subcommand("certify", "truth of a term up to the stage bound");
    stage_opts(s_cert);
    s_cert->add_option("term", s_term)->required();
    bind(s_cert, [&] { return stagesem_certify(run, sa, s_term); });
    auto* s_props = st->add_subcommand("props", "invariant and model-condition suites");
    stage_opts(s_props);
    std::size_t s_pool = 200;
    s_props->add_option("terms", s_terms, "probe terms (default: a fixed probe list)");
    s_props->add_option("--pool", s_pool, "cached terms examined by the model-condition suite")->check(CLI::PositiveNumber);
    bind(s_props, [&] { return stagesem_props(run, sa, s_terms, s_pool); });

    // mirror
    auto* mi = app.add_subcommand("mirror", "stage semantics mirroring a Kripke model")->require_subcommand(1);
    MirrorArgs ma;
    std::string m_state, m_formula;
    std::vector<std::string> m_vals;
    int m_depth = 2;
    auto mirror_opts = [&](CLI::App* c) {
        c->add_option("model", ma.file)->required();
        c->add_option("--sig", ma.sig, "signature file");
        c->add_option("--stage-bound", ma.stage)->check(CLI::NonNegativeNumber);
        c->add_option("--step-budget", ma.step_budget)->check(CLI::PositiveNumber);
        c->add_flag("--type-at-query-state", ma.query_state, "type quantifier bounds at the query state only");
    };
    auto* m_build = mi->add_subcommand("build", "constants and rules of the mirror");
    mirror_opts(m_build);
    bind(m_build, [&] { return mirror_build(run, ma); });
    auto* m_force = mi->add_subcommand("force", "mirror truth of a formula at a state");
    mirror_opts(m_force);
    m_force->add_option("--state", m_state)->required();
    m_force->add_option("--formula", m_formula)->required();
    m_force->add_option("--val", m_vals, "x=element");
    bind(m_force, [&] { return mirror_force(run, ma, m_state, m_formula, m_vals); });
    auto* m_equiv = mi->add_subcommand("equiv", "compare Kripke and mirror forcing on every small formula");
    mirror_opts(m_equiv);
    m_equiv->add_option("--depth", m_depth)->check(CLI::Range(0, 3));
    bind(m_equiv, [&] { return mirror_equiv(run, ma, m_depth); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Usage;
    }
    try {
        return action ? action() : Usage;
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
    } catch (const json::exception& e) {
        std::cerr << "json: " << e.what() << "\n";
    } catch (const ParseError& e) {
        std::cerr << "parse: " << e.what() << "\n";
    } catch (const pred::TypeError& e) {
        std::cerr << "type: " << e.what() << "\n";
    } catch (const stage::TypeError& e) {
        std::cerr << "type: " << e.what() << "\n";
    } catch (const mirror::MirrorError& e) {
        std::cerr << "model: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return Usage;
}
