#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <illatra/illative.hpp>
#include <illatra/kripke.hpp>
#include <illatra/translate.hpp>

#include "support.hpp"

using namespace illatra;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Out {
    int code = -1;
    std::string text;
    json j() const { return json::parse(text); }
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Out cli(const std::vector<std::string>& args) {
    std::string cmd = ILLATRA_CLI;
    for (auto& a : args) cmd += " " + quote(a);
    cmd += " 2>/dev/null";
    Out o;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) o.text.append(buf, n);
    int st = pclose(p);
    o.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return o;
}

std::string data(const std::string& f) { return testsupport::source_path("tests/data/" + f); }

struct Scratch {
    fs::path dir = fs::temp_directory_path() / ("illatra_cli_" + std::to_string(::getpid()));
    Scratch() { fs::create_directories(dir); }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};

fs::path scratch() {
    static Scratch s;
    return s.dir;
}

std::string write(const std::string& name, const json& j) {
    fs::path p = scratch() / name;
    std::ofstream(p) << j.dump(1);
    return p.string();
}

json load(const std::string& path) { return json::parse(std::ifstream(path)); }

}  // namespace

TEST_CASE("usage errors exit 3") {
    CHECK(cli({}).code == 3);
    CHECK(cli({"pred2"}).code == 3);
    CHECK(cli({"pred2", "check", "/nonexistent.json"}).code == 3);
    CHECK(cli({"illative", "check", "--system", "i9", data("pred2_forall.json")}).code == 3);
    CHECK(cli({"kripke", "force", data("chain_model.json"), "--state", "s0", "--formula", "P ("}).code == 3);
    CHECK(cli({"kripke", "force", data("chain_model.json"), "--state", "s0", "--formula", "P x"}).code == 3);
    CHECK(cli({"kripke", "force", data("chain_model.json"), "--state", "s0", "--formula", "P x", "--val", "x=zz"}).code == 3);
    fs::path bad = scratch() / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK(cli({"pred2", "check", bad.string()}).code == 3);
    CHECK(cli({"stagesem", "certify", "Xi H ("}).code == 3);
    CHECK(cli({"stagesem", "query"}).code == 3);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("pred2 check") {
    auto ok = cli({"pred2", "check", data("pred2_forall.json")});
    CHECK(ok.code == 0);
    CHECK(ok.j()["ok"] == true);
    auto bad = cli({"pred2", "check", data("pred2_bad.json")});
    CHECK(bad.code == 1);
    CHECK(bad.j()["path"] == "0");
    CHECK(bad.j()["kind"] == "RuleError");
}

TEST_CASE("translate and illative round trip") {
    auto tf = cli({"translate", "formula", data("formulas.json")});
    REQUIRE(tf.code == 0);
    auto in = load(data("formulas.json"));
    auto sig = pred::signature_from_json(in["signature"]);
    auto po = tr::parse_options(sig);
    for (auto& t : tf.j()["translations"]) {
        auto phi = pred::parse_formula(t["formula"].get<std::string>(), sig);
        CHECK(term_eq(parse_term(t["term"].get<std::string>(), po), tr::translate(phi)));
    }
    auto tg = cli({"translate", "gamma", data("formulas.json")});
    REQUIRE(tg.code == 0);
    std::vector<pred::PTerm> fs;
    for (auto& f : in["formulas"]) fs.push_back(pred::parse_formula(f.get<std::string>(), sig));
    auto g = tr::gamma(sig, fs);
    REQUIRE(tg.j()["gamma"].size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(term_eq(parse_term(tg.j()["gamma"][i].get<std::string>(), po), g[i]));

    std::string out = (scratch() / "compiled.json").string();
    auto c = cli({"translate", "compile", data("pred2_forall.json"), "-o", out});
    REQUIRE(c.code == 0);
    json cj = load(out);
    CHECK(cj["system"] == "i0");
    for (auto sys : {"i0", "iw", "iwc"}) CHECK(cli({"illative", "check", "--system", sys, out}).code == 0);

    // emitted derivations re-parse to the same value
    ParseOptions ipo;
    ipo.allow_internal = true;
    for (auto& k : cj["constants"]) ipo.constants.insert(k.get<std::string>());
    ill::Deriv d = ill::from_json(cj["derivation"], ipo);
    CHECK(ill::to_json(d) == cj["derivation"]);
    CHECK(ill::check(d, {ill::System::I0, {}, {"b"}}).ok());

    // a tampered goal is a rule error
    cj["derivation"]["goal"] = "P c";
    auto broken = write("broken.json", cj);
    auto r = cli({"illative", "check", "--system", "i0", broken});
    CHECK(r.code == 1);
    CHECK(r.j()["status"] == "RuleError");

    // an invalid source derivation does not compile
    CHECK(cli({"translate", "compile", data("pred2_bad.json")}).code == 1);
}

TEST_CASE("illative search") {
    auto s = cli({"illative", "search", "--hyp", "H a", "a => a"});
    REQUIRE(s.code == 0);
    CHECK(s.j()["verdict"] == "true");
    ParseOptions po;
    ill::Deriv d = ill::from_json(s.j()["proof"], po);
    CHECK(ill::check(d).ok());
    auto n = cli({"illative", "search", "--depth", "4", "Xi H I"});
    CHECK(n.code == 2);
    CHECK(n.j()["verdict"] == "unknown");
    CHECK_FALSE(n.j().contains("proof"));
}

TEST_CASE("kripke subcommands") {
    std::string m = data("chain_model.json");
    CHECK(cli({"kripke", "check-model", m}).code == 0);
    CHECK(cli({"kripke", "check-model", m, "--alphabet-depth", "1"}).code == 0);

    json mj = load(m);
    auto model = kripke::model_from_json(mj);
    auto sig = pred::signature_from_json(mj["signature"]);
    for (auto& [st, x] : std::vector<std::pair<std::string, std::string>>{{"s0", "b.0"}, {"s1", "b.0"}, {"s1", "b.1"}}) {
        auto r = cli({"kripke", "force", m, "--state", st, "--formula", "P x", "--val", "x=" + x});
        REQUIRE(r.code == 0);
        bool lib = kripke::forces(model, model.state_index(st), {{"x", x}}, pred::parse_formula("P x", sig));
        CHECK(r.j()["forces"] == lib);
    }

    // truth sets must be upward closed
    json bad = mj;
    bad["sigma"]["o.01"] = json::array({"s0"});
    auto r = cli({"kripke", "check-model", write("not_upward.json", bad)});
    CHECK(r.code == 1);
    CHECK_FALSE(r.j()["violations"].empty());

    // Peirce's law has a two-state countermodel, p -> p has none
    auto cm = cli({"kripke", "countermodel", data("peirce.json"), "--max-states", "2"});
    REQUIRE(cm.code == 0);
    REQUIRE(cm.j()["found"] == true);
    json cmm = cm.j()["model"];
    CHECK(kripke::model_to_json(kripke::model_from_json(cmm)) == cmm);
    cmm["signature"] = load(data("peirce.json"))["signature"];
    std::vector<std::string> args{"kripke", "force", write("peirce_cm.json", cmm), "--state",
                                  cm.j()["state"].get<std::string>(), "--formula", "((p -> q) -> p) -> p"};
    json val = cm.j()["valuation"];
    for (auto& [k, v] : val.items()) {
        args.push_back("--val");
        args.push_back(k + "=" + v.get<std::string>());
    }
    auto f = cli(args);
    REQUIRE(f.code == 0);
    CHECK(f.j()["forces"] == false);
    json valid = load(data("peirce.json"));
    valid["goal"] = "p -> p";
    auto none = cli({"kripke", "countermodel", write("valid.json", valid), "--max-states", "2"});
    CHECK(none.code == 2);
    CHECK(none.j()["found"] == false);
}

TEST_CASE("stagesem subcommands") {
    auto b = cli({"stagesem", "build"});
    REQUIRE(b.code == 0);
    CHECK(b.j()["types"].size() > 10);
    auto u = cli({"stagesem", "build", "--universe", data("universe.json")});
    REQUIRE(u.code == 0);
    CHECK(u.j()["universe"]["base_domains"]["b"].size() == 2);

    // Ξ H I is never certified
    auto x = cli({"stagesem", "certify", "Xi H I"});
    CHECK((x.code == 1 || x.code == 2));
    CHECK(x.j()["verdict"] != "true");
    auto lh = cli({"stagesem", "certify", "L H"});
    CHECK(lh.code == 0);
    CHECK(lh.j()["verdict"] == "true");

    auto q = cli({"stagesem", "query", "--leadsto", "H #{o}top", "#{o}top", "--at", "2"});
    CHECK(q.code == 0);
    CHECK(q.j()["verdict"] == "true");
    auto s = cli({"stagesem", "query", "--sim", "F A@b H", "--at", "1"});
    CHECK(s.code == 0);
    CHECK(s.j()["type"] == "b->o");

    auto p = cli({"stagesem", "props", "--stage-bound", "5", "L H", "Xi A@b (\\x. H (A@b x))", "Xi H I"});
    CHECK(p.code == 0);
    CHECK(p.j()["invariants"].empty());
    CHECK(p.j()["model_conditions"].empty());
}

TEST_CASE("mirror subcommands") {
    std::string m = data("chain_model.json");
    auto b = cli({"mirror", "build", m});
    REQUIRE(b.code == 0);
    CHECK(b.j()["rules"].size() == 18);
    CHECK(b.j()["critical_pairs"].empty());

    auto f = cli({"mirror", "force", m, "--state", "s1", "--formula", "P x", "--val", "x=b.0"});
    REQUIRE(f.code == 0);
    CHECK(f.j()["verdict"] == "true");
    CHECK(f.j()["kripke"] == true);

    auto e = cli({"mirror", "equiv", m, "--depth", "2"});
    REQUIRE(e.code == 0);
    CHECK(e.j()["checked"].get<int>() > 1000);
    CHECK(e.j()["disagreements"].empty());
    CHECK(e.j()["unknowns"].empty());

    // typing quantifier bounds only at the query state breaks the equivalence
    auto q = cli({"mirror", "equiv", m, "--depth", "1", "--type-at-query-state"});
    CHECK(q.code == 1);
    CHECK_FALSE(q.j()["disagreements"].empty());

    // without an embedded signature one is read off the model
    json mj = load(m);
    mj.erase("signature");
    auto inferred = cli({"mirror", "equiv", write("unsigned.json", mj), "--depth", "1"});
    CHECK(inferred.code == 0);
}

TEST_CASE("determinism") {
    for (auto args : std::vector<std::vector<std::string>>{
             {"mirror", "equiv", data("chain_model.json"), "--depth", "1"},
             {"kripke", "countermodel", data("peirce.json"), "--max-states", "2"},
             {"stagesem", "props", "--stage-bound", "4", "Xi A@b A@b"},
             {"illative", "search", "--hyp", "H a", "a => a"}}) {
        auto a = cli(args), b = cli(args);
        CHECK(a.code == b.code);
        CHECK(a.text == b.text);
    }
}
