#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "kmsgraph/cli.hpp"
#include "kmsgraph/families.hpp"

using namespace kmsgraph;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body) {
    auto p = std::filesystem::temp_directory_path() / ("kmsgraph_test_" + name);
    std::ofstream(p) << body;
    return p.string();
}

const std::string kGoldenDoc =
    R"({"kind":"explicit","vertices":["v0","v1"],"base_vertex":"v0",)"
    R"("arrows":[{"src":"v0","dst":"v1","F":1},{"src":"v1","dst":"v0","F":1},{"src":"v1","dst":"v1","F":1}]})";
const std::string kGoldenBeta = "0.48121182505930";
const std::string kGoldenPsi = R"({"v0":1,"v1":1.618033988749895})";

}  // namespace

TEST_CASE("verb table matches the command set") {
    std::vector<std::string> expected{"parse", "green", "entropy", "first-return", "classify", "beta-set", "harmonic-verify",
                                      "delta-solve", "martin", "ray-weight", "summability", "extremal-ray", "boundary-test",
                                      "ends", "bratteli-ends", "minimal-end", "almost-undirected", "to-bratteli",
                                      "source-turn", "transfer", "plan-returns", "apply-returns", "attach", "glue", "kms",
                                      "example", "selftest"};
    std::vector<std::string> got;
    for (const auto& v : verb_table()) got.push_back(v.verb);
    CHECK(got == expected);
}

TEST_CASE("every operation is reachable from exactly one verb") {
    std::map<std::string, int> seen;
    for (const auto& v : verb_table())
        for (const auto& op : v.operations) ++seen[op];
    for (const auto& [op, n] : seen) {
        CAPTURE(op);
        CHECK(n == 1);
    }
    for (const char* op : {"green_function", "gurevich_entropy", "first_return_series", "classify_recurrence",
                           "classify_beta_set", "verify_harmonic", "bratteli_decompose", "solve_level_chain",
                           "extend_from_hereditary", "martin_kernel", "ray_weight", "summability",
                           "extremal_measure_along_ray", "boundary_limit_test", "end_fingerprint", "bratteli_ends",
                           "minimal_end_test", "almost_undirected_test", "graph_to_bratteli", "turn_into_source",
                           "transfer_harmonic_source", "plan_return_paths", "apply_return_paths", "attach_finite",
                           "build_glue", "glue_extreme_count", "kms_state_value", "measure_of_cylinder", "doob_transform",
                           "simple_path_sum", "parse_graph"}) {
        CAPTURE(op);
        CHECK(seen.count(op) == 1);
    }
}

TEST_CASE("every verb runs on a representative input") {
    std::string golden = temp_file("golden.json", kGoldenDoc);
    std::string car = R"({"alpha":1})";
    std::string chain = temp_file("chain.json",
                                  R"({"kind":"explicit","vertices":["v0","v1","v2"],"base_vertex":"v0","arrows":[)"
                                  R"({"src":"v0","dst":"v1","F":1},{"src":"v1","dst":"v2","F":1},{"src":"v2","dst":"v2","F":0}]})");
    Run plan = run({"plan-returns", "--family", "ray-graph", "--depth", "20", "--entropy", "0.6931471805599453"});
    REQUIRE(plan.code == 0);
    std::string plan_file = temp_file("plan.json", plan.out);
    std::vector<std::vector<std::string>> cases{
        {"parse", "--graph", golden},
        {"green", "--graph", golden, "--beta", "0.7"},
        {"entropy", "--graph", golden},
        {"first-return", "--graph", golden, "--beta", "0.7", "--vertex", "v1"},
        {"classify", "--graph", golden, "--beta", "0.7"},
        {"beta-set", "--graph", golden},
        {"harmonic-verify", "--graph", golden, "--beta", kGoldenBeta, "--psi", kGoldenPsi, "--doob"},
        {"delta-solve", "--family", "car-phase", "--params", car, "--depth", "24", "--rule", "levels", "--levels", "12", "--beta", "2"},
        {"martin", "--family", "pascal", "--beta", "1", "--from", "(2,1)", "--to", "(3,2)"},
        {"ray-weight", "--family", "ray-graph", "--beta", "1", "--ray", "main", "--length", "5"},
        {"summability", "--family", "car-phase", "--params", car, "--beta", "2", "--ray", "left", "--length", "120"},
        {"extremal-ray", "--family", "ray-graph", "--beta", "1", "--ray", "main", "--length", "20"},
        {"boundary-test", "--family", "pascal", "--beta", "1", "--ray", "alpha:0.5", "--length", "20", "--psi",
         R"J({"(1,1)":1,"(2,1)":1.3591409142295225,"(1,2)":1.3591409142295225})J", "--sample", R"J(["(2,1)","(1,2)"])J"},
        {"ends", "--family", "dihedral-cayley", "--ray", "right", "--ray2", "left", "--length", "30", "--depth", "80"},
        {"bratteli-ends", "--family", "car-phase", "--params", car, "--depth", "6"},
        {"minimal-end", "--family", "pascal", "--ray", "t:1", "--length", "24", "--depth", "30", "--end-depth", "5"},
        {"almost-undirected", "--family", "dihedral-cayley", "--depth", "30"},
        {"to-bratteli", "--family", "pascal", "--depth", "10", "--levels", "4", "--ray", "diagonal", "--length", "8"},
        {"source-turn", "--graph", golden},
        {"transfer", "--graph", chain, "--beta", "1", "--psi", R"({"v0":0.1353352832366127,"v1":0.36787944117144233,"v2":1})",
         "--direction", "forward"},
        {"plan-returns", "--family", "ray-graph", "--depth", "20", "--entropy", "0.6931471805599453"},
        {"apply-returns", "--family", "ray-graph", "--depth", "20", "--plan", "@" + plan_file},
        {"attach", "--family", "ray-graph", "--depth", "4", "--attach",
         R"({"v1":{"graph":{"kind":"family","name":"single-loop"},"anchor":"v"}})"},
        {"glue", "--spec", R"({"diagrams":[{"interval":{"lo":2,"hi":3}}]})", "--depth", "96", "--betas", "1.8,2.5"},
        {"kms", "--graph", golden, "--beta", kGoldenBeta, "--psi", kGoldenPsi, "--mu", "v0,v1", "--nu", "v0,v1"},
        {"example", "golden"},
        {"selftest", "--only", "4"},
    };
    std::set<std::string> covered;
    for (const auto& c : cases) {
        Run r = run(c);
        CAPTURE(c[0]);
        CAPTURE(r.err);
        CHECK(r.code == 0);
        CHECK(!r.out.empty());
        covered.insert(c[0]);
    }
    CHECK(covered.size() == verb_table().size());
}

TEST_CASE("golden green diagonal through the CLI") {
    Run r = run({"green", "--family", "golden", "--beta", "0.6931471805599453", "--from", "v0", "--to", "v0"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["status"] == "converged");
    CHECK(j["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    Run r1 = run({"green", "--family", "golden", "--beta", "0.6931471805599453", "--from", "v1", "--to", "v1"});
    CHECK(json::parse(r1.out)["value"].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("output is deterministic and sorted") {
    std::vector<std::string> args{"summability", "--family", "car-phase", "--params", R"({"alpha":1})", "--beta", "2",
                                  "--ray", "left", "--length", "60"};
    Run a = run(args), b = run(args);
    CHECK(a.out == b.out);
    json j = json::parse(a.out);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    // Shortest round-trip floats.
    Run g = run({"green", "--family", "single-loop", "--beta", "0.6931471805599453"});
    CHECK(g.out.find("\"value\": 2.0") != std::string::npos);
}

TEST_CASE("csv and table formats") {
    Run c = run({"entropy", "--family", "golden", "--format", "csv"});
    REQUIRE(c.code == 0);
    CHECK(c.out.rfind("key,value\n", 0) == 0);
    CHECK(c.out.find("/status,exact") != std::string::npos);
    Run t = run({"entropy", "--family", "golden", "--format", "table"});
    CHECK(t.out.find("/status") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({"green", "--family", "golden"}).code == 2);
    CHECK(run({"green", "--family", "golden", "--beta", "1", "--format", "xml"}).code == 2);
    CHECK(run({"green", "--family", "golden", "--beta", "x"}).code == 2);
    CHECK(run({"green", "--family", "pascal", "--params", "{bad", "--beta", "1"}).code == 2);
    CHECK(run({"green", "--family", "golden", "--beta", "1", "--to", "nowhere"}).code == 2);
    CHECK(run({"green", "--beta", "1"}).code == 2);
    Run missing = run({"green", "--family", "golden"});
    CHECK(missing.err.find("--beta") != std::string::npos);

    std::vector<std::string> slow{"green", "--family", "dihedral-cayley", "--beta", "0.7", "--depth", "8"};
    CHECK(run(slow).code == 0);
    auto strict = slow;
    strict.push_back("--strict");
    CHECK(run(strict).code == 3);
    CHECK(run({"green", "--family", "single-loop", "--beta", "0", "--strict"}).code == 0);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("pascal boundary example reports a table") {
    Run r = run({"example", "pascal-boundary", "--alpha", "0.3", "--beta", "1.0", "--format", "json"});
    json j = json::parse(r.out);
    CHECK(j["rows"].size() == 6);
    CHECK(j["monotone"] == true);
    CHECK(r.code == (j["pass"].get<bool>() ? 0 : 1));
    CHECK(run({"example", "no-such-preset"}).code == 2);
}
