#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "kmsgraph/io.hpp"
#include "kmsgraph/series.hpp"

using namespace kmsgraph;
using testing::golden;

namespace {

std::set<std::tuple<std::string, std::string, double, double>> arrow_set(const Digraph& g) {
    std::set<std::tuple<std::string, std::string, double, double>> s;
    for (const auto& a : g.arrows()) s.insert({g.name(a.src), g.name(a.dst), a.mult, a.F});
    return s;
}

std::set<std::string> name_set(const Digraph& g) { return {g.names().begin(), g.names().end()}; }

}  // namespace

TEST_CASE("explicit document parses vertices and arrows") {
    auto src = parse_graph(R"({"kind":"explicit","vertices":["v0","v1"],
        "arrows":[{"src":"v0","dst":"v1","F":1},{"src":"v1","dst":"v0","F":1},{"src":"v1","dst":"v1","F":1}]})");
    Digraph g = src.materialize(0);
    CHECK(g.size() == 2);
    CHECK(g.arrow_count() == 3);
    CHECK(g.out(g.require("v1")).size() == 2);
}

TEST_CASE("document errors are schema errors") {
    auto kind_of = [](const std::string& text) {
        try {
            parse_graph(text);
        } catch (const Error& e) {
            return std::string(kind_name(e.kind())) + ":" + e.what();
        }
        return std::string("ok");
    };
    std::string dangling = kind_of(R"({"kind":"explicit","vertices":["a"],"arrows":[{"src":"a","dst":"b"}]})");
    CHECK(dangling.find("schema") == 0);
    CHECK(dangling.find("dangling endpoint") != std::string::npos);
    CHECK(kind_of("{not json").find("schema") == 0);
    CHECK(kind_of(R"({"kind":"explicit","vertices":["a"],"arrows":[{"src":"a","dst":"a","mult":1.5}]})").find("schema") == 0);
    CHECK(kind_of(R"({"kind":"mystery"})").find("schema") == 0);
}

TEST_CASE("pascal truncations") {
    FamilyPtr p = make_family("pascal", json::object());
    Digraph g2 = p->truncate(2);
    CHECK(name_set(g2) == std::set<std::string>{"(1,1)", "(2,1)", "(1,2)", "(3,1)", "(2,2)", "(1,3)"});
    Digraph g4 = p->truncate(4);
    for (const auto& a : g4.arrows()) {
        std::string s = g4.name(a.src), d = g4.name(a.dst);
        int x, y, x2, y2;
        REQUIRE(std::sscanf(s.c_str(), "(%d,%d)", &x, &y) == 2);
        REQUIRE(std::sscanf(d.c_str(), "(%d,%d)", &x2, &y2) == 2);
        CHECK(((x2 == x + 1 && y2 == y) || (x2 == x && y2 == y + 1)));
        CHECK(x2 + y2 <= 6);
    }
    CHECK(g4.size() == 15);
}

TEST_CASE("shallower truncations are induced sub-truncations") {
    for (const char* fam : {"pascal", "dihedral-cayley", "car-phase", "three-exit", "regular-tree"}) {
        FamilyPtr f = make_family(fam, json::object());
        for (int d = 1; d < 5; ++d) {
            Digraph a = f->truncate(d), b = f->truncate(d + 1);
            std::vector<int> keep;
            for (const auto& n : a.names()) {
                REQUIRE(b.contains(n));
                keep.push_back(b.require(n));
            }
            Digraph sub = induced(b, keep);
            CAPTURE(fam);
            CAPTURE(d);
            CHECK(arrow_set(sub) == arrow_set(a));
        }
    }
}

TEST_CASE("car diagram depth 3 has two vertices per level") {
    Digraph g = make_family("car-phase", json{{"alpha", 1.0}})->truncate(3);
    CHECK(g.size() == 7);
    check_bratteli(g);
}

TEST_CASE("finite paths") {
    Digraph g = golden();
    int v0 = g.require("v0"), v1 = g.require("v1");
    FinitePath a = path_through(g, {v0, v1});
    FinitePath b = path_through(g, {v1, v1});
    FinitePath ab = path_concat(a, b);
    CHECK(ab.length() == 2);
    CHECK(ab.F == doctest::Approx(2.0));
    FinitePath id = path_concat(vertex_path(v0), a);
    CHECK(id.arrows == a.arrows);
    CHECK(id.F == a.F);
    CHECK_THROWS_AS(path_concat(b, a), Error);
    CHECK(path_vertices(g, ab) == std::vector<int>{v0, v1, v1});
}

TEST_CASE("ray shifts") {
    RaySpec r = explicit_ray({"a", "b"}, {"c", "d", "e"});
    RaySpec s = shift(r, 3);
    CHECK(s.preamble.empty());
    CHECK(s.block == std::vector<std::string>{"d", "e", "c"});
    CHECK(shift(r, 1).preamble == std::vector<std::string>{"b"});
    CHECK(s.vertices(3) == std::vector<std::string>{"d", "e", "c", "d"});

    FamilyPtr p = make_family("pascal", json::object());
    RaySpec diag = shift(family_ray(p, "diagonal"), 2);
    CHECK(diag.vertex(0) == "(2,2)");
    CHECK(diag.vertex(1) == "(3,2)");
    CHECK(diag.vertex(2) == "(3,3)");
}

TEST_CASE("weight matrix entries") {
    Digraph loop = make_family("single-loop", json::object())->truncate(0);
    CHECK(WeightMatrix(loop, std::log(2.0)).at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    Digraph g = golden();
    auto A = WeightMatrix(g, 0.0).dense();
    CHECK(A == std::vector<std::vector<double>>{{0, 1}, {1, 1}});
    Digraph p = make_family("pascal", json::object())->truncate(5);
    WeightMatrix W(p, 0.8);
    for (int v = 0; v < p.size(); ++v) {
        if (p.boundary(v)) continue;
        auto row = W.row(v);
        CHECK(row.size() == 2);
        for (auto [w, x] : row) CHECK(x == doctest::Approx(std::exp(-0.8)).epsilon(1e-15));
    }
}

TEST_CASE("serialization round trip is byte identical") {
    for (const char* fam : {"pascal", "golden", "three-exit", "car-phase"}) {
        GraphSource src = from_family(fam, json::object());
        std::string once = dump(serialize_graph(src));
        std::string twice = dump(serialize_graph(parse_graph(once)));
        CHECK(once == twice);
        Digraph g = src.materialize(4);
        std::string e1 = dump(digraph_to_json(g));
        CHECK(dump(digraph_to_json(parse_graph(e1).materialize(0))) == e1);
    }
}

TEST_CASE("unknown family and bad params") {
    CHECK_THROWS_AS(make_family("nope", json::object()), Error);
    CHECK_THROWS_AS(make_family("pascal", json{{"u", "x"}}), Error);
    CHECK_THROWS_AS(make_family("three-exit", json{{"d_base", 1.5}}), Error);
}
