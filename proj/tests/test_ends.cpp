#include <doctest.h>

#include "helpers.hpp"
#include "kmsgraph/ends.hpp"
#include "kmsgraph/io.hpp"
#include "kmsgraph/martin.hpp"
#include "kmsgraph/transform.hpp"

using namespace kmsgraph;

namespace {

struct RayCase {
    Digraph g;
    std::vector<int> ray;
};

RayCase family_ray_case(const std::string& fam, const std::string& ray, long n, int min_depth = 8) {
    FamilyPtr f = make_family(fam, json::object());
    RaySpec r = family_ray(f, ray);
    RayCase c;
    c.g = f->truncate(std::max(r.depth_needed(n), min_depth));
    c.ray = resolve_ray(c.g, r, n);
    return c;
}

std::vector<char> mask(const Digraph& g, const std::vector<std::string>& names) {
    std::vector<char> F(g.size(), 0);
    for (const auto& n : names) F[g.require(n)] = 1;
    return F;
}

}  // namespace

TEST_CASE("reachability avoiding a set") {
    Digraph p = make_family("pascal", json::object())->truncate(6);
    CHECK(reaches_avoiding(p, p.require("(1,1)"), p.require("(3,2)"), mask(p, {"(1,1)"})));
    CHECK(!reaches_avoiding(p, p.require("(1,1)"), p.require("(3,2)"), mask(p, {"(2,1)", "(1,2)"})));
    Digraph g = testing::golden();
    CHECK(reaches_avoiding(g, 0, 1, mask(g, {"v1"})));
    Digraph ray = make_family("ray-graph", json::object())->truncate(8);
    CHECK(!reaches_avoiding(ray, ray.require("v5"), ray.require("v3"), mask(ray, {})));
}

TEST_CASE("pascal fingerprints") {
    RayCase t1 = family_ray_case("pascal", "t:1", 24);
    EndApprox e = end_fingerprint(t1.g, t1.g.require("(1,1)"), t1.ray, 5);
    for (int n = 1; n <= 5; ++n) CHECK(t1.g.name(e.fingerprint[n].at(0)) == "(1," + std::to_string(n + 1) + ")");
    CHECK(e.coherent);

    RayCase t2 = family_ray_case("pascal", "t:2", 24, 30);
    RayCase t0 = family_ray_case("pascal", "t:0", 24, 30);
    EndApprox e0 = end_fingerprint(t0.g, t0.g.require("(1,1)"), t0.ray, 5);
    EndApprox e2 = end_fingerprint(t2.g, t2.g.require("(1,1)"), t2.ray, 5);
    CHECK(!same_end(t0.g, e0, t2.g, e2));
    CHECK(e0.fingerprint[3] != e2.fingerprint[3]);
}

TEST_CASE("dihedral ends") {
    FamilyPtr f = make_family("dihedral-cayley", json::object());
    Digraph g = f->truncate(80);
    int t0 = g.require("t0");
    auto right = resolve_ray(g, family_ray(f, "right"), 30);
    auto left = resolve_ray(g, family_ray(f, "left"), 30);
    auto right_late = resolve_ray(g, shift(family_ray(f, "right"), 3), 30);
    EndApprox er = end_fingerprint(g, t0, right, 6), el = end_fingerprint(g, t0, left, 6);
    EndApprox er3 = end_fingerprint(g, t0, right_late, 6);
    CHECK(!same_end(g, er, g, el));
    CHECK(same_end(g, er, g, er3));
    CHECK(minimal_end_test(g, er, 6).verdict == Minimality::minimal);
    CHECK(minimal_end_test(g, el, 6).verdict == Minimality::minimal);
}

TEST_CASE("pascal minimal ends") {
    for (auto [ray, verdict] : std::vector<std::pair<std::string, Minimality>>{
             {"t:1", Minimality::minimal}, {"t:-1", Minimality::minimal}, {"t:0", Minimality::not_minimal}, {"t:2", Minimality::not_minimal}}) {
        RayCase c = family_ray_case("pascal", ray, 24, 30);
        EndApprox e = end_fingerprint(c.g, c.g.require("(1,1)"), c.ray, 5);
        CAPTURE(ray);
        CHECK(minimal_end_test(c.g, e, 3).verdict == verdict);
    }
}

TEST_CASE("bonding maps are coherent") {
    RayCase c = family_ray_case("three-exit", "p+", 24, 12);
    EndApprox e = end_fingerprint(c.g, c.g.require("v0"), c.ray, 6);
    for (int n = 0; n < 6; ++n) CHECK(bonding_map(c.g, e, n, e.fingerprint[n + 1]) == e.fingerprint[n]);
}

TEST_CASE("bratteli ends") {
    Digraph car = make_family("car-phase", json{{"alpha", 1.0}})->truncate(12);
    BratteliEnds b = bratteli_ends(car, 6, 2, 4);
    CHECK(b.ideals.size() == 1);
    CHECK(b.stabilized);
    for (const auto& I : b.ideals) CHECK(I.valid());

    Digraph two = parse_graph(R"({"kind":"bratteli","levels":[{"vertices":["r"]},{"vertices":["a1","b1"]},{"vertices":["a2","b2"]}],
        "level_arrows":[[{"src_idx":0,"dst_idx":0},{"src_idx":0,"dst_idx":1}],[{"src_idx":0,"dst_idx":0},{"src_idx":1,"dst_idx":1}]],
        "tail":{"rule":"repeat"}})")
                      .materialize(12);
    BratteliEnds t = bratteli_ends(two, 6, 2, 4);
    CHECK(t.ideals.size() == 2);
    CHECK(t.stabilized);
    for (const auto& I : t.ideals) CHECK(minimal_end_test(two, I, 4).verdict == Minimality::minimal);
    CHECK_THROWS_AS(bratteli_ends(testing::golden(), 2, 1, 1), Error);
}

TEST_CASE("almost undirected") {
    Digraph d = make_family("dihedral-cayley", json::object())->truncate(40);
    AlmostUndirected a = almost_undirected_test(d, 3);
    CHECK(a.yes);
    CHECK(a.N <= 3);
    Digraph loop = make_family("single-loop", json::object())->truncate(0);
    AlmostUndirected l = almost_undirected_test(loop, 3);
    CHECK(l.yes);
    CHECK(l.N == 1);
    Digraph ray = make_family("ray-graph", json::object())->truncate(10);
    CHECK(!almost_undirected_test(ray, 3).yes);
}

TEST_CASE("graph to bratteli") {
    Digraph p = make_family("pascal", json::object())->truncate(10);
    BratteliReduction r = graph_to_bratteli(p, p.require("(1,1)"), "bfs", 5);
    check_bratteli(r.diagram);
    // Levels are anti-diagonals; each vertex emits to its two lower neighbours.
    for (int v = 0; v < r.diagram.size(); ++v) {
        int lv = r.diagram.level(v);
        if (lv < 0 || lv >= 4) continue;
        CHECK(r.diagram.out(v).size() == 2);
        for (int a : r.diagram.out(v)) CHECK(r.diagram.arrow(a).mult == 1.0);
    }
    FamilyPtr f = make_family("pascal", json::object());
    auto diag = resolve_ray(p, family_ray(f, "diagonal"), 8);
    auto pi = project_ray(p, r.decomposition.D, diag, 4);
    REQUIRE(pi.size() >= 4);
    CHECK(p.name(pi[0]) == "(1,1)");
    CHECK(p.name(pi[1]) == "(2,1)");
    CHECK(p.name(pi[2]) == "(2,2)");
    CHECK(p.name(pi[3]) == "(3,2)");
}

TEST_CASE("attaching finite graphs keeps fingerprints") {
    FamilyPtr f = make_family("pascal", json::object());
    Digraph p = f->truncate(20);
    Digraph gold = testing::golden();
    Digraph q = attach_finite(p, {{"(1,1)", Attachment{gold, "v0"}}});
    CHECK(q.size() == p.size() + 1);  // the anchor is identified with (1,1)
    auto ray_p = resolve_ray(p, family_ray(f, "t:1"), 12);
    auto ray_q = resolve_ray(q, family_ray(f, "t:1"), 12);
    EndApprox a = end_fingerprint(p, p.require("(1,1)"), ray_p, 4);
    EndApprox b = end_fingerprint(q, q.require("(1,1)"), ray_q, 4);
    for (int n = 0; n <= 4; ++n) {
        std::vector<std::string> na, nb;
        for (int v : a.fingerprint[n]) na.push_back(p.name(v));
        for (int v : b.fingerprint[n]) nb.push_back(q.name(v));
        CHECK(na == nb);
    }
    CHECK(graph_equal(attach_finite(p, {}), p));
}
