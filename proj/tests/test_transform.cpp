#include <doctest.h>

#include "helpers.hpp"
#include "kmsgraph/harmonic.hpp"
#include "kmsgraph/spectral.hpp"
#include "kmsgraph/transform.hpp"

using namespace kmsgraph;
using testing::golden;

namespace {

struct ReturnGraph {
    Digraph g0;
    ReturnPathPlan plan;
    Digraph gamma;
};

ReturnGraph ray_return_graph(double h = std::log(2.0)) {
    ReturnGraph r;
    r.g0 = make_family("ray-graph", json::object())->truncate(20);
    r.plan = plan_return_paths(r.g0, r.g0.require("v0"), h);
    r.gamma = apply_return_paths(r.g0, r.plan).gamma;
    return r;
}

}  // namespace

TEST_CASE("simple path sum on the golden graph") {
    Digraph g = golden();
    double b = std::log(2.0);
    SeriesEstimate R = simple_path_sum(g, b, 0, 0);
    REQUIRE(R.converged());
    CHECK(R.value == doctest::Approx(std::exp(-2 * b) / (1 - std::exp(-b))).epsilon(1e-12));
    CHECK(R.value == doctest::Approx(first_return_series(g, b, 0).value).epsilon(1e-12));
}

TEST_CASE("source turning") {
    Digraph g = golden();
    Digraph t = turn_into_source(g, 0);
    CHECK(t.size() == 2);
    CHECK(t.arrow_count() == 2);
    CHECK(t.in(t.require("v0")).empty());
    CHECK(t.out(t.require("v1")).size() == 1);

    // Deleting a -> v0 strands a; it is pruned.
    Digraph h = testing::make_graph({"v0", "a", "b"}, {{"v0", "a"}, {"a", "v0"}, {"v0", "b"}, {"b", "b"}});
    Digraph th = turn_into_source(h, 0);
    CHECK(!th.contains("a"));
    CHECK(th.contains("b"));

    ReturnGraph r = ray_return_graph();
    CHECK(graph_equal(turn_into_source(r.gamma, r.gamma.require("v0")), r.g0));
}

TEST_CASE("return path plans") {
    ReturnGraph r = ray_return_graph();
    REQUIRE(r.plan.entries.size() >= 5);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(r.plan.entries[i].alpha == doctest::Approx(std::ldexp(1.0, -static_cast<int>(i) - 1)).epsilon(1e-14));
        CHECK(r.plan.entries[i].mult == 2.0);
        CHECK(r.plan.entries[i].length == 1);
    }
    CHECK(r.plan.mass == doctest::Approx(1.0).epsilon(1e-12));
    ReturnPathPlan back = plan_from_json(plan_to_json(r.plan));
    CHECK(plan_to_json(back) == plan_to_json(r.plan));

    Digraph te = make_family("three-exit", json{{"d_base", 2}})->truncate(20);
    ReturnPathPlan p = plan_return_paths(te, te.require("v0"), 1.5);
    CHECK(p.mass == doctest::Approx(1.0).epsilon(1e-12));
    // A triple loop below v0 grows like 3^n, so h < ln 3 is too small.
    Digraph loops = testing::make_graph({"v0", "a", "b"}, {{"v0", "a"}, {"a", "a", 3}, {"a", "b"}, {"b", "b"}});
    CHECK_THROWS_AS(plan_return_paths(loops, 0, 1.0), Error);
    CHECK(plan_return_paths(loops, 0, 1.2).mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(plan_return_paths(r.g0, 0, -1.0), Error);
}

TEST_CASE("return path graphs have the planned entropy") {
    ReturnGraph r = ray_return_graph();
    int v0 = r.gamma.require("v0");
    double h = std::log(2.0);
    CHECK(first_return_series(r.gamma, h, v0).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(classify_recurrence(r.gamma, h + 0.1, v0).verdict == Recurrence::transient);
    CHECK(gurevich_entropy(r.gamma, v0).estimate == doctest::Approx(h).epsilon(1e-6));
    CHECK_THROWS_AS(apply_return_paths(r.gamma, r.plan), Error);
}

TEST_CASE("loop mode keeps a loop at the base") {
    Digraph g0 = make_family("ray-graph", json::object())->truncate(20);
    ReturnPathPlan p = plan_return_paths(g0, g0.require("v0"), std::log(2.0), "recurrent_with_loop");
    CHECK(p.loop);
    ReturnPathGraphs out = apply_return_paths(g0, p);
    REQUIRE(out.gamma_prime);
    CHECK(out.gamma.arrow_count() == out.gamma_prime->arrow_count() + 1);
    CHECK(first_return_series(out.gamma, std::log(2.0), out.gamma.require("v0")).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("harmonic transfer across source turning") {
    ReturnGraph r = ray_return_graph();
    double b = 1.2;
    Digraph turned = turn_into_source(r.gamma, r.gamma.require("v0"));
    std::vector<double> psi(turned.size());
    for (int v = 0; v < turned.size(); ++v) psi[v] = std::exp(b * std::stoi(turned.name(v).substr(1)));
    SourceTransfer inv = transfer_harmonic_source(r.gamma, b, r.gamma.require("v0"), psi, "inverse");
    CHECK(verify_harmonic(r.gamma, b, inv.psi.values).max_residual < 1e-9);
    SourceTransfer fwd = transfer_harmonic_source(r.gamma, b, r.gamma.require("v0"), inv.psi.values, "forward");
    for (int v = 0; v < fwd.graph.size(); ++v) {
        if (std::isnan(fwd.psi.values[v])) continue;
        int k = std::stoi(fwd.graph.name(v).substr(1));
        CHECK(fwd.psi.values[v] == doctest::Approx(std::exp(b * k)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(transfer_harmonic_source(golden(), std::log(2.0), 0, {1.0, testing::kPhi}, "forward"), Error);
    CHECK_THROWS_AS(transfer_harmonic_source(r.gamma, b, 0, psi, "sideways"), Error);
}

TEST_CASE("attaching loops") {
    Digraph ray = make_family("ray-graph", json::object())->truncate(6);
    Digraph loop = make_family("single-loop", json::object())->truncate(0);
    std::map<std::string, Attachment> as;
    for (const auto& n : ray.names())
        if (!ray.boundary(ray.require(n))) as[n] = Attachment{loop, loop.name(0)};
    Digraph out = attach_finite(ray, as);
    CHECK(out.size() == ray.size());
    CHECK(out.arrow_count() == ray.arrow_count() + static_cast<int>(as.size()));
    CHECK(gurevich_entropy(out, out.require("v2")).estimate >= -1e-12);
    Digraph chain = testing::make_graph({"a", "b"}, {{"a", "b"}});
    CHECK_THROWS_AS(attach_finite(ray, {{"v0", Attachment{chain, "a"}}}), Error);
}

TEST_CASE("glue spine without diagrams") {
    GlueGraph gg = build_glue(GlueSpec{}, 20);
    CHECK(gg.diagrams.empty());
    double b = 0.8;
    std::vector<double> psi(gg.graph.size(), std::nan(""));
    for (size_t j = 0; j < gg.spine.size(); ++j) psi[gg.spine[j]] = std::exp(b * static_cast<double>(j));
    CHECK(verify_harmonic(gg.graph, b, psi).max_residual < 1e-12);
    CHECK(glue_extreme_count(gg, b).extreme_count == 1);
}

TEST_CASE("glue feasibility follows the interval") {
    GlueSpec spec = glue_spec_from_json(json{{"diagrams", json::array({{{"interval", {{"lo", 2.0}, {"hi", 3.0}}}}})}});
    CHECK(glue_spec_from_json(glue_spec_to_json(spec)).diagrams.size() == 1);
    GlueGraph gg = build_glue(spec, 96);
    for (auto [beta, inside] : std::vector<std::pair<double, bool>>{{1.8, false}, {2.0, true}, {2.5, true}, {3.0, true}, {3.2, false}}) {
        CAPTURE(beta);
        GlueCount c = glue_extreme_count(gg, beta);
        CHECK((c.feasible[0] != 0) == inside);
        CHECK(c.extreme_count == 1 + (inside ? 1 : 0));
        auto [s1, s2] = glue_series(gg.diagrams[0].seq, beta);
        CHECK(((s1 == SeriesStatus::converged) && (s2 == SeriesStatus::converged)) == inside);
    }
    GlueGraph none = build_glue(glue_spec_from_json(json{{"diagrams", json::array({{{"interval", {{"lo", 3.0}, {"hi", 2.0}}}}})}}), 96);
    for (double beta : {2.0, 2.5, 3.0}) CHECK(glue_extreme_count(none, beta).extreme_count == 1);
    CHECK_THROWS_AS(glue_spec_from_json(json{{"diagrams", json::array({{{"interval", {{"lo", 0.1}, {"hi", 2.0}}}}})}}), Error);
}
