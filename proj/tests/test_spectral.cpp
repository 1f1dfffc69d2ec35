#include <doctest.h>

#include "helpers.hpp"
#include "kmsgraph/spectral.hpp"
#include "kmsgraph/transform.hpp"

using namespace kmsgraph;
using testing::golden;
using testing::kPhi;

TEST_CASE("single loop green function") {
    Digraph g = make_family("single-loop", json::object())->truncate(0);
    SeriesEstimate G = green_function(g, std::log(2.0), 0, 0);
    REQUIRE(G.converged());
    // Oracle: 64-term partial sum plus the exact geometric remainder 2^-63.
    double oracle = testing::dense_green(g, std::log(2.0), 0, 0, 64) + std::ldexp(1.0, -63);
    CHECK(G.value == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(std::fabs(G.value - 2.0) <= std::max(G.tail_bound.value_or(0.0), 1e-14));
    CHECK(green_function(g, 0.0, 0, 0).status == SeriesStatus::diverged);
}

TEST_CASE("pascal green function has a single term") {
    Digraph g = make_family("pascal", json::object())->truncate(6);
    SeriesEstimate G = green_function(g, std::log(2.0), g.require("(1,1)"), g.require("(2,2)"));
    REQUIRE(G.converged());
    CHECK(G.value == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("golden green diagonals follow the renewal identity") {
    Digraph g = golden();
    double b = std::log(2.0);
    // First returns: 1/2 at v0, 3/4 at v1.
    CHECK(first_return_series(g, b, 0).value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(first_return_series(g, b, 1).value == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(green_function(g, b, 0, 0).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(green_function(g, b, 1, 1).value == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(green_function(g, b, 0, 1).value == doctest::Approx(testing::dense_green(g, b, 0, 1, 400)).epsilon(1e-12));
}

TEST_CASE("first return series") {
    Digraph loop = make_family("single-loop", json::object())->truncate(0);
    for (double b : {0.0, 0.5, 2.0}) CHECK(first_return_series(loop, b, 0).value == doctest::Approx(std::exp(-b)));
    Digraph g = golden();
    CHECK(first_return_series(g, std::log(kPhi), 1).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gurevich entropy") {
    Digraph two = make_family("single-loop", json{{"N", 2}})->truncate(0);
    CHECK(gurevich_entropy(two, 0).estimate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    Digraph one = make_family("single-loop", json::object())->truncate(0);
    CHECK(std::fabs(gurevich_entropy(one, 0).estimate) < 1e-12);
    EntropyEstimate e = gurevich_entropy(golden(), 0);
    CHECK(e.estimate == doctest::Approx(std::log(kPhi)).epsilon(1e-12));
    CHECK(e.lower_bound <= e.estimate + 1e-12);
    CHECK(e.status == "exact");
}

TEST_CASE("recurrence classification") {
    Digraph g = golden();
    CHECK(classify_recurrence(g, std::log(2.0), 0).verdict == Recurrence::transient);
    CHECK(classify_recurrence(g, std::log(kPhi), 0).verdict == Recurrence::recurrent);
    Digraph p = make_family("pascal", json::object())->truncate(12);
    for (double b : {0.1, 1.0, 3.0}) CHECK(classify_recurrence(p, b, p.require("(1,1)")).verdict == Recurrence::transient);
}

TEST_CASE("inverse temperature sets") {
    TemperatureClassification t = classify_beta_set(golden());
    CHECK(t.shape == "singleton");
    REQUIRE(t.beta0);
    CHECK(*t.beta0 == doctest::Approx(std::log(kPhi)).epsilon(1e-9));

    CHECK(classify_beta_set(make_family("ray-graph", json::object())->truncate(12)).shape == "all_reals");

    Digraph g0 = make_family("ray-graph", json::object())->truncate(20);
    ReturnPathPlan plan = plan_return_paths(g0, g0.require("v0"), std::log(2.0));
    Digraph gamma = apply_return_paths(g0, plan).gamma;
    TemperatureClassification r = classify_beta_set(gamma);
    CHECK(r.shape == "half_line_right");
    REQUIRE(r.beta0);
    CHECK(*r.beta0 == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("strongly connected components and loop component") {
    Digraph g = testing::make_graph({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "a"}, {"b", "c"}, {"c", "d"}, {"d", "c"}});
    auto comps = strongly_connected_components(g);
    CHECK(comps.size() == 2);
    auto lc = loop_component(g, g.require("c"));
    std::sort(lc.begin(), lc.end());
    CHECK(lc == std::vector<int>{g.require("c"), g.require("d")});
}

TEST_CASE("perron value of the golden matrix") {
    Digraph g = golden();
    WeightMatrix W(g, 0.0);
    PerronResult p = perron(W, {0, 1});
    REQUIRE(p.converged);
    CHECK(p.value == doctest::Approx(kPhi).epsilon(1e-12));
    CHECK(p.lower <= p.value);
    CHECK(p.upper >= p.value);
    CHECK(p.vector[1] == doctest::Approx(1.0));
    CHECK(p.vector[0] == doctest::Approx(1.0 / kPhi).epsilon(1e-12));
}

TEST_CASE("series tracker statuses") {
    SeriesControls c;
    SeriesTracker geo(c);
    for (int n = 0; n < 200 && !geo.settled(); ++n) geo.add(std::pow(0.5, n));
    SeriesEstimate e = geo.finish(false);
    CHECK(e.converged());
    CHECK(e.value == doctest::Approx(2.0).epsilon(1e-14));

    SeriesTracker grow(c);
    for (int n = 0; n < 200 && !grow.settled(); ++n) grow.add(std::pow(1.2, n));
    CHECK(grow.finish(false).status == SeriesStatus::diverged);

    // Harmonic terms shrink too slowly to settle within the cap.
    SeriesControls small = c;
    small.max_power = 64;
    SeriesTracker slow(small);
    for (int n = 1; n <= 64; ++n) slow.add(1.0 / n);
    CHECK(slow.finish(false).status != SeriesStatus::converged);
}
