#include <doctest.h>

#include "helpers.hpp"
#include "kmsgraph/acceptance.hpp"
#include "kmsgraph/martin.hpp"
#include "kmsgraph/spectral.hpp"

using namespace kmsgraph;

namespace {

std::vector<int> family_prefix(const std::string& fam, const json& params, const std::string& ray, long n, Digraph& g) {
    FamilyPtr f = make_family(fam, params);
    RaySpec r = family_ray(f, ray);
    g = f->truncate(std::max(r.depth_needed(n), 8));
    return resolve_ray(g, r, n);
}

}  // namespace

TEST_CASE("pascal martin kernel") {
    Digraph g = make_family("pascal", json::object())->truncate(8);
    for (double b : {0.5, 1.0, 2.0}) {
        KernelValue k = martin_kernel(g, b, g.require("(1,1)"), g.require("(2,1)"), g.require("(3,2)"));
        CHECK(k.value == doctest::Approx(2.0 / 3.0 * std::exp(b)).epsilon(1e-13));
        // General closed form C(n+m-3, n-2) / C(n+m-2, n-1) e^beta at (5,4).
        KernelValue k2 = martin_kernel(g, b, g.require("(1,1)"), g.require("(2,1)"), g.require("(5,4)"));
        CHECK(k2.value == doctest::Approx(20.0 / 35.0 * std::exp(b)).epsilon(1e-13));
    }
}

TEST_CASE("martin column agrees with pointwise kernels") {
    Digraph g = make_family("pascal", json::object())->truncate(8);
    WeightMatrix W(g, 0.8);
    int v0 = g.require("(1,1)"), w = g.require("(4,4)");
    auto col = martin_column(g, W, v0, w);
    for (const char* v : {"(1,1)", "(2,1)", "(3,2)", "(1,4)"})
        CHECK(col[g.require(v)] == doctest::Approx(martin_kernel(g, 0.8, v0, g.require(v), w).value).epsilon(1e-12));
}

TEST_CASE("ray weights") {
    Digraph g;
    auto single = family_prefix("ray-graph", json::object(), "main", 0, g);
    CHECK(ray_weight(g, 1.0, single).value == 1.0);
    for (long n : {1L, 5L, 12L}) {
        auto prefix = family_prefix("ray-graph", json::object(), "main", n, g);
        RayWeight w = ray_weight(g, 0.7, prefix);
        CHECK(w.log_value == doctest::Approx(-0.7 * n).epsilon(1e-14));
        CHECK(!w.capped);
    }
}

TEST_CASE("car green function along the left ray is a product of level factors") {
    Digraph g;
    auto prefix = family_prefix("car-phase", json{{"alpha", 1.0}}, "left", 12, g);
    double b = 1.5;
    double prod = 1.0;
    for (size_t k = 1; k < prefix.size(); ++k) {
        // Level k-1 -> k: direct arrow F = 1, crossing arrow F = ln(k-1) for k >= 2.
        prod *= k == 1 ? std::exp(-b) : std::exp(-b) + std::exp(-b * std::log(static_cast<double>(k - 1)));
        CHECK(green_function(g, b, prefix[0], prefix[k]).value == doctest::Approx(prod).epsilon(1e-12));
    }
}

TEST_CASE("car summability verdicts") {
    Digraph g;
    auto ray = family_prefix("car-phase", json{{"alpha", 1.0}}, "left", 200, g);
    SummabilityReport cold = summability(g, 2.0, g.require("v0"), ray);
    CHECK(cold.verdict == "summable");
    REQUIRE(cold.psi);
    // Harmonic away from the far end of the prefix.
    WeightMatrix W(g, 2.0);
    const auto& psi = cold.psi->values;
    double worst = 0.0;
    for (int v = 0; v < g.size(); ++v) {
        if (g.level(v) > 100 || std::isnan(psi[v])) continue;
        double s = 0.0;
        for (auto [w, x] : W.row(v)) s += x * psi[w];
        worst = std::max(worst, std::fabs(s - psi[v]) / psi[v]);
    }
    CHECK(worst < 1e-8);
    SummabilityReport hot = summability(g, 0.5, g.require("v0"), ray);
    CHECK(hot.verdict == "not_summable");
    CHECK(!hot.psi);
}

TEST_CASE("dihedral summability limit equals the green diagonal") {
    FamilyPtr f = make_family("dihedral-cayley", json::object());
    Digraph g = f->truncate(160);
    auto ray = resolve_ray(g, family_ray(f, "right"), 30);
    for (double b : {1.0, 2.0}) {
        SummabilityReport s = summability(g, b, ray[0], ray);
        REQUIRE(s.verdict == "summable");
        double diag = green_function(g, b, ray[0], ray[0]).value;
        CHECK(std::exp(s.log_limit) == doctest::Approx(diag).epsilon(1e-9));
    }
}

TEST_CASE("extremal measure on the ray graph") {
    Digraph g;
    auto ray = family_prefix("ray-graph", json::object(), "main", 30, g);
    double b = 0.6;
    HarmonicVector h = extremal_measure_along_ray(g, b, ray[0], ray);
    for (int k = 0; k < 10; ++k) CHECK(h.values[ray[k]] == doctest::Approx(std::exp(k * b)).epsilon(1e-12));

    Digraph c;
    auto car = family_prefix("car-phase", json{{"alpha", 1.0}}, "left", 200, c);
    CHECK_THROWS_AS(extremal_measure_along_ray(c, 0.5, c.require("v0"), car), Error);
}

TEST_CASE("boundary limits of an extremal measure on its own ray") {
    Digraph g;
    auto ray = family_prefix("car-phase", json{{"alpha", 1.0}}, "left", 120, g);
    HarmonicVector m = extremal_measure_along_ray(g, 2.0, g.require("v0"), ray);
    std::vector<int> sample{g.require("L1:0"), g.require("L1:1"), g.require("L2:0")};
    BoundaryLimitReport r = boundary_limit_test(g, 2.0, g.require("v0"), ray, m, sample, {30, 60, 120});
    CHECK(r.verdict == "consistent");
}

TEST_CASE("pascal boundary limits approach the alpha vector") {
    Digraph g;
    auto ray = family_prefix("pascal", json::object(), "alpha:0.3", 80, g);
    HarmonicVector m = make_harmonic(g, 1.0, g.require("(1,1)"), pascal_alpha_vector(g, 0.3, 1.0));
    std::vector<int> sample{g.require("(2,2)"), g.require("(3,1)")};
    BoundaryLimitReport r = boundary_limit_test(g, 1.0, g.require("(1,1)"), ray, m, sample, {20, 40, 80});
    CHECK(r.monotone);
    // Deviations shrink roughly like 1/k.
    for (size_t i = 0; i < sample.size(); ++i) CHECK(r.deviation[i][2] < 0.6 * r.deviation[i][0]);
}
