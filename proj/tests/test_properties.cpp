#include <doctest.h>

#include <cmath>
#include <deque>
#include <random>

#include "helpers.hpp"
#include "kmsgraph/ends.hpp"
#include "kmsgraph/harmonic.hpp"
#include "kmsgraph/io.hpp"
#include "kmsgraph/martin.hpp"
#include "kmsgraph/spectral.hpp"

using namespace kmsgraph;
using testing::dense_green;
using testing::random_strongly_connected;

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix dense_matrix(const Digraph& g, double beta) {
    Matrix A(g.size(), std::vector<double>(g.size(), 0.0));
    for (const auto& a : g.arrows()) A[a.src][a.dst] += a.mult * std::exp(-beta * a.F);
    return A;
}

// Perron pair of an irreducible nonnegative matrix by power iteration on I + A.
std::pair<double, std::vector<double>> dense_perron(const Matrix& A) {
    size_t n = A.size();
    std::vector<double> x(n, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> y(x);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) y[i] += A[i][j] * x[j];
        double m = *std::max_element(y.begin(), y.end());
        for (auto& v : y) v /= m;
        lambda = m - 1.0;
        x.swap(y);
    }
    return {lambda, x};
}

// beta with dense spectral radius equal to `target`.
double beta_for(const Digraph& g, double target) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        if (dense_perron(dense_matrix(g, mid)).first > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// First-return sum by repeated products that zero the base column.
double dense_first_return(const Digraph& g, double beta, int v, int N) {
    Matrix A = dense_matrix(g, beta);
    std::vector<double> row = A[v];
    double f = 0.0;
    for (int k = 0; k < N; ++k) {
        f += row[v];
        row[v] = 0.0;
        std::vector<double> next(row.size(), 0.0);
        for (size_t i = 0; i < row.size(); ++i)
            for (size_t j = 0; j < row.size(); ++j) next[j] += row[i] * A[i][j];
        row.swap(next);
    }
    return f;
}

FinitePath random_path(const Digraph& g, int v, int len, std::mt19937& rng) {
    const int start = v;
    std::vector<int> arrows;
    for (int i = 0; i < len; ++i) {
        const auto& out = g.out(v);
        if (out.empty() || g.boundary(v)) break;
        int a = out[std::uniform_int_distribution<size_t>(0, out.size() - 1)(rng)];
        arrows.push_back(a);
        v = g.arrow(a).dst;
    }
    return make_path(g, start, arrows);
}

// Vertices of the boundary that lie in I or reach I through vertices outside D.
std::vector<int> oracle_bonding(const Digraph& g, const std::vector<int>& boundary, const std::vector<int>& D,
                                const std::vector<int>& I) {
    std::vector<char> inD(g.size(), 0), inI(g.size(), 0);
    for (int v : D) inD[v] = 1;
    for (int v : I) inI[v] = 1;
    std::vector<int> out;
    for (int v : boundary) {
        bool hit = inI[v] != 0;
        std::vector<char> seen(g.size(), 0);
        std::deque<int> q{v};
        while (!q.empty() && !hit) {
            int x = q.front();
            q.pop_front();
            for (int a : g.out(x)) {
                int y = g.arrow(a).dst;
                if (inI[y]) hit = true;
                if (inD[y] || seen[y]) continue;
                seen[y] = 1;
                q.push_back(y);
            }
        }
        if (hit) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("green function agrees with dense powers on random graphs") {
    std::mt19937 rng(101);
    for (int i = 0; i < 15; ++i) {
        Digraph g = random_strongly_connected(rng);
        double beta = beta_for(g, 0.6);
        int v = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
        int w = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
        SeriesEstimate G = green_function(g, beta, v, w);
        double ref = dense_green(g, beta, v, w, 400);
        CAPTURE(i);
        REQUIRE(G.converged());
        REQUIRE(G.tail_bound);
        CHECK(G.value == doctest::Approx(ref).epsilon(1e-9));
        CHECK(std::fabs(ref - G.value) <= *G.tail_bound + 1e-12 * ref);
    }
}

TEST_CASE("renewal identity on random graphs") {
    std::mt19937 rng(202);
    for (int i = 0; i < 20; ++i) {
        Digraph g = random_strongly_connected(rng);
        double beta = beta_for(g, std::uniform_real_distribution<double>(0.3, 0.9)(rng));
        int v = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
        SeriesEstimate G = green_function(g, beta, v, v);
        SeriesEstimate f = first_return_series(g, beta, v);
        CAPTURE(i);
        REQUIRE(G.converged());
        REQUIRE(f.converged());
        CHECK(f.value == doctest::Approx(dense_first_return(g, beta, v, 600)).epsilon(1e-9));
        CHECK(G.value * (1.0 - f.value) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("entropy matches the dense spectral radius") {
    std::mt19937 rng(303);
    for (int i = 0; i < 8; ++i) {
        Digraph g = random_strongly_connected(rng);
        EntropyEstimate h = gurevich_entropy(g, 0);
        double ref = std::log(dense_perron(dense_matrix(g, 0.0)).first);
        CAPTURE(i);
        CHECK(h.estimate == doctest::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("doob transform of a perron vector is stochastic") {
    std::mt19937 rng(404);
    for (int i = 0; i < 10; ++i) {
        Digraph g = random_strongly_connected(rng);
        double beta = beta_for(g, 1.0);
        std::vector<double> psi = dense_perron(dense_matrix(g, beta)).second;
        DoobMatrix P = doob_transform(g, beta, psi);
        CAPTURE(i);
        for (int v = 0; v < g.size(); ++v) {
            CHECK(P.row_sums[v] == doctest::Approx(1.0).epsilon(1e-9));
            double s = 0.0;
            for (int a : g.out(v)) {
                const Arrow& ar = g.arrow(a);
                s += ar.mult * std::exp(-beta * ar.F) * psi[ar.dst] / psi[v];
            }
            CHECK(P.row_sums[v] == doctest::Approx(s).epsilon(1e-12));
        }
    }
}

TEST_CASE("cylinder measures follow the conformal formula and refine") {
    std::mt19937 rng(505);
    for (int i = 0; i < 10; ++i) {
        Digraph g = random_strongly_connected(rng);
        double beta = beta_for(g, 1.0);
        HarmonicVector m = make_harmonic(g, beta, 0, dense_perron(dense_matrix(g, beta)).second);
        for (int k = 0; k < 5; ++k) {
            int v = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
            FinitePath mu = random_path(g, v, std::uniform_int_distribution<int>(0, 6)(rng), rng);
            double ref = std::exp(-beta * mu.F) * m.values[mu.range];
            CHECK(measure_of_cylinder(g, m, mu) == doctest::Approx(ref).epsilon(1e-12));
            double children = 0.0;
            for (int a : g.out(mu.range)) {
                FinitePath ext = path_concat(mu, make_path(g, mu.range, {a}));
                children += g.arrow(a).mult * measure_of_cylinder(g, m, ext);
            }
            CHECK(children == doctest::Approx(ref).epsilon(1e-9));
            CHECK(refinement_defect(g, m, mu) < 1e-9);
        }
    }
}

TEST_CASE("path potentials add along concatenation") {
    std::mt19937 rng(606);
    for (int i = 0; i < 30; ++i) {
        Digraph g = random_strongly_connected(rng);
        int v = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
        FinitePath a = random_path(g, v, 5, rng);
        FinitePath b = random_path(g, a.range, 4, rng);
        FinitePath ab = path_concat(a, b);
        double F = 0.0;
        for (int x : ab.arrows) F += g.arrow(x).F;
        CHECK(ab.F == doctest::Approx(F).epsilon(1e-14));
        CHECK(ab.F == doctest::Approx(a.F + b.F).epsilon(1e-14));
        CHECK(ab.length() == a.length() + b.length());
        auto vs = path_vertices(g, ab);
        for (size_t k = 0; k < ab.arrows.size(); ++k) {
            CHECK(g.arrow(ab.arrows[k]).src == vs[k]);
            CHECK(g.arrow(ab.arrows[k]).dst == vs[k + 1]);
        }
    }
    CHECK(vertex_path(3).F == 0.0);
}

TEST_CASE("random graphs survive a serialization round trip") {
    std::mt19937 rng(707);
    for (int i = 0; i < 20; ++i) {
        Digraph g = random_strongly_connected(rng);
        json doc = serialize_graph(from_digraph(g));
        std::string text = dump(doc);
        GraphSource back = parse_graph(text);
        CHECK(graph_equal(back.materialize(0), g));
        CHECK(dump(serialize_graph(back)) == text);
    }
}

TEST_CASE("martin kernels are normalized and bounded") {
    std::mt19937 rng(808);
    Digraph g = make_family("pascal", json::object())->truncate(14);
    int v0 = g.require("(1,1)");
    for (int i = 0; i < 10; ++i) {
        double beta = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
        std::vector<double> b = normalization_bounds(g, beta, v0, 14);
        int w = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
        int v = std::uniform_int_distribution<int>(0, g.size() - 1)(rng);
        CHECK(martin_kernel(g, beta, v0, v0, w).value == doctest::Approx(1.0).epsilon(1e-12));
        KernelValue k = martin_kernel(g, beta, v0, v, w);
        CHECK(k.value <= b[v] * (1.0 + 1e-12));
    }
}

TEST_CASE("end fingerprints are coherent under bonding maps") {
    struct Case {
        std::string family, ray;
        long length;
    };
    std::vector<Case> cases{{"pascal", "diagonal", 30},     {"pascal", "t:-1", 30},         {"pascal", "t:2", 30},
                            {"pascal", "alpha:0.3", 30},    {"dihedral-cayley", "right", 30}, {"dihedral-cayley", "left", 30},
                            {"three-exit", "p0", 30},       {"three-exit", "p+", 30},         {"three-exit", "p-", 30},
                            {"ray-graph", "main", 30},      {"car-phase", "left", 30},        {"car-phase", "right", 30},
                            {"regular-tree", "branch:01", 10}};
    for (const auto& c : cases) {
        FamilyPtr f = make_family(c.family, json::object());
        RaySpec r = family_ray(f, c.ray);
        Digraph g = f->truncate(std::max(r.depth_needed(c.length), 10));
        std::vector<int> ray = resolve_ray(g, r, c.length);
        for (int depth = 1; depth <= 6; ++depth) {
            EndApprox e = end_fingerprint(g, g.require(f->base_vertex()), ray, depth);
            CAPTURE(c.family);
            CAPTURE(c.ray);
            CAPTURE(depth);
            CHECK(e.coherent);
            for (int n = 0; n < depth; ++n)
                CHECK(oracle_bonding(g, e.boundary[n], e.D.shells[n], e.fingerprint[n + 1]) == e.fingerprint[n]);
        }
    }
}
