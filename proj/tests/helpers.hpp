#pragma once

#include <cmath>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "kmsgraph/families.hpp"
#include "kmsgraph/graph.hpp"

namespace testing {

using kmsgraph::Digraph;

struct E {
    std::string src, dst;
    double mult = 1.0;
    double F = 1.0;
};

inline Digraph make_graph(const std::vector<std::string>& vs, const std::vector<E>& es) {
    Digraph g;
    for (const auto& v : vs) g.add_vertex(v);
    for (const auto& e : es) g.add_arrow(e.src, e.dst, e.mult, e.F);
    g.base = 0;
    return g;
}

inline Digraph golden() { return make_graph({"v0", "v1"}, {{"v0", "v1"}, {"v1", "v0"}, {"v1", "v1"}}); }

inline const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

// Dense sum of A(beta)^n_{v,w} for n < N, by repeated matrix-vector products.
inline double dense_green(const Digraph& g, double beta, int v, int w, int N) {
    int n = g.size();
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (const auto& a : g.arrows()) A[a.src][a.dst] += a.mult * std::exp(-beta * a.F);
    std::vector<double> row(n, 0.0);
    row[v] = 1.0;
    long double total = 0.0L;
    for (int k = 0; k < N; ++k) {
        total += row[w];
        std::vector<double> next(n, 0.0);
        for (int i = 0; i < n; ++i)
            if (row[i] != 0.0)
                for (int j = 0; j < n; ++j) next[j] += row[i] * A[i][j];
        row.swap(next);
    }
    return static_cast<double>(total);
}

// Strongly connected: a Hamiltonian cycle plus random chords.
inline Digraph random_strongly_connected(std::mt19937& rng, int n_lo = 3, int n_hi = 7) {
    int n = std::uniform_int_distribution<int>(n_lo, n_hi)(rng);
    std::uniform_real_distribution<double> Fd(0.5, 2.0);
    std::uniform_int_distribution<int> pick(0, n - 1), mult(1, 3);
    Digraph g;
    for (int i = 0; i < n; ++i) g.add_vertex("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) g.add_arrow(i, (i + 1) % n, mult(rng), Fd(rng));
    int extra = std::uniform_int_distribution<int>(0, 2 * n)(rng);
    for (int j = 0; j < extra; ++j) g.add_arrow(pick(rng), pick(rng), mult(rng), Fd(rng));
    g.base = 0;
    return g;
}

}  // namespace testing
