#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kmsgraph/graph.hpp"
#include "kmsgraph/harmonic.hpp"

namespace kmsgraph {

// A path v -> w whose interior vertices avoid F (length 0 if v == w); w itself may lie in F.
bool reaches_avoiding(const Digraph& g, int v, int w, const std::vector<char>& F);
// Vertices reachable from v by paths whose vertices after the first avoid F.
std::vector<char> reach_set_avoiding(const Digraph& g, int v, const std::vector<char>& F);

struct EndApprox {
    Exhaustion D;
    std::vector<std::vector<int>> boundary;     // ∂D_n
    std::vector<std::vector<int>> fingerprint;  // I_n ⊆ ∂D_n, sorted
    int depth = 0;
    bool coherent = true;
};

struct EndControls {
    std::string rule = "bfs";
    int escape_horizon = 3;
    int late = 3;  // ray vertices used as the far tail
};

// I_n = {v ∈ ∂D_n : v reaches one of the last ray vertices avoiding D_n}.
EndApprox end_fingerprint(const Digraph& g, int v0, const std::vector<int>& ray, int depth, const EndControls& ctl = {});
// π_{D_{n+1},D_n}(I): vertices of ∂D_n in I or reaching I avoiding D_n.
std::vector<int> bonding_map(const Digraph& g, const EndApprox& e, int n, const std::vector<int>& I);
// Name-level equality of fingerprints up to the common depth.
bool same_end(const Digraph& g, const EndApprox& a, const Digraph& h, const EndApprox& b);
// True when no arrow shortcuts a subpath of length >= 2.
bool is_reduced_prefix(const Digraph& g, const std::vector<int>& ray);

struct IdealSet {
    std::vector<std::vector<int>> levels;  // I ∩ Br_n, sorted, n = 0..depth
    std::vector<int> complement_top;       // Br_depth minus I
    bool proper = false;
    bool hereditary = false;
    bool saturated = false;
    bool condition_d = false;
    bool valid() const { return proper && hereditary && saturated && condition_d; }
};

struct BratteliEnds {
    std::vector<IdealSet> ideals;  // at the deepest tested level
    std::vector<int> counts;       // per tested depth
    bool stabilized = false;
    int depth = 0;
};

// Ideal sets satisfying a)-d) with complements fixed at level `depth`;
// a)-d) beyond that level are tested `horizon` levels deep.
std::vector<IdealSet> ideal_sets_at(const Digraph& g, int depth, int horizon, int width_cap = 12);
// Seeded mode: the hereditary saturated closure of a vertex set.
IdealSet ideal_from_seed(const Digraph& g, const std::vector<int>& seed, int depth, int horizon);
BratteliEnds bratteli_ends(const Digraph& g, int depth, int window, int horizon = 4, int width_cap = 12);

enum class Minimality { minimal, not_minimal, undetermined };
const char* minimality_name(Minimality m);

struct MinimalityReport {
    Minimality verdict = Minimality::undetermined;
    std::vector<std::vector<int>> levels;  // levels of Br(E)
    int witness_level = -1;                // first level reached fully by every tested vertex
};

// Simplicity of Br(E) from an end fingerprint.
MinimalityReport minimal_end_test(const Digraph& g, const EndApprox& e, int horizon);
// Simplicity of the diagram restricted to the complement of an ideal set.
MinimalityReport minimal_end_test(const Digraph& g, const IdealSet& I, int horizon);

struct AlmostUndirected {
    bool yes = false;
    int N = 0;
    int arrows_tested = 0;
    int arrows_excluded = 0;
};

// Smallest N such that every interior arrow v -> w has a path w -> v of
// length between 1 and N.
AlmostUndirected almost_undirected_test(const Digraph& g, int N_max);

struct BratteliReduction {
    Digraph diagram;
    Decomposition decomposition;
};

// Br(Γ): levels ∂D_n, arrows where L_{D_n}(v,w) is nonempty. Without beta the
// multiplicity is the number of exit paths when finite; with beta the arrow
// carries F = -log M(n)_{v,w}.
BratteliReduction graph_to_bratteli(const Digraph& g, int v0, const std::string& rule, int levels,
                                    std::optional<double> beta = std::nullopt, int escape_horizon = 3);
// π(y)_n: the last vertex of the ray inside D_n.
std::vector<int> project_ray(const Digraph& g, const Exhaustion& D, const std::vector<int>& ray, int levels);

}  // namespace kmsgraph
