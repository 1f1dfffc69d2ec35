#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kmsgraph/graph.hpp"
#include "kmsgraph/series.hpp"

namespace kmsgraph {

// Nonnegative vertex function; NaN marks vertices without a value.
struct HarmonicVector {
    double beta = 0.0;
    int base = -1;
    std::vector<double> values;
    bool normalized = false;
    double residual_max = 0.0;

    bool has(int v) const;
};

std::vector<double> values_from_map(const Digraph& g, const std::map<std::string, double>& m);
HarmonicVector make_harmonic(const Digraph& g, double beta, int base, std::vector<double> values);
// Scales so the base value is 1.
HarmonicVector normalized(HarmonicVector h);

struct ResidualReport {
    std::vector<std::pair<int, double>> residuals;  // interior vertices
    double max_residual = 0.0;
    int argmax = -1;
    std::vector<int> excluded;     // truncation boundary and vertices without a value
    std::vector<int> violations;   // almost mode: sum exceeds psi_v
};

// mode: "harmonic" (equality) or "almost" (A psi <= psi).
ResidualReport verify_harmonic(const Digraph& g, double beta, const std::vector<double>& psi,
                               const std::string& mode = "harmonic", double tol = 1e-9);

// b_v = min_k (A(beta)^k_{v0,v})^{-1} over k <= k_max.
std::vector<double> normalization_bounds(const Digraph& g, double beta, int v0, int k_max);

// Interior-nested exhaustion D_0 = {v0} ⊏ D_1 ⊏ ...
struct Exhaustion {
    std::string rule;
    std::vector<std::vector<int>> shells;
};

// rule: "bfs" (out-neighbour shells) or "levels" (level tags).
Exhaustion make_exhaustion(const Digraph& g, int v0, const std::string& rule, int count);
std::vector<char> membership(const Digraph& g, const std::vector<int>& set);
// ∂D_n for n = 0..levels: vertices of D_n with an arrow to an outside vertex
// that leaves D_{n+h} (or the truncation) while avoiding D_n.
std::vector<std::vector<int>> shell_boundaries(const Digraph& g, const Exhaustion& D, int levels, int escape_horizon);

struct Decomposition {
    int v0 = 0;
    std::optional<double> beta;
    Exhaustion D;
    std::vector<std::vector<int>> boundary;  // ∂D_n
    // M[n] is |∂D_n| x |∂D_{n+1}|; reach[n] its support.
    std::vector<std::vector<std::vector<double>>> M;
    std::vector<std::vector<std::vector<char>>> reach;
    std::vector<std::vector<std::vector<SeriesStatus>>> status;
    SeriesEstimate green00;
    bool converged = true;
};

Decomposition bratteli_decompose(const Digraph& g, int v0, std::optional<double> beta, const std::string& rule,
                                 int levels, int escape_horizon = 3, const SeriesControls& ctl = {});

struct LevelChain {
    int seed = -1;                         // vertex of ∂D_N pulled back
    std::vector<std::vector<double>> psi;  // levels 0..N over ∂D_k
};

struct LevelChainSet {
    std::vector<LevelChain> chains;      // raw pullbacks
    std::vector<int> distinct;           // indices of deduplicated chains
    double gap = 0.0;                    // Hausdorff gap at level 1 between horizons N-1 and N
    int horizon = 0;
};

// face[k] lists allowed vertices of ∂D_k (empty vector: no constraint).
LevelChainSet solve_level_chain(const Decomposition& d, int N, const std::vector<std::vector<int>>& face = {},
                                double dedup_tol = 1e-6, int dedup_levels = 5);
// max_n |M(n) psi^{n+1} - psi^n| relative to |psi^n|, with M(0)psi^1 against 1/G.
double chain_defect(const Decomposition& d, const LevelChain& c);

struct Extension {
    bool feasible = false;
    HarmonicVector psi;
    SeriesEstimate base_series;  // the series at v0
    std::string reason;
};

Extension extend_from_hereditary(const Digraph& g, double beta, const std::vector<int>& H, const std::vector<double>& psi_on_H,
                                 int v0, const SeriesControls& ctl = {});

// m(Z(mu)) = exp(-beta F(mu)) psi_{r(mu)}.
double measure_of_cylinder(const Digraph& g, const HarmonicVector& m, const FinitePath& mu);
// |m(Z(mu)) - sum_a m(Z(mu a))| at an interior range vertex.
double refinement_defect(const Digraph& g, const HarmonicVector& m, const FinitePath& mu);
double kms_state_value(const Digraph& g, const HarmonicVector& m, const FinitePath& mu, const FinitePath& nu);

struct DoobMatrix {
    std::vector<std::vector<std::pair<int, double>>> rows;
    std::vector<double> row_sums;
    double max_row_defect = 0.0;  // over interior rows
};

DoobMatrix doob_transform(const Digraph& g, double beta, const std::vector<double>& psi);

}  // namespace kmsgraph
