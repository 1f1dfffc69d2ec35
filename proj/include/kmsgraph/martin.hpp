#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kmsgraph/families.hpp"
#include "kmsgraph/graph.hpp"
#include "kmsgraph/harmonic.hpp"
#include "kmsgraph/series.hpp"

namespace kmsgraph {

struct KernelValue {
    double value = 0.0;
    SeriesEstimate numerator;    // G(v,w)
    SeriesEstimate denominator;  // G(v0,w)
    double error = 0.0;          // relative, from tail bounds
};

// K(v,w) = G(v,w) / G(v0,w).
KernelValue martin_kernel(const Digraph& g, double beta, int v0, int v, int w, const SeriesControls& ctl = {});
// K(., w) over every vertex; entries whose numerator is not converged are NaN.
std::vector<double> martin_column(const Digraph& g, const WeightMatrix& W, int v0, int w, const SeriesControls& ctl = {});

// Ray vertices of a prefix inside a truncation.
std::vector<int> resolve_ray(const Digraph& g, const RaySpec& ray, long n);

struct RayWeight {
    std::vector<int> prefix;
    std::vector<double> segment_log;  // log of each L_j sum
    std::vector<char> segment_capped;
    double log_value = 0.0;
    double value = 1.0;
    bool capped = false;  // some segment sum is only a lower bound
};

// W(w_0..w_k) = prod_j sum over paths w_j -> w_{j+1} whose vertices after the
// first avoid {w_0..w_j}.
RayWeight ray_weight(const Digraph& g, double beta, const std::vector<int>& prefix, const SeriesControls& ctl = {});

struct SummabilityControls {
    double cauchy_tol = 1e-9;
    double log_threshold = 20.723265836946411;  // ln 1e9
    int run = 4;
    int fit_window = 16;
    SeriesControls series;
};

struct SummabilityReport {
    double beta = 0.0;
    std::vector<int> ray;
    std::string verdict;               // summable | not_summable | undetermined
    std::vector<double> log_trace;     // log G(v0, w_k) - log W(w_0..w_k)
    double log_limit = 0.0;            // log V(v0, y) estimate
    std::optional<double> tail_bound;  // on the log scale
    std::string closure;               // exact | geometric | power_law
    int terms_used = 0;
    std::optional<HarmonicVector> psi;  // normalized V(., y), on summable verdicts
};

SummabilityReport summability(const Digraph& g, double beta, int v0, const std::vector<int>& ray,
                              const SummabilityControls& ctl = {});
HarmonicVector extremal_measure_along_ray(const Digraph& g, double beta, int v0, const std::vector<int>& ray,
                                          const SummabilityControls& ctl = {});

struct BoundaryLimitReport {
    std::vector<int> sample;
    std::vector<int> schedule;
    std::vector<std::vector<double>> kernel;     // [sample][k]
    std::vector<std::vector<double>> deviation;  // relative to psi_v / psi_v0
    bool monotone = true;
    double final_deviation = 0.0;
    std::string verdict;  // consistent | inconsistent
};

// K(v, w_k) along a ray against m(Z(v))/m(Z(v0)); a necessary condition only.
BoundaryLimitReport boundary_limit_test(const Digraph& g, double beta, int v0, const std::vector<int>& ray,
                                        const HarmonicVector& m, const std::vector<int>& sample,
                                        const std::vector<int>& schedule, double tol = 1e-3,
                                        const SeriesControls& ctl = {});

}  // namespace kmsgraph
