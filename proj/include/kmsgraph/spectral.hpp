#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kmsgraph/graph.hpp"
#include "kmsgraph/series.hpp"

namespace kmsgraph {

// G(v,w) = sum_n A(beta)^n_{v,w}.
SeriesEstimate green_function(const Digraph& g, double beta, int v, int w, const SeriesControls& ctl = {});
// G(v,t) for every target t, from one row propagation.
std::vector<SeriesEstimate> green_row(const Digraph& g, const WeightMatrix& W, int v, const std::vector<int>& targets,
                                      const SeriesControls& ctl = {});
// G(u,w) for every source u, from one column propagation.
std::vector<SeriesEstimate> green_column(const Digraph& g, const WeightMatrix& W, int w, const std::vector<int>& sources,
                                         const SeriesControls& ctl = {});

// Sum over loops at v that visit v only at their ends.
SeriesEstimate first_return_series(const Digraph& g, double beta, int v, const SeriesControls& ctl = {});
// Sum over paths v -> w of positive length that meet w only at the end.
SeriesEstimate taboo_sum(const Digraph& g, const WeightMatrix& W, int v, int w, const SeriesControls& ctl = {});

std::vector<std::vector<int>> strongly_connected_components(const Digraph& g);
// Component holding v, empty when v lies on no loop.
std::vector<int> loop_component(const Digraph& g, int v);

struct PerronResult {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> vector;  // over the component, max entry 1
};

// Perron value of W restricted to an irreducible component, by power
// iteration on W + I with Collatz-Wielandt bounds.
PerronResult perron(const WeightMatrix& W, const std::vector<int>& comp, double tol = 1e-12, int max_iter = 100000);

struct EntropyEstimate {
    double estimate = 0.0;     // log of the core's Perron value
    double lower_bound = 0.0;  // running max of log(A^n_vv)/n
    std::string status;        // exact | lower_bound | undetermined
    int core_size = 0;
    int powers_used = 0;
};

EntropyEstimate gurevich_entropy(const Digraph& g, int v, const SeriesControls& ctl = {});

enum class Recurrence { recurrent, transient, undetermined };
const char* recurrence_name(Recurrence r);

struct RecurrenceReport {
    Recurrence verdict = Recurrence::undetermined;
    SeriesEstimate green;
    SeriesEstimate first_return;
};

RecurrenceReport classify_recurrence(const Digraph& g, double beta, int v, const SeriesControls& ctl = {},
                                     double tol = 1e-9);

struct TemperatureClassification {
    std::string nw_status;   // empty | finite_nonempty | infinite | undetermined
    std::string shape;       // all_reals | singleton | half_line_right | half_line_left | empty | undetermined
    std::string loop_sign;   // all_positive | all_negative | mixed | has_zero | undetermined
    std::optional<double> beta0;
    bool cofinal = false;          // on the truncation
    bool loops_have_exits = false; // on the truncation
    int nw_size = 0;
};

TemperatureClassification classify_beta_set(const Digraph& g, double tol = 1e-12);

// log of the largest Perron value over the nontrivial components.
double log_spectral_radius(const Digraph& g, const std::vector<std::vector<int>>& comps, double beta, double tol = 1e-13);

}  // namespace kmsgraph
