#pragma once

#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kmsgraph/graph.hpp"

namespace kmsgraph {

struct SeriesControls {
    int max_power = 512;
    double divergence_threshold = 1e9;
    int block = 16;
    int run = 4;
    // Block ratios must stay below 1 - ratio_margin to count as contracting.
    double ratio_margin = 1e-8;
    double rel_tol = 1e-14;
};

enum class SeriesStatus { converged, diverged, undetermined };
const char* status_name(SeriesStatus s);

struct SeriesEstimate {
    double value = 0.0;
    SeriesStatus status = SeriesStatus::undetermined;
    std::optional<double> tail_bound;
    int terms_used = 0;
    std::string note;

    bool converged() const { return status == SeriesStatus::converged; }
};

// Consumes the terms of a nonnegative series one power at a time and applies
// the block-ratio criterion.
class SeriesTracker {
public:
    explicit SeriesTracker(const SeriesControls& ctl) : ctl_(ctl) {}
    void add(double term);
    // True once the verdict can no longer change.
    bool settled() const;
    double partial() const { return sum_ + comp_; }
    // exact: every remaining term is known to vanish.
    SeriesEstimate finish(bool exact) const;

private:
    void close_block();
    double tail_estimate() const;

    SeriesControls ctl_;
    double sum_ = 0.0, comp_ = 0.0;
    double block_sum_ = 0.0;
    int in_block_ = 0;
    int terms_ = 0;
    double prev_block_ = -1.0;
    int below_ = 0, above_ = 0;
    std::deque<double> window_;  // ratios of the current contracting run
    double last_block_ = 0.0;
    bool diverged_ = false;
    bool seen_nonzero_ = false;
};

// Sparse A(beta) over a truncation, with its transpose.
class WeightMatrix {
public:
    WeightMatrix(const Digraph& g, double beta);
    int size() const { return n_; }
    double beta() const { return beta_; }
    double at(int v, int w) const;
    // Row v as (column, value) pairs.
    std::vector<std::pair<int, double>> row(int v) const;
    std::vector<std::vector<double>> dense() const;

    int n_ = 0;
    double beta_ = 0.0;
    std::vector<int> rowptr, col;
    std::vector<double> val;
    std::vector<int> tptr, tcol;
    std::vector<double> tval;
};

enum class Direction { row, column };

// Power-series propagation x_{n+1} = x_n A (row) or A x_n (column), with the
// continuation restricted to `allowed` from step 1 on. For each target t the
// series sum_n x_n(t) is tracked, with x_n read before masking. Terms past the
// shortest path through unmaterialized vertices are not used.
struct Propagation {
    std::vector<std::pair<int, double>> init;
    Direction dir = Direction::row;
    std::vector<char> allowed;  // empty: all vertices allowed
    std::vector<int> targets;
    bool skip_zero_power = false;
    // The initial vector may have mass on unmaterialized vertices.
    bool init_extends = false;
    SeriesControls ctl;
};

std::vector<SeriesEstimate> propagate(const Digraph& g, const WeightMatrix& W, const Propagation& p);

// Kahan-compensated accumulator.
struct KahanSum {
    double sum = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

}  // namespace kmsgraph
