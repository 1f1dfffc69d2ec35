#include "kmsgraph/series.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace kmsgraph {

const char* status_name(SeriesStatus s) {
    switch (s) {
        case SeriesStatus::converged: return "converged";
        case SeriesStatus::diverged: return "diverged";
        case SeriesStatus::undetermined: return "undetermined";
    }
    return "undetermined";
}

void SeriesTracker::add(double term) {
    // Kahan step on (sum_, comp_) where comp_ holds the lost low part.
    double y = term + comp_;
    double t = sum_ + y;
    comp_ = y - (t - sum_);
    sum_ = t;
    block_sum_ += term;
    ++terms_;
    if (++in_block_ == ctl_.block) close_block();
}

void SeriesTracker::close_block() {
    double b = block_sum_;
    block_sum_ = 0.0;
    in_block_ = 0;
    if (partial() > ctl_.divergence_threshold || !std::isfinite(partial())) {
        diverged_ = true;
        return;
    }
    if (!seen_nonzero_) {
        if (b > 0) {
            seen_nonzero_ = true;
            prev_block_ = b;
            last_block_ = b;
        }
        return;
    }
    double ratio = prev_block_ > 0 ? b / prev_block_ : (b > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (ratio < 1.0 - ctl_.ratio_margin) {
        ++below_;
        above_ = 0;
        window_.push_back(ratio);
        if (static_cast<int>(window_.size()) > ctl_.run) window_.pop_front();
    } else {
        ++above_;
        below_ = 0;
        window_.clear();
    }
    prev_block_ = b;
    last_block_ = b;
}

double SeriesTracker::tail_estimate() const {
    double r = window_.empty() ? 0.0 : *std::max_element(window_.begin(), window_.end());
    return (last_block_ + block_sum_) * r / (1.0 - r) + block_sum_;
}

bool SeriesTracker::settled() const {
    if (diverged_) return true;
    if (below_ < ctl_.run) return false;
    return tail_estimate() <= ctl_.rel_tol * partial();
}

SeriesEstimate SeriesTracker::finish(bool exact) const {
    SeriesEstimate e;
    e.value = partial();
    e.terms_used = terms_;
    if (diverged_ || (!exact && partial() > ctl_.divergence_threshold)) {
        e.status = SeriesStatus::diverged;
        return e;
    }
    if (exact) {
        e.status = SeriesStatus::converged;
        e.tail_bound = 0.0;
        return e;
    }
    if (below_ >= ctl_.run) {
        e.status = SeriesStatus::converged;
        e.tail_bound = tail_estimate();
        return e;
    }
    // Blocks that stop shrinking at the end of the run force an infinite sum.
    // Only the final blocks count, so a rising start does not.
    if (above_ >= ctl_.run) {
        e.status = SeriesStatus::diverged;
        return e;
    }
    e.status = SeriesStatus::undetermined;
    return e;
}

WeightMatrix::WeightMatrix(const Digraph& g, double beta) : n_(g.size()), beta_(beta) {
    rowptr.assign(n_ + 1, 0);
    for (int v = 0; v < n_; ++v) {
        // Bundles with equal (target, F) are merged before exponentiation so
        // that the scaling identity in beta holds exactly.
        std::map<std::pair<int, double>, double> agg;
        for (int a : g.out(v)) {
            const Arrow& ar = g.arrow(a);
            agg[{ar.dst, ar.F}] += ar.mult;
        }
        std::map<int, double> row;
        for (const auto& [key, mult] : agg) row[key.first] += mult * std::exp(-beta * key.second);
        for (const auto& [w, x] : row) {
            col.push_back(w);
            val.push_back(x);
        }
        rowptr[v + 1] = static_cast<int>(col.size());
    }
    tptr.assign(n_ + 1, 0);
    for (int w : col) ++tptr[w + 1];
    for (int i = 0; i < n_; ++i) tptr[i + 1] += tptr[i];
    tcol.resize(col.size());
    tval.resize(col.size());
    std::vector<int> pos(tptr.begin(), tptr.end() - 1);
    for (int v = 0; v < n_; ++v)
        for (int k = rowptr[v]; k < rowptr[v + 1]; ++k) {
            int p = pos[col[k]]++;
            tcol[p] = v;
            tval[p] = val[k];
        }
}

double WeightMatrix::at(int v, int w) const {
    for (int k = rowptr[v]; k < rowptr[v + 1]; ++k)
        if (col[k] == w) return val[k];
    return 0.0;
}

std::vector<std::pair<int, double>> WeightMatrix::row(int v) const {
    std::vector<std::pair<int, double>> r;
    for (int k = rowptr[v]; k < rowptr[v + 1]; ++k) r.emplace_back(col[k], val[k]);
    return r;
}

std::vector<std::vector<double>> WeightMatrix::dense() const {
    std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
    for (int v = 0; v < n_; ++v)
        for (int k = rowptr[v]; k < rowptr[v + 1]; ++k) d[v][col[k]] = val[k];
    return d;
}

namespace {

// Vertices whose mass can still feed a target later: predecessors (in the
// propagation sense) of targets through allowed vertices.
std::vector<char> relevance(const WeightMatrix& W, const Propagation& p, const std::vector<char>& allowed) {
    int n = W.size();
    std::vector<char> rel(n, 0);
    // Row mode: mass at u moves along u -> w, so walk arrows backwards.
    const auto& ptr = p.dir == Direction::row ? W.tptr : W.rowptr;
    const auto& idx = p.dir == Direction::row ? W.tcol : W.col;
    std::vector<int> stack;
    std::vector<char> expanded(n, 0);
    for (int t : p.targets) stack.push_back(t);
    while (!stack.empty()) {
        int q = stack.back();
        stack.pop_back();
        if (expanded[q]) continue;
        expanded[q] = 1;
        for (int k = ptr[q]; k < ptr[q + 1]; ++k) {
            int u = idx[k];
            if (!rel[u]) {
                rel[u] = 1;
                if (allowed[u]) stack.push_back(u);
            }
        }
    }
    return rel;
}

}  // namespace

namespace {

constexpr long kInf = std::numeric_limits<long>::max() / 4;

// Multi-source BFS. `fwd` walks arrows forwards; a vertex is expanded only if
// it is allowed or is a source that may sit at an unmasked end.
std::vector<long> bfs(const WeightMatrix& W, const std::vector<int>& sources, bool fwd, const std::vector<char>& allowed,
                      bool expand_sources) {
    int n = W.size();
    std::vector<long> dist(n, kInf);
    std::deque<int> q;
    for (int s : sources)
        if (dist[s] != 0) {
            dist[s] = 0;
            q.push_back(s);
        }
    const auto& ptr = fwd ? W.rowptr : W.tptr;
    const auto& idx = fwd ? W.col : W.tcol;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        if (!allowed[u] && !(expand_sources && dist[u] == 0)) continue;
        for (int k = ptr[u]; k < ptr[u + 1]; ++k) {
            int w = idx[k];
            if (dist[w] == kInf) {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
        }
    }
    return dist;
}

// Largest power n such that the n-th term at each target involves no
// unmaterialized vertex.
std::vector<long> exact_horizons(const Digraph& g, const WeightMatrix& W, const Propagation& p,
                                 const std::vector<char>& allowed) {
    int n = W.size();
    std::vector<int> init, out_b, in_b;
    for (const auto& [v, a] : p.init)
        if (a != 0.0) init.push_back(v);
    for (int v = 0; v < n; ++v) {
        if (g.boundary(v)) out_b.push_back(v);
        if (g.in_boundary(v)) in_b.push_back(v);
    }
    auto add = [](long a, long b) { return (a >= kInf || b >= kInf) ? kInf : a + b; };
    std::vector<long> h(p.targets.size(), kInf);
    bool row = p.dir == Direction::row;
    // Row: init ->* out-boundary -> outside ->+ in-boundary ->* target.
    // Column: target ->* out-boundary -> outside ->+ in-boundary ->* init.
    auto near_init = bfs(W, init, row, allowed, true);
    long d_init = kInf;
    for (int v : row ? out_b : in_b)
        if (allowed[v] || near_init[v] == 0) d_init = std::min(d_init, near_init[v]);
    auto near_target = bfs(W, row ? in_b : out_b, row, allowed, false);
    for (size_t i = 0; i < p.targets.size(); ++i) {
        long dt = near_target[p.targets[i]];
        h[i] = add(add(d_init, dt), 1);
        // Unseen initial mass beyond the truncation.
        if (p.init_extends) h[i] = std::min(h[i], row ? dt : add(dt, 1));
    }
    return h;
}

}  // namespace

std::vector<SeriesEstimate> propagate(const Digraph& g, const WeightMatrix& W, const Propagation& p) {
    int n = W.size();
    std::vector<char> allowed = p.allowed.empty() ? std::vector<char>(n, 1) : p.allowed;
    std::vector<char> rel = relevance(W, p, allowed);
    for (int v = 0; v < n; ++v) rel[v] = rel[v] && allowed[v];
    std::vector<long> horizon = exact_horizons(g, W, p, allowed);

    size_t m = p.targets.size();
    std::vector<SeriesTracker> trackers(m, SeriesTracker(p.ctl));
    std::vector<char> frozen(m, 0);
    std::vector<double> x(n, 0.0), y(n, 0.0);
    for (const auto& [v, a] : p.init) x[v] += a;
    bool exhausted = false;
    for (int power = 0; power <= p.ctl.max_power; ++power) {
        if (power > 0) {
            std::fill(y.begin(), y.end(), 0.0);
            if (p.dir == Direction::row) {
                for (int u = 0; u < n; ++u) {
                    double xu = x[u];
                    if (xu == 0.0) continue;
                    for (int k = W.rowptr[u]; k < W.rowptr[u + 1]; ++k) y[W.col[k]] += xu * W.val[k];
                }
            } else {
                for (int w = 0; w < n; ++w) {
                    double xw = x[w];
                    if (xw == 0.0) continue;
                    for (int k = W.tptr[w]; k < W.tptr[w + 1]; ++k) y[W.tcol[k]] += W.tval[k] * xw;
                }
            }
            x.swap(y);
        }
        if (power > 0 || !p.skip_zero_power)
            for (size_t t = 0; t < m; ++t)
                if (!frozen[t]) trackers[t].add(x[p.targets[t]]);
        for (size_t t = 0; t < m; ++t)
            if (power >= horizon[t]) frozen[t] = 1;
        if (power > 0)
            for (int v = 0; v < n; ++v)
                if (!allowed[v]) x[v] = 0.0;
        // The initial vector is expanded even where continuation is masked.
        bool live = power == 0;
        for (int v = 0; v < n && !live; ++v)
            if (x[v] != 0.0 && rel[v]) live = true;
        if (!live) {
            exhausted = true;
            break;
        }
        bool all = true;
        for (size_t t = 0; t < m && all; ++t)
            if (!frozen[t] && !trackers[t].settled()) all = false;
        if (all) break;
    }
    std::vector<SeriesEstimate> out;
    for (size_t t = 0; t < m; ++t) {
        bool exact = exhausted && horizon[t] >= kInf;
        SeriesEstimate e = trackers[t].finish(exact);
        if (e.status == SeriesStatus::undetermined && horizon[t] < kInf) e.note = "truncation horizon";
        out.push_back(e);
    }
    return out;
}

}  // namespace kmsgraph
