#include "kmsgraph/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace kmsgraph {

SeriesEstimate green_function(const Digraph& g, double beta, int v, int w, const SeriesControls& ctl) {
    if (v < 0 || v >= g.size() || w < 0 || w >= g.size()) fail(ErrorKind::precondition, "vertex not found");
    WeightMatrix W(g, beta);
    return green_row(g, W, v, {w}, ctl).front();
}

std::vector<SeriesEstimate> green_row(const Digraph& g, const WeightMatrix& W, int v, const std::vector<int>& targets,
                                      const SeriesControls& ctl) {
    Propagation p;
    p.init = {{v, 1.0}};
    p.dir = Direction::row;
    p.targets = targets;
    p.ctl = ctl;
    return propagate(g, W, p);
}

std::vector<SeriesEstimate> green_column(const Digraph& g, const WeightMatrix& W, int w, const std::vector<int>& sources,
                                         const SeriesControls& ctl) {
    Propagation p;
    p.init = {{w, 1.0}};
    p.dir = Direction::column;
    p.targets = sources;
    p.ctl = ctl;
    return propagate(g, W, p);
}

SeriesEstimate taboo_sum(const Digraph& g, const WeightMatrix& W, int v, int w, const SeriesControls& ctl) {
    Propagation p;
    p.init = {{v, 1.0}};
    p.dir = Direction::row;
    p.allowed.assign(g.size(), 1);
    p.allowed[w] = 0;
    p.targets = {w};
    p.skip_zero_power = true;
    p.ctl = ctl;
    return propagate(g, W, p).front();
}

SeriesEstimate first_return_series(const Digraph& g, double beta, int v, const SeriesControls& ctl) {
    if (v < 0 || v >= g.size()) fail(ErrorKind::precondition, "vertex not found");
    WeightMatrix W(g, beta);
    return taboo_sum(g, W, v, v, ctl);
}

std::vector<std::vector<int>> strongly_connected_components(const Digraph& g) {
    // Iterative Tarjan.
    int n = g.size();
    std::vector<int> index(n, -1), low(n, 0), stack;
    std::vector<char> on(n, 0);
    std::vector<std::vector<int>> comps;
    int counter = 0;
    std::vector<std::pair<int, size_t>> call;
    for (int s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        call.push_back({s, 0});
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on[s] = 1;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            const auto& outs = g.out(v);
            if (i < outs.size()) {
                int w = g.arrow(outs[i++]).dst;
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = 1;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = 0;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                comps.push_back(comp);
            }
            int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comps;
}

static bool nontrivial(const Digraph& g, const std::vector<int>& comp) {
    if (comp.size() > 1) return true;
    for (int a : g.out(comp[0]))
        if (g.arrow(a).dst == comp[0]) return true;
    return false;
}

std::vector<int> loop_component(const Digraph& g, int v) {
    for (auto& c : strongly_connected_components(g))
        if (std::binary_search(c.begin(), c.end(), v)) return nontrivial(g, c) ? c : std::vector<int>{};
    return {};
}

PerronResult perron(const WeightMatrix& W, const std::vector<int>& comp, double tol, int max_iter) {
    int m = static_cast<int>(comp.size());
    std::vector<int> local(W.size(), -1);
    for (int i = 0; i < m; ++i) local[comp[i]] = i;
    std::vector<double> x(m, 1.0), y(m);
    PerronResult r;
    for (int it = 1; it <= max_iter; ++it) {
        for (int i = 0; i < m; ++i) {
            double s = x[i];
            int v = comp[i];
            for (int k = W.rowptr[v]; k < W.rowptr[v + 1]; ++k) {
                int j = local[W.col[k]];
                if (j >= 0) s += W.val[k] * x[j];
            }
            y[i] = s;
        }
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, mx = 0.0;
        for (int i = 0; i < m; ++i) {
            double q = y[i] / x[i];
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            mx = std::max(mx, y[i]);
        }
        for (int i = 0; i < m; ++i) x[i] = std::max(y[i] / mx, 1e-300);
        r.lower = lo - 1.0;
        r.upper = hi - 1.0;
        r.iterations = it;
        if (hi - lo <= tol * hi) {
            r.converged = true;
            break;
        }
    }
    r.value = 0.5 * (r.lower + r.upper);
    r.vector = x;
    return r;
}

EntropyEstimate gurevich_entropy(const Digraph& g, int v, const SeriesControls& ctl) {
    if (v < 0 || v >= g.size()) fail(ErrorKind::precondition, "vertex not found");
    auto comp = loop_component(g, v);
    if (comp.empty()) fail(ErrorKind::precondition, "vertex " + g.name(v) + " is not on any materialized loop");
    WeightMatrix W(g, 0.0);
    EntropyEstimate e;
    e.core_size = static_cast<int>(comp.size());
    PerronResult pr = perron(W, comp);
    e.estimate = std::log(pr.value);
    // Loop counts at v in the log domain.
    std::vector<int> local(g.size(), -1);
    for (size_t i = 0; i < comp.size(); ++i) local[comp[i]] = static_cast<int>(i);
    std::vector<double> x(comp.size(), 0.0), y(comp.size());
    x[local[v]] = 1.0;
    double logscale = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int n = 1; n <= ctl.max_power; ++n) {
        std::fill(y.begin(), y.end(), 0.0);
        for (size_t i = 0; i < comp.size(); ++i) {
            if (x[i] == 0.0) continue;
            int u = comp[i];
            for (int k = W.rowptr[u]; k < W.rowptr[u + 1]; ++k) {
                int j = local[W.col[k]];
                if (j >= 0) y[j] += x[i] * W.val[k];
            }
        }
        double mx = *std::max_element(y.begin(), y.end());
        for (auto& t : y) t /= mx;
        logscale += std::log(mx);
        x.swap(y);
        if (x[local[v]] > 0) best = std::max(best, (logscale + std::log(x[local[v]])) / n);
        e.powers_used = n;
    }
    e.lower_bound = best;
    bool complete = std::none_of(comp.begin(), comp.end(), [&](int u) { return g.boundary(u) || g.in_boundary(u); });
    e.status = !pr.converged ? "undetermined" : complete ? "exact" : "lower_bound";
    return e;
}

const char* recurrence_name(Recurrence r) {
    switch (r) {
        case Recurrence::recurrent: return "recurrent";
        case Recurrence::transient: return "transient";
        case Recurrence::undetermined: return "undetermined";
    }
    return "undetermined";
}

RecurrenceReport classify_recurrence(const Digraph& g, double beta, int v, const SeriesControls& ctl, double tol) {
    RecurrenceReport r;
    r.green = green_function(g, beta, v, v, ctl);
    r.first_return = first_return_series(g, beta, v, ctl);
    const auto& fr = r.first_return;
    bool fr_one = fr.converged() && std::abs(fr.value - 1.0) <= tol + fr.tail_bound.value_or(0.0);
    bool fr_below = fr.converged() && fr.value + fr.tail_bound.value_or(0.0) < 1.0 - tol;
    bool fr_above = fr.status == SeriesStatus::diverged || (fr.status != SeriesStatus::undetermined && fr.value > 1.0 + tol);
    if (r.green.converged()) {
        if (fr_one || fr_above)
            fail(ErrorKind::internal, "recurrence tests disagree at " + g.name(v) + "; truncation too shallow");
        r.verdict = Recurrence::transient;
    } else if (fr_one || r.green.status == SeriesStatus::diverged) {
        if (fr_below) fail(ErrorKind::internal, "recurrence tests disagree at " + g.name(v) + "; truncation too shallow");
        r.verdict = Recurrence::recurrent;
    }
    return r;
}

double log_spectral_radius(const Digraph& g, const std::vector<std::vector<int>>& comps, double beta, double tol) {
    WeightMatrix W(g, beta);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : comps) best = std::max(best, std::log(perron(W, c, tol).value));
    return best;
}

namespace {

// Minimum and maximum cycle mean of F inside a component (Karp).
std::pair<double, double> cycle_means(const Digraph& g, const std::vector<int>& comp) {
    int m = static_cast<int>(comp.size());
    std::vector<int> local(g.size(), -1);
    for (int i = 0; i < m; ++i) local[comp[i]] = i;
    std::vector<std::array<double, 3>> edges;  // from, to, F
    for (int v : comp)
        for (int a : g.out(v)) {
            int j = local[g.arrow(a).dst];
            if (j >= 0) edges.push_back({static_cast<double>(local[v]), static_cast<double>(j), g.arrow(a).F});
        }
    auto karp = [&](double sign) {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> D(m + 1, std::vector<double>(m, inf));
        D[0][0] = 0.0;
        for (int k = 1; k <= m; ++k)
            for (const auto& e : edges) {
                int u = static_cast<int>(e[0]), w = static_cast<int>(e[1]);
                if (D[k - 1][u] < inf) D[k][w] = std::min(D[k][w], D[k - 1][u] + sign * e[2]);
            }
        double best = inf;
        for (int v = 0; v < m; ++v) {
            if (D[m][v] == inf) continue;
            double worst = -inf;
            for (int k = 0; k < m; ++k)
                if (D[k][v] < inf) worst = std::max(worst, (D[m][v] - D[k][v]) / (m - k));
            best = std::min(best, worst);
        }
        return sign * best;
    };
    return {karp(1.0), karp(-1.0)};
}

// Root of f(beta) = 0 for a monotone f, by bracketing then bisection.
std::optional<double> solve_monotone(const std::function<double(double)>& f, bool decreasing) {
    double lo = -1.0, hi = 1.0;
    auto sgn = [&](double b) { return decreasing ? f(b) : -f(b); };
    int guard = 0;
    while (sgn(lo) < 0 && guard++ < 60) lo = lo * 2.0;
    guard = 0;
    while (sgn(hi) > 0 && guard++ < 60) hi = hi * 2.0;
    if (sgn(lo) < 0 || sgn(hi) > 0) return std::nullopt;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
        double mid = 0.5 * (lo + hi);
        if (sgn(mid) > 0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TemperatureClassification classify_beta_set(const Digraph& g, double tol) {
    TemperatureClassification t;
    auto comps = strongly_connected_components(g);
    std::vector<std::vector<int>> loops;
    for (auto& c : comps)
        if (nontrivial(g, c)) loops.push_back(c);
    for (auto& c : loops) t.nw_size += static_cast<int>(c.size());

    // Truncation-level simplicity diagnostics.
    t.loops_have_exits = true;
    for (auto& c : loops) {
        bool exit = false;
        for (int v : c) {
            int inside = 0;
            for (int a : g.out(v))
                inside += std::binary_search(c.begin(), c.end(), g.arrow(a).dst) ? static_cast<int>(g.arrow(a).mult) : 0;
            if (g.boundary(v) || g.out_multiplicity(v) > 1 || inside != g.out_multiplicity(v)) exit = true;
        }
        if (!exit) t.loops_have_exits = false;
    }
    t.cofinal = true;
    for (auto& c : loops) {
        std::vector<char> reach(g.size(), 0);
        std::vector<int> st(c.begin(), c.end());
        for (int v : c) reach[v] = 1;
        while (!st.empty()) {
            int q = st.back();
            st.pop_back();
            for (int a : g.in(q)) {
                int u = g.arrow(a).src;
                if (!reach[u]) {
                    reach[u] = 1;
                    st.push_back(u);
                }
            }
        }
        for (int v = 0; v < g.size(); ++v)
            if (!reach[v] && !g.boundary(v)) t.cofinal = false;
    }

    if (loops.empty()) {
        t.nw_status = "empty";
        t.loop_sign = "all_positive";
        t.shape = "all_reals";
        return t;
    }
    bool touches = false;
    for (auto& c : loops)
        for (int v : c)
            if (g.boundary(v) || g.in_boundary(v)) touches = true;
    if (g.nw_infinite_hint) t.nw_status = *g.nw_infinite_hint ? "infinite" : "finite_nonempty";
    else t.nw_status = touches ? "infinite" : "finite_nonempty";

    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    bool karp_ok = true;
    for (auto& c : loops) {
        long work = 0;
        for (int v : c) work += static_cast<long>(g.out(v).size());
        if (work * static_cast<long>(c.size()) > 50'000'000L) {
            karp_ok = false;
            break;
        }
        auto [lo, hi] = cycle_means(g, c);
        mn = std::min(mn, lo);
        mx = std::max(mx, hi);
    }
    if (!karp_ok) t.loop_sign = "undetermined";
    else if (mn > 0) t.loop_sign = "all_positive";
    else if (mx < 0) t.loop_sign = "all_negative";
    else if (mn == 0 || mx == 0) t.loop_sign = "has_zero";
    else t.loop_sign = "mixed";

    auto f = [&](double beta) { return log_spectral_radius(g, loops, beta, tol); };
    bool monotone = t.loop_sign == "all_positive" || t.loop_sign == "all_negative";
    if (!monotone) {
        t.shape = "undetermined";
        return t;
    }
    auto root = solve_monotone(f, t.loop_sign == "all_positive");
    if (!root) {
        t.shape = t.nw_status == "infinite" ? "undetermined" : "empty";
        return t;
    }
    t.beta0 = *root;
    if (t.nw_status == "finite_nonempty") t.shape = "singleton";
    else t.shape = t.loop_sign == "all_positive" ? "half_line_right" : "half_line_left";
    return t;
}

}  // namespace kmsgraph
