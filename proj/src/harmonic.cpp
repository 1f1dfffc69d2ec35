#include "kmsgraph/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "kmsgraph/spectral.hpp"

namespace kmsgraph {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_vertex(const Digraph& g, int v) {
    if (v < 0 || v >= g.size()) fail(ErrorKind::precondition, "vertex not found");
}

// Residuals are scaled by max(1, psi_v) so that unnormalized vectors with
// large entries are judged relative to their size.
double scale_of(double x) { return std::max(1.0, std::fabs(x)); }

ResidualReport residuals(const Digraph& g, const WeightMatrix& W, const std::vector<double>& psi, bool almost,
                         double tol, bool strict) {
    ResidualReport rep;
    int n = g.size();
    for (int v = 0; v < n; ++v) {
        if (std::isnan(psi[v]) || g.boundary(v)) {
            rep.excluded.push_back(v);
            continue;
        }
        KahanSum s;
        bool missing = false;
        for (int k = W.rowptr[v]; k < W.rowptr[v + 1]; ++k) {
            double x = psi[W.col[k]];
            if (std::isnan(x)) {
                missing = true;
                break;
            }
            s.add(W.val[k] * x);
        }
        if (missing) {
            if (strict) fail(ErrorKind::precondition, "psi missing on interior out-neighbor of " + g.name(v));
            rep.excluded.push_back(v);
            continue;
        }
        double d = almost ? std::max(0.0, s.sum - psi[v]) : std::fabs(psi[v] - s.sum);
        d /= scale_of(psi[v]);
        if (almost && d > tol) rep.violations.push_back(v);
        rep.residuals.emplace_back(v, d);
        if (d > rep.max_residual || rep.argmax < 0) {
            rep.max_residual = std::max(rep.max_residual, d);
            rep.argmax = v;
        }
    }
    return rep;
}

void check_nonnegative(const Digraph& g, const std::vector<double>& psi) {
    if (static_cast<int>(psi.size()) != g.size()) fail(ErrorKind::precondition, "psi size does not match the graph");
    for (int v = 0; v < g.size(); ++v)
        if (!std::isnan(psi[v]) && psi[v] < 0) fail(ErrorKind::precondition, "psi negative at " + g.name(v));
}

}  // namespace

bool HarmonicVector::has(int v) const { return v >= 0 && v < static_cast<int>(values.size()) && !std::isnan(values[v]); }

std::vector<double> values_from_map(const Digraph& g, const std::map<std::string, double>& m) {
    std::vector<double> out(g.size(), kNaN);
    for (const auto& [name, x] : m) {
        int v = g.find(name);
        if (v >= 0) out[v] = x;
    }
    return out;
}

HarmonicVector make_harmonic(const Digraph& g, double beta, int base, std::vector<double> values) {
    check_nonnegative(g, values);
    HarmonicVector h;
    h.beta = beta;
    h.base = base;
    h.values = std::move(values);
    h.normalized = h.has(base) && h.values[base] == 1.0;
    WeightMatrix W(g, beta);
    h.residual_max = residuals(g, W, h.values, false, 0.0, false).max_residual;
    return h;
}

HarmonicVector normalized(HarmonicVector h) {
    if (!h.has(h.base) || !(h.values[h.base] > 0)) fail(ErrorKind::precondition, "normalization impossible: zero at base vertex");
    double c = h.values[h.base];
    for (double& x : h.values)
        if (!std::isnan(x)) x /= c;
    h.values[h.base] = 1.0;
    h.normalized = true;
    return h;
}

ResidualReport verify_harmonic(const Digraph& g, double beta, const std::vector<double>& psi, const std::string& mode,
                               double tol) {
    if (mode != "harmonic" && mode != "almost") fail(ErrorKind::precondition, "unknown mode '" + mode + "'");
    check_nonnegative(g, psi);
    WeightMatrix W(g, beta);
    return residuals(g, W, psi, mode == "almost", tol, true);
}

std::vector<double> normalization_bounds(const Digraph& g, double beta, int v0, int k_max) {
    require_vertex(g, v0);
    WeightMatrix W(g, beta);
    int n = g.size();
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<double> x(n, 0.0), y(n, 0.0);
    x[v0] = 1.0;
    best[v0] = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        std::fill(y.begin(), y.end(), 0.0);
        for (int u = 0; u < n; ++u) {
            if (x[u] == 0.0) continue;
            for (int j = W.rowptr[u]; j < W.rowptr[u + 1]; ++j) y[W.col[j]] += x[u] * W.val[j];
        }
        x.swap(y);
        for (int v = 0; v < n; ++v)
            if (x[v] > 0) best[v] = std::min(best[v], 1.0 / x[v]);
    }
    return best;
}

std::vector<char> membership(const Digraph& g, const std::vector<int>& set) {
    std::vector<char> in(g.size(), 0);
    for (int v : set) in[v] = 1;
    return in;
}

Exhaustion make_exhaustion(const Digraph& g, int v0, const std::string& rule, int count) {
    require_vertex(g, v0);
    if (count < 1) fail(ErrorKind::precondition, "exhaustion needs at least one shell");
    Exhaustion ex;
    ex.rule = rule;
    int n = g.size();
    if (rule == "bfs") {
        std::vector<char> in(n, 0);
        std::vector<int> cur{v0};
        in[v0] = 1;
        ex.shells.push_back(cur);
        for (int k = 1; k < count; ++k) {
            std::vector<int> next = cur;
            for (int u : cur)
                for (int a : g.out(u)) {
                    int w = g.arrow(a).dst;
                    if (!in[w]) {
                        in[w] = 1;
                        next.push_back(w);
                    }
                }
            std::sort(next.begin(), next.end());
            cur = next;
            ex.shells.push_back(cur);
        }
    } else if (rule == "levels") {
        if (!g.has_levels()) fail(ErrorKind::precondition, "graph has no level tags");
        for (int k = 0; k < count; ++k) {
            std::vector<int> shell;
            for (int v = 0; v < n; ++v)
                if (g.level(v) >= 0 && g.level(v) <= k) shell.push_back(v);
            ex.shells.push_back(shell);
        }
        if (ex.shells[0] != std::vector<int>{v0}) fail(ErrorKind::precondition, "exhaustion not interior-nested: D_0 differs from {v0}");
    } else {
        fail(ErrorKind::precondition, "unknown exhaustion rule '" + rule + "'");
    }
    // Interior nesting: every arrow out of D_k lands in D_{k+1}.
    for (int k = 0; k + 1 < count; ++k) {
        std::vector<char> next = membership(g, ex.shells[k + 1]);
        for (int u : ex.shells[k]) {
            if (g.boundary(u)) fail(ErrorKind::undetermined, "escape undeterminable at horizon: truncation too shallow");
            for (int a : g.out(u))
                if (!next[g.arrow(a).dst]) fail(ErrorKind::precondition, "exhaustion not interior-nested at shell " + std::to_string(k));
        }
    }
    return ex;
}

namespace {

// Vertices of D_n with an arrow into the set of outside vertices that escape
// beyond D_{n+h} (or off the truncation) while avoiding D_n.
std::vector<int> shell_boundary(const Digraph& g, const std::vector<char>& inD, const std::vector<char>& inDh) {
    int n = g.size();
    std::vector<char> esc(n, 0);
    std::deque<int> q;
    for (int v = 0; v < n; ++v)
        if (!inD[v] && (!inDh[v] || g.boundary(v))) {
            esc[v] = 1;
            q.push_back(v);
        }
    while (!q.empty()) {
        int w = q.front();
        q.pop_front();
        for (int a : g.in(w)) {
            int u = g.arrow(a).src;
            if (!inD[u] && !esc[u]) {
                esc[u] = 1;
                q.push_back(u);
            }
        }
    }
    std::vector<int> out;
    for (int v = 0; v < n; ++v) {
        if (!inD[v]) continue;
        for (int a : g.out(v))
            if (esc[g.arrow(a).dst]) {
                out.push_back(v);
                break;
            }
    }
    return out;
}

}  // namespace

std::vector<std::vector<int>> shell_boundaries(const Digraph& g, const Exhaustion& D, int levels, int escape_horizon) {
    if (static_cast<int>(D.shells.size()) < levels + escape_horizon + 1)
        fail(ErrorKind::precondition, "exhaustion has too few shells for the escape horizon");
    std::vector<std::vector<int>> out;
    for (int n = 0; n <= levels; ++n) {
        auto b = shell_boundary(g, membership(g, D.shells[n]), membership(g, D.shells[n + escape_horizon]));
        if (b.empty()) fail(ErrorKind::precondition, "no wandering structure: boundary of D_" + std::to_string(n) + " is empty");
        out.push_back(std::move(b));
    }
    return out;
}

Decomposition bratteli_decompose(const Digraph& g, int v0, std::optional<double> beta, const std::string& rule, int levels,
                                 int escape_horizon, const SeriesControls& ctl) {
    require_vertex(g, v0);
    if (levels < 1) fail(ErrorKind::precondition, "decomposition needs at least one level");
    if (escape_horizon < 1) fail(ErrorKind::precondition, "escape horizon must be positive");
    Decomposition d;
    d.v0 = v0;
    d.beta = beta;
    d.D = make_exhaustion(g, v0, rule, levels + escape_horizon + 1);
    d.boundary = shell_boundaries(g, d.D, levels, escape_horizon);
    double bt = beta.value_or(0.0);
    WeightMatrix W(g, bt);
    for (int n = 0; n < levels; ++n) {
        const auto& rows = d.boundary[n];
        const auto& cols = d.boundary[n + 1];
        std::vector<char> allowed = membership(g, d.D.shells[n]);
        for (char& c : allowed) c = !c;
        std::vector<std::vector<double>> M(rows.size(), std::vector<double>(cols.size(), 0.0));
        std::vector<std::vector<char>> R(rows.size(), std::vector<char>(cols.size(), 0));
        std::vector<std::vector<SeriesStatus>> S(rows.size(), std::vector<SeriesStatus>(cols.size(), SeriesStatus::converged));
        for (size_t i = 0; i < rows.size(); ++i) {
            Propagation p;
            p.init = {{rows[i], 1.0}};
            p.dir = Direction::row;
            p.allowed = allowed;
            p.targets = cols;
            p.skip_zero_power = true;
            p.ctl = ctl;
            auto est = propagate(g, W, p);
            for (size_t j = 0; j < cols.size(); ++j) {
                M[i][j] = est[j].value;
                R[i][j] = est[j].value > 0;
                S[i][j] = est[j].status;
                if (beta && est[j].status != SeriesStatus::converged) d.converged = false;
            }
        }
        d.M.push_back(std::move(M));
        d.reach.push_back(std::move(R));
        d.status.push_back(std::move(S));
    }
    if (beta) {
        d.green00 = green_row(g, W, v0, {v0}, ctl).front();
    }
    return d;
}

namespace {

std::vector<double> mat_apply(const std::vector<std::vector<double>>& M, const std::vector<double>& u) {
    std::vector<double> out(M.size(), 0.0);
    for (size_t i = 0; i < M.size(); ++i) {
        KahanSum s;
        for (size_t j = 0; j < u.size(); ++j) s.add(M[i][j] * u[j]);
        out[i] = s.sum;
    }
    return out;
}

void restrict_to(const Decomposition& d, const std::vector<std::vector<int>>& face, int k, std::vector<double>& u) {
    if (k >= static_cast<int>(face.size()) || face[k].empty()) return;
    for (size_t i = 0; i < u.size(); ++i)
        if (std::find(face[k].begin(), face[k].end(), d.boundary[k][i]) == face[k].end()) u[i] = 0.0;
}

double sup_distance(const LevelChain& a, const LevelChain& b, int from, int to) {
    double m = 0.0;
    for (int k = from; k <= to && k < static_cast<int>(a.psi.size()) && k < static_cast<int>(b.psi.size()); ++k)
        for (size_t i = 0; i < a.psi[k].size(); ++i) m = std::max(m, std::fabs(a.psi[k][i] - b.psi[k][i]));
    return m;
}

// Pulls back every admissible seed of ∂D_N through M(N-1)...M(0).
std::vector<LevelChain> pullbacks(const Decomposition& d, int N, const std::vector<std::vector<int>>& face) {
    double lg = std::log(d.green00.value);
    std::vector<LevelChain> out;
    const auto& seeds = d.boundary[N];
    for (size_t s = 0; s < seeds.size(); ++s) {
        if (N < static_cast<int>(face.size()) && !face[N].empty() &&
            std::find(face[N].begin(), face[N].end(), seeds[s]) == face[N].end())
            continue;
        std::vector<std::vector<double>> u(N + 1);
        std::vector<double> logc(N + 1, 0.0);
        u[N].assign(seeds.size(), 0.0);
        u[N][s] = 1.0;
        bool dead = false;
        for (int j = N - 1; j >= 0; --j) {
            u[j] = mat_apply(d.M[j], u[j + 1]);
            restrict_to(d, face, j, u[j]);
            double c = *std::max_element(u[j].begin(), u[j].end());
            if (!(c > 0) || !std::isfinite(c)) {
                dead = true;
                break;
            }
            for (double& x : u[j]) x /= c;
            logc[j] = std::log(c);
        }
        if (dead) continue;
        // U_j = u_j * prod_{i>=j} c_i; psi^j = U_j / (G U_0).
        double base = -std::log(u[0][0]) - lg;
        LevelChain ch;
        ch.seed = seeds[s];
        ch.psi.resize(N + 1);
        double acc = 0.0;
        for (int j = 0; j <= N; ++j) {
            double f = std::exp(base - acc);
            ch.psi[j].resize(u[j].size());
            for (size_t i = 0; i < u[j].size(); ++i) ch.psi[j][i] = u[j][i] * f;
            if (j < N) acc += logc[j];
        }
        out.push_back(std::move(ch));
    }
    return out;
}

std::vector<int> dedup(const std::vector<LevelChain>& cs, double tol, int levels) {
    std::vector<int> keep;
    for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
        bool dup = false;
        for (int j : keep)
            if (sup_distance(cs[i], cs[j], 1, levels) < tol) {
                dup = true;
                break;
            }
        if (!dup) keep.push_back(i);
    }
    return keep;
}

}  // namespace

LevelChainSet solve_level_chain(const Decomposition& d, int N, const std::vector<std::vector<int>>& face, double dedup_tol,
                                int dedup_levels) {
    if (!d.beta) fail(ErrorKind::precondition, "level chains need a temperature");
    if (N < 1 || N > static_cast<int>(d.M.size())) fail(ErrorKind::precondition, "decomposition has fewer levels than the horizon");
    if (!d.green00.converged()) fail(ErrorKind::precondition, "Green function at the base vertex is not converged");
    if (d.boundary[0].size() != 1 || d.boundary[0][0] != d.v0) fail(ErrorKind::precondition, "base vertex does not escape D_0");
    LevelChainSet set;
    set.horizon = N;
    set.chains = pullbacks(d, N, face);
    if (set.chains.empty()) fail(ErrorKind::precondition, "normalization impossible: all pullbacks vanish at the base vertex");
    set.distinct = dedup(set.chains, dedup_tol, dedup_levels);
    if (N >= 2) {
        auto prev = pullbacks(d, N - 1, face);
        auto pd = dedup(prev, dedup_tol, dedup_levels);
        auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
            double m = 0.0;
            for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
            return m;
        };
        auto directed = [&](const std::vector<LevelChain>& A, const std::vector<int>& ia, const std::vector<LevelChain>& B,
                            const std::vector<int>& ib) {
            double h = 0.0;
            for (int i : ia) {
                double best = std::numeric_limits<double>::infinity();
                for (int j : ib) best = std::min(best, dist(A[i].psi[1], B[j].psi[1]));
                h = std::max(h, best);
            }
            return h;
        };
        if (pd.empty()) {
            set.gap = std::numeric_limits<double>::infinity();
        } else {
            set.gap = std::max(directed(set.chains, set.distinct, prev, pd), directed(prev, pd, set.chains, set.distinct));
        }
    }
    return set;
}

double chain_defect(const Decomposition& d, const LevelChain& c) {
    double worst = 0.0;
    int N = static_cast<int>(c.psi.size()) - 1;
    for (int n = 0; n < N; ++n) {
        auto lhs = mat_apply(d.M[n], c.psi[n + 1]);
        for (size_t i = 0; i < lhs.size(); ++i) {
            double want = n == 0 ? 1.0 / d.green00.value : c.psi[n][i];
            worst = std::max(worst, std::fabs(lhs[i] - want) / std::max(std::fabs(want), 1e-300));
        }
    }
    return worst;
}

Extension extend_from_hereditary(const Digraph& g, double beta, const std::vector<int>& H, const std::vector<double>& psi_on_H,
                                 int v0, const SeriesControls& ctl) {
    require_vertex(g, v0);
    int n = g.size();
    if (static_cast<int>(psi_on_H.size()) != n) fail(ErrorKind::precondition, "psi size does not match the graph");
    std::vector<char> inH = membership(g, H);
    if (inH[v0]) fail(ErrorKind::precondition, "base vertex lies in H");
    for (int v : H)
        for (int a : g.out(v))
            if (!inH[g.arrow(a).dst]) fail(ErrorKind::precondition, "H not hereditary: arrow " + g.name(v) + " -> " + g.name(g.arrow(a).dst));
    for (int v : H)
        if (std::isnan(psi_on_H[v]) || psi_on_H[v] < 0) fail(ErrorKind::precondition, "psi on H missing or negative at " + g.name(v));

    // b_u = sum over arrows u -> H of e^{-beta F} psi.
    std::vector<std::pair<int, double>> b;
    for (int u = 0; u < n; ++u) {
        if (inH[u]) continue;
        KahanSum s;
        for (int a : g.out(u)) {
            const Arrow& ar = g.arrow(a);
            if (inH[ar.dst]) s.add(ar.mult * std::exp(-beta * ar.F) * psi_on_H[ar.dst]);
        }
        if (s.sum > 0) b.emplace_back(u, s.sum);
    }
    Extension ext;
    std::vector<double> values = psi_on_H;
    std::vector<int> off;
    for (int v = 0; v < n; ++v)
        if (!inH[v]) off.push_back(v);
    if (b.empty()) {
        ext.feasible = false;
        ext.reason = "normalization impossible: no arrows into H";
        ext.base_series.status = SeriesStatus::converged;
        ext.base_series.tail_bound = 0.0;
        for (int v : off) values[v] = 0.0;
        ext.psi = make_harmonic(g, beta, v0, values);
        return ext;
    }
    WeightMatrix W(g, beta);
    Propagation p;
    p.init = b;
    p.dir = Direction::column;
    p.allowed.assign(n, 1);
    for (int v : H) p.allowed[v] = 0;
    p.targets = off;
    p.init_extends = !g.closed() || g.any_boundary();
    p.ctl = ctl;
    auto est = propagate(g, W, p);
    for (size_t i = 0; i < off.size(); ++i) values[off[i]] = est[i].value;
    size_t i0 = std::find(off.begin(), off.end(), v0) - off.begin();
    ext.base_series = est[i0];
    if (est[i0].status == SeriesStatus::diverged) {
        ext.feasible = false;
        ext.reason = "series at the base vertex diverges";
    } else if (est[i0].status == SeriesStatus::undetermined) {
        fail(ErrorKind::undetermined, "series undetermined at horizon");
    } else if (!(est[i0].value > 0)) {
        ext.feasible = false;
        ext.reason = "normalization impossible: zero at the base vertex";
    } else {
        ext.feasible = true;
    }
    ext.psi = make_harmonic(g, beta, v0, values);
    return ext;
}

double measure_of_cylinder(const Digraph& g, const HarmonicVector& m, const FinitePath& mu) {
    require_vertex(g, mu.range);
    if (!m.has(mu.range)) fail(ErrorKind::precondition, "vertex not covered: " + g.name(mu.range));
    return std::exp(-m.beta * mu.F) * m.values[mu.range];
}

double refinement_defect(const Digraph& g, const HarmonicVector& m, const FinitePath& mu) {
    double whole = measure_of_cylinder(g, m, mu);
    if (g.boundary(mu.range)) fail(ErrorKind::precondition, "range vertex is on the truncation boundary");
    KahanSum s;
    for (int a : g.out(mu.range)) {
        const Arrow& ar = g.arrow(a);
        if (!m.has(ar.dst)) fail(ErrorKind::precondition, "vertex not covered: " + g.name(ar.dst));
        s.add(ar.mult * std::exp(-m.beta * (mu.F + ar.F)) * m.values[ar.dst]);
    }
    return std::fabs(whole - s.sum) / scale_of(whole);
}

double kms_state_value(const Digraph& g, const HarmonicVector& m, const FinitePath& mu, const FinitePath& nu) {
    if (mu.source != m.base || nu.source != m.base) fail(ErrorKind::precondition, "paths not based at the base vertex");
    if (mu.arrows != nu.arrows) return 0.0;
    return measure_of_cylinder(g, m, mu);
}

DoobMatrix doob_transform(const Digraph& g, double beta, const std::vector<double>& psi) {
    if (static_cast<int>(psi.size()) != g.size()) fail(ErrorKind::precondition, "psi size does not match the graph");
    for (int v = 0; v < g.size(); ++v)
        if (!(psi[v] > 0)) fail(ErrorKind::precondition, "psi not strictly positive at " + g.name(v));
    WeightMatrix W(g, beta);
    DoobMatrix D;
    D.rows.resize(g.size());
    D.row_sums.resize(g.size());
    for (int v = 0; v < g.size(); ++v) {
        KahanSum s;
        for (int k = W.rowptr[v]; k < W.rowptr[v + 1]; ++k) {
            double p = W.val[k] * psi[W.col[k]] / psi[v];
            D.rows[v].emplace_back(W.col[k], p);
            s.add(p);
        }
        D.row_sums[v] = s.sum;
        if (!g.boundary(v)) D.max_row_defect = std::max(D.max_row_defect, std::fabs(s.sum - 1.0));
    }
    return D;
}

}  // namespace kmsgraph
