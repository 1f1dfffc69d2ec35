#include "kmsgraph/ends.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "kmsgraph/families.hpp"

namespace kmsgraph {

namespace {

void require_vertex(const Digraph& g, int v) {
    if (v < 0 || v >= g.size()) fail(ErrorKind::precondition, "vertex not found");
}

// Vertices outside F from which some target is reachable through vertices
// outside F (targets outside F included).
std::vector<char> co_reach_outside(const Digraph& g, const std::vector<int>& targets, const std::vector<char>& F) {
    std::vector<char> mark(g.size(), 0);
    std::deque<int> q;
    for (int t : targets)
        if (!F[t] && !mark[t]) {
            mark[t] = 1;
            q.push_back(t);
        }
    while (!q.empty()) {
        int w = q.front();
        q.pop_front();
        for (int a : g.in(w)) {
            int u = g.arrow(a).src;
            if (!F[u] && !mark[u]) {
                mark[u] = 1;
                q.push_back(u);
            }
        }
    }
    return mark;
}

// Members of `from` with an arrow into `mark`, plus members of `direct`.
std::vector<int> entering(const Digraph& g, const std::vector<int>& from, const std::vector<char>& mark,
                          const std::vector<char>& direct) {
    std::vector<int> out;
    for (int v : from) {
        bool hit = direct[v] != 0;
        for (int a : g.out(v))
            if (!hit && mark[g.arrow(a).dst]) hit = true;
        if (hit) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> level_lists(const Digraph& g) {
    std::vector<std::vector<int>> lv;
    for (int v = 0; v < g.size(); ++v) {
        int l = g.level(v);
        if (l < 0) fail(ErrorKind::precondition, "diagram vertex without level: " + g.name(v));
        if (static_cast<int>(lv.size()) <= l) lv.resize(l + 1);
        lv[l].push_back(v);
    }
    return lv;
}

}  // namespace

std::vector<char> reach_set_avoiding(const Digraph& g, int v, const std::vector<char>& F) {
    require_vertex(g, v);
    std::vector<char> seen(g.size(), 0);
    std::deque<int> q{v};
    seen[v] = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int a : g.out(u)) {
            int w = g.arrow(a).dst;
            if (F[w] || seen[w]) continue;
            seen[w] = 1;
            q.push_back(w);
        }
    }
    return seen;
}

bool reaches_avoiding(const Digraph& g, int v, int w, const std::vector<char>& F) {
    require_vertex(g, w);
    if (v == w) return true;
    std::vector<char> seen = reach_set_avoiding(g, v, F);
    if (seen[w]) return true;
    // The endpoint itself may lie in F.
    for (int a : g.in(w))
        if (seen[g.arrow(a).src]) return true;
    return false;
}

EndApprox end_fingerprint(const Digraph& g, int v0, const std::vector<int>& ray, int depth, const EndControls& ctl) {
    if (depth < 0) fail(ErrorKind::precondition, "depth must be nonnegative");
    EndApprox e;
    e.depth = depth;
    e.D = make_exhaustion(g, v0, ctl.rule, depth + ctl.escape_horizon + 1);
    e.boundary = shell_boundaries(g, e.D, depth, ctl.escape_horizon);
    if (static_cast<int>(ray.size()) < ctl.late) fail(ErrorKind::precondition, "ray prefix too short");
    std::vector<int> late(ray.end() - ctl.late, ray.end());
    std::vector<char> deepest = membership(g, e.D.shells[depth]);
    for (int v : late)
        if (deepest[v]) fail(ErrorKind::precondition, "ray prefix too short: it has not left D_" + std::to_string(depth));
    std::vector<char> none(g.size(), 0);
    for (int n = 0; n <= depth; ++n) {
        std::vector<char> inD = membership(g, e.D.shells[n]);
        e.fingerprint.push_back(entering(g, e.boundary[n], co_reach_outside(g, late, inD), none));
    }
    for (int n = 0; n < depth; ++n)
        if (bonding_map(g, e, n, e.fingerprint[n + 1]) != e.fingerprint[n]) e.coherent = false;
    return e;
}

std::vector<int> bonding_map(const Digraph& g, const EndApprox& e, int n, const std::vector<int>& I) {
    std::vector<char> inD = membership(g, e.D.shells[n]);
    return entering(g, e.boundary[n], co_reach_outside(g, I, inD), membership(g, I));
}

bool same_end(const Digraph& g, const EndApprox& a, const Digraph& h, const EndApprox& b) {
    size_t n = std::min(a.fingerprint.size(), b.fingerprint.size());
    for (size_t k = 0; k < n; ++k) {
        std::set<std::string> x, y;
        for (int v : a.fingerprint[k]) x.insert(g.name(v));
        for (int v : b.fingerprint[k]) y.insert(h.name(v));
        if (x != y) return false;
    }
    return true;
}

bool is_reduced_prefix(const Digraph& g, const std::vector<int>& ray) {
    std::map<int, size_t> pos;
    for (size_t i = 0; i < ray.size(); ++i) pos[ray[i]] = i;
    for (size_t i = 0; i < ray.size(); ++i)
        for (int a : g.out(ray[i])) {
            auto it = pos.find(g.arrow(a).dst);
            if (it != pos.end() && it->second >= i + 2) return false;
        }
    return true;
}

namespace {

struct Window {
    std::vector<std::vector<int>> lv;
    int depth = 0;
    int bottom = 0;
};

Window make_window(const Digraph& g, int depth, int horizon) {
    check_bratteli(g);
    Window w;
    w.lv = level_lists(g);
    w.depth = depth;
    w.bottom = depth + horizon;
    if (static_cast<int>(w.lv.size()) <= w.bottom)
        fail(ErrorKind::precondition, "diagram must be materialized to depth " + std::to_string(w.bottom));
    return w;
}

// Fills flags and levels for an ideal whose complement at `depth` is J_top and
// whose part below `depth` is the forward closure `inI` (window levels only).
IdealSet evaluate(const Digraph& g, const Window& w, const std::vector<int>& J_top, std::vector<char> inI) {
    IdealSet s;
    int n = g.size();
    // Complement above `depth`: ancestors of J_top.
    std::vector<char> anc(n, 0);
    std::deque<int> q;
    for (int v : J_top) {
        anc[v] = 1;
        q.push_back(v);
    }
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int a : g.in(v)) {
            int u = g.arrow(a).src;
            if (!anc[u]) {
                anc[u] = 1;
                q.push_back(u);
            }
        }
    }
    for (int l = 0; l <= w.depth; ++l)
        for (int v : w.lv[l]) inI[v] = !anc[v];
    s.levels.resize(w.depth + 1);
    for (int l = 0; l <= w.depth; ++l)
        for (int v : w.lv[l])
            if (inI[v]) s.levels[l].push_back(v);
    s.complement_top = J_top;
    std::sort(s.complement_top.begin(), s.complement_top.end());
    s.proper = !J_top.empty();
    s.hereditary = true;
    for (int l = 0; l < w.bottom && s.hereditary; ++l)
        for (int v : w.lv[l])
            if (inI[v])
                for (int a : g.out(v))
                    if (!inI[g.arrow(a).dst]) s.hereditary = false;
    // Vertices of the complement with a complement path down to the bottom level.
    std::vector<char> alive(n, 0);
    for (int v : w.lv[w.bottom]) alive[v] = !inI[v];
    for (int l = w.bottom - 1; l >= 0; --l)
        for (int v : w.lv[l]) {
            if (inI[v]) continue;
            for (int a : g.out(v))
                if (alive[g.arrow(a).dst]) {
                    alive[v] = 1;
                    break;
                }
        }
    s.saturated = true;
    for (int l = 0; l < w.bottom; ++l)
        for (int v : w.lv[l])
            if (!inI[v] && !alive[v]) s.saturated = false;
    // Common descendants at the bottom level for every pair in J_top.
    std::vector<std::set<int>> reach;
    for (int v : J_top) {
        std::set<int> cur{v};
        for (int l = w.depth; l < w.bottom; ++l) {
            std::set<int> next;
            for (int u : cur)
                for (int a : g.out(u)) {
                    int x = g.arrow(a).dst;
                    if (alive[x]) next.insert(x);
                }
            cur.swap(next);
        }
        reach.push_back(cur);
    }
    s.condition_d = s.proper;
    for (size_t i = 0; i < reach.size() && s.condition_d; ++i)
        for (size_t j = i + 1; j < reach.size() && s.condition_d; ++j) {
            bool meet = false;
            for (int x : reach[i])
                if (reach[j].count(x)) {
                    meet = true;
                    break;
                }
            if (!meet) s.condition_d = false;
        }
    return s;
}

std::vector<char> forward_closure(const Digraph& g, const Window& w, const std::vector<int>& seed) {
    std::vector<char> inI(g.size(), 0);
    std::deque<int> q;
    for (int v : seed)
        if (!inI[v]) {
            inI[v] = 1;
            q.push_back(v);
        }
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        if (g.level(v) >= w.bottom) continue;
        for (int a : g.out(v)) {
            int x = g.arrow(a).dst;
            if (!inI[x]) {
                inI[x] = 1;
                q.push_back(x);
            }
        }
    }
    return inI;
}

}  // namespace

std::vector<IdealSet> ideal_sets_at(const Digraph& g, int depth, int horizon, int width_cap) {
    Window w = make_window(g, depth, horizon);
    const auto& top = w.lv[depth];
    int width = static_cast<int>(top.size());
    if (width > width_cap)
        fail(ErrorKind::resource, "combinatorial blowup guard: level " + std::to_string(depth) + " has " + std::to_string(width) +
                                      " vertices (cap " + std::to_string(width_cap) + ")");
    std::vector<IdealSet> out;
    for (unsigned mask = 1; mask < (1u << width); ++mask) {
        std::vector<int> J, I;
        for (int i = 0; i < width; ++i) ((mask >> i) & 1u ? J : I).push_back(top[i]);
        IdealSet s = evaluate(g, w, J, forward_closure(g, w, I));
        if (s.valid()) out.push_back(std::move(s));
    }
    return out;
}

IdealSet ideal_from_seed(const Digraph& g, const std::vector<int>& seed, int depth, int horizon) {
    Window w = make_window(g, depth, horizon);
    std::vector<char> inI = forward_closure(g, w, seed);
    // Saturate inside the window: a vertex whose successors all lie in I joins I.
    for (bool changed = true; changed;) {
        changed = false;
        for (int l = w.bottom - 1; l >= 0; --l)
            for (int v : w.lv[l]) {
                if (inI[v] || g.out(v).empty()) continue;
                bool all = true;
                for (int a : g.out(v))
                    if (!inI[g.arrow(a).dst]) all = false;
                if (all) {
                    inI[v] = 1;
                    changed = true;
                }
            }
        if (changed) inI = forward_closure(g, w, [&] {
                std::vector<int> s;
                for (int v = 0; v < g.size(); ++v)
                    if (inI[v]) s.push_back(v);
                return s;
            }());
    }
    std::vector<int> J;
    for (int v : w.lv[depth])
        if (!inI[v]) J.push_back(v);
    return evaluate(g, w, J, inI);
}

BratteliEnds bratteli_ends(const Digraph& g, int depth, int window, int horizon, int width_cap) {
    if (window < 0 || depth - window < 0) fail(ErrorKind::precondition, "stabilization window exceeds depth");
    BratteliEnds r;
    r.depth = depth;
    for (int d = depth - window; d <= depth; ++d) {
        auto ideals = ideal_sets_at(g, d, horizon, width_cap);
        r.counts.push_back(static_cast<int>(ideals.size()));
        if (d == depth) r.ideals = std::move(ideals);
    }
    r.stabilized = std::all_of(r.counts.begin(), r.counts.end(), [&](int c) { return c == r.counts.front(); });
    return r;
}

const char* minimality_name(Minimality m) {
    switch (m) {
        case Minimality::minimal: return "minimal";
        case Minimality::not_minimal: return "not_minimal";
        case Minimality::undetermined: return "undetermined";
    }
    return "undetermined";
}

namespace {

// R[n][i] = indices of levels[n+1] reachable in one step of Br(E).
MinimalityReport simplicity(const std::vector<std::vector<int>>& levels, const std::vector<std::vector<std::vector<int>>>& R,
                            int horizon) {
    MinimalityReport rep;
    rep.levels = levels;
    int depth = static_cast<int>(levels.size()) - 1;
    if (depth < horizon) {
        rep.verdict = Minimality::undetermined;
        return rep;
    }
    bool all_ok = true, some_fail = false;
    int witness = 0;
    for (int n = 0; n + horizon <= depth; ++n)
        for (size_t i = 0; i < levels[n].size(); ++i) {
            std::vector<char> cur(levels[n].size(), 0);
            cur[i] = 1;
            int hit = -1;
            for (int m = n; m < depth && hit < 0 && m < n + horizon; ++m) {
                std::vector<char> next(levels[m + 1].size(), 0);
                for (size_t a = 0; a < cur.size(); ++a)
                    if (cur[a])
                        for (int b : R[m][a]) next[b] = 1;
                cur.swap(next);
                if (std::all_of(cur.begin(), cur.end(), [](char c) { return c != 0; })) hit = m + 1;
            }
            if (hit < 0) {
                all_ok = false;
                some_fail = true;
            } else {
                witness = std::max(witness, hit);
            }
        }
    if (all_ok) {
        rep.verdict = Minimality::minimal;
        rep.witness_level = witness;
    } else {
        rep.verdict = some_fail ? Minimality::not_minimal : Minimality::undetermined;
    }
    return rep;
}

}  // namespace

MinimalityReport minimal_end_test(const Digraph& g, const EndApprox& e, int horizon) {
    std::vector<std::vector<std::vector<int>>> R;
    for (int n = 0; n < e.depth; ++n) {
        std::vector<char> inD = membership(g, e.D.shells[n]);
        const auto& cur = e.fingerprint[n];
        const auto& nxt = e.fingerprint[n + 1];
        std::vector<std::vector<int>> rows;
        for (int v : cur) {
            std::vector<char> seen = reach_set_avoiding(g, v, inD);
            std::vector<int> row;
            for (size_t j = 0; j < nxt.size(); ++j)
                if (seen[nxt[j]] && nxt[j] != v) row.push_back(static_cast<int>(j));
            rows.push_back(row);
        }
        R.push_back(rows);
    }
    return simplicity(e.fingerprint, R, horizon);
}

MinimalityReport minimal_end_test(const Digraph& g, const IdealSet& I, int horizon) {
    auto lv = level_lists(g);
    int depth = static_cast<int>(I.levels.size()) - 1;
    std::vector<std::vector<int>> J(depth + 1);
    for (int n = 0; n <= depth; ++n)
        for (int v : lv[n])
            if (!std::binary_search(I.levels[n].begin(), I.levels[n].end(), v)) J[n].push_back(v);
    std::vector<std::vector<std::vector<int>>> R;
    for (int n = 0; n < depth; ++n) {
        std::vector<std::vector<int>> rows;
        for (int v : J[n]) {
            std::vector<int> row;
            for (int a : g.out(v)) {
                auto it = std::find(J[n + 1].begin(), J[n + 1].end(), g.arrow(a).dst);
                if (it != J[n + 1].end()) row.push_back(static_cast<int>(it - J[n + 1].begin()));
            }
            rows.push_back(row);
        }
        R.push_back(rows);
    }
    return simplicity(J, R, horizon);
}

AlmostUndirected almost_undirected_test(const Digraph& g, int N_max) {
    AlmostUndirected r;
    std::set<std::pair<int, int>> done;
    for (const Arrow& a : g.arrows()) {
        if (!done.insert({a.src, a.dst}).second) continue;
        int v = a.src, w = a.dst;
        if (g.boundary(v) || g.boundary(w) || g.in_boundary(v) || g.in_boundary(w)) {
            ++r.arrows_excluded;
            continue;
        }
        // Breadth-first from w; an arrow into v closes a path of length dist + 1.
        std::map<int, int> dist{{w, 0}};
        std::deque<int> q{w};
        int found = -1;
        bool touched_boundary = false;
        while (!q.empty() && found < 0) {
            int u = q.front();
            q.pop_front();
            int du = dist[u];
            if (du >= N_max) continue;
            if (g.boundary(u)) touched_boundary = true;
            for (int b : g.out(u)) {
                int x = g.arrow(b).dst;
                if (x == v) {
                    found = du + 1;
                    break;
                }
                if (!dist.count(x)) {
                    dist[x] = du + 1;
                    q.push_back(x);
                }
            }
        }
        if (found < 0 && touched_boundary) {
            ++r.arrows_excluded;
            continue;
        }
        ++r.arrows_tested;
        if (found < 0) {
            r.yes = false;
            r.N = N_max;
            return r;
        }
        r.N = std::max(r.N, found);
    }
    r.yes = true;
    return r;
}

BratteliReduction graph_to_bratteli(const Digraph& g, int v0, const std::string& rule, int levels, std::optional<double> beta,
                                    int escape_horizon) {
    BratteliReduction out;
    out.decomposition = bratteli_decompose(g, v0, beta ? beta : std::optional<double>(0.0), rule, levels, escape_horizon);
    out.decomposition.beta = beta;
    const auto& d = out.decomposition;
    Digraph& br = out.diagram;
    br.family = "bratteli";
    std::vector<std::vector<int>> ids(levels + 1);
    for (int n = 0; n <= levels; ++n)
        for (int v : d.boundary[n]) ids[n].push_back(br.add_vertex(std::to_string(n) + ":" + g.name(v), n));
    for (int n = 0; n < levels; ++n)
        for (size_t i = 0; i < d.boundary[n].size(); ++i)
            for (size_t j = 0; j < d.boundary[n + 1].size(); ++j) {
                if (!d.reach[n][i][j]) continue;
                double M = d.M[n][i][j];
                if (beta) {
                    br.add_arrow(ids[n][i], ids[n + 1][j], 1.0, -std::log(M));
                } else {
                    bool count = d.status[n][i][j] == SeriesStatus::converged && std::fabs(M - std::round(M)) < 1e-9 && M >= 1;
                    br.add_arrow(ids[n][i], ids[n + 1][j], count ? std::round(M) : 1.0, 0.0);
                }
            }
    for (int v : ids[levels]) br.set_boundary(v, true);
    br.base = ids[0].front();
    return out;
}

std::vector<int> project_ray(const Digraph& g, const Exhaustion& D, const std::vector<int>& ray, int levels) {
    if (levels >= static_cast<int>(D.shells.size())) fail(ErrorKind::precondition, "exhaustion has too few shells");
    std::vector<int> out;
    for (int n = 0; n <= levels; ++n) {
        std::vector<char> inD = membership(g, D.shells[n]);
        if (!ray.empty() && inD[ray.back()]) fail(ErrorKind::precondition, "ray prefix too short: it has not left D_" + std::to_string(n));
        int last = -1;
        for (int v : ray)
            if (inD[v]) last = v;
        out.push_back(last);
    }
    return out;
}

}  // namespace kmsgraph
