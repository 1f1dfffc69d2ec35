#include "kmsgraph/transform.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "kmsgraph/spectral.hpp"

namespace kmsgraph {

namespace {

void require_vertex(const Digraph& g, int v) {
    if (v < 0 || v >= g.size()) fail(ErrorKind::precondition, "vertex not found");
}

// Copy of g keeping the flagged vertices and arrows, in order.
Digraph filtered(const Digraph& g, const std::vector<char>& keep_v, const std::vector<char>& keep_a) {
    Digraph h;
    h.family = g.family;
    h.nw_infinite_hint = g.nw_infinite_hint;
    std::vector<int> map(g.size(), -1);
    for (int v = 0; v < g.size(); ++v) {
        if (!keep_v[v]) continue;
        map[v] = h.add_vertex(g.name(v), g.level(v));
        h.set_boundary(map[v], g.boundary(v));
        h.set_in_boundary(map[v], g.in_boundary(v));
    }
    for (int a = 0; a < g.arrow_count(); ++a) {
        const Arrow& ar = g.arrow(a);
        if (keep_a[a] && map[ar.src] >= 0 && map[ar.dst] >= 0) h.add_arrow(map[ar.src], map[ar.dst], ar.mult, ar.F);
    }
    if (g.base && map[*g.base] >= 0) h.base = map[*g.base];
    return h;
}

Digraph copy_of(const Digraph& g) {
    return filtered(g, std::vector<char>(g.size(), 1), std::vector<char>(g.arrow_count(), 1));
}

void require_harmonic(const Digraph& g, double beta, const std::vector<double>& v, const char* what) {
    ResidualReport r = verify_harmonic(g, beta, v, "harmonic", 1e-8);
    if (r.max_residual > 1e-8)
        fail(ErrorKind::precondition, std::string(what) + " is not harmonic (residual " + std::to_string(r.max_residual) +
                                          " at " + g.name(r.argmax) + ")");
}

}  // namespace

SeriesEstimate simple_path_sum(const Digraph& g, double beta, int v, int w, const SeriesControls& ctl) {
    require_vertex(g, v);
    require_vertex(g, w);
    WeightMatrix W(g, beta);
    return taboo_sum(g, W, v, w, ctl);
}

Digraph turn_into_source(const Digraph& g, int v0) {
    require_vertex(g, v0);
    int n = g.size();
    std::vector<char> keep_a(g.arrow_count(), 1);
    for (int a : g.in(v0)) keep_a[a] = 0;
    std::vector<char> alive(n, 1);
    std::vector<int> outdeg(n, 0);
    for (int a = 0; a < g.arrow_count(); ++a)
        if (keep_a[a]) ++outdeg[g.arrow(a).src];
    std::deque<int> q;
    for (int v = 0; v < n; ++v)
        if (outdeg[v] == 0 && !g.boundary(v)) q.push_back(v);
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        if (!alive[v]) continue;
        alive[v] = 0;
        for (int a : g.in(v)) {
            if (!keep_a[a]) continue;
            keep_a[a] = 0;
            int u = g.arrow(a).src;
            if (alive[u] && --outdeg[u] == 0 && !g.boundary(u)) q.push_back(u);
        }
    }
    if (!alive[v0]) fail(ErrorKind::precondition, "output empty: the whole graph is dead");
    Digraph h = filtered(g, alive, keep_a);
    h.base = h.find(g.name(v0));
    return h;
}

SourceTransfer transfer_harmonic_source(const Digraph& g, double beta, int v0, const std::vector<double>& values,
                                        const std::string& direction, const SeriesControls& ctl) {
    require_vertex(g, v0);
    if (direction != "forward" && direction != "inverse")
        fail(ErrorKind::precondition, "direction must be forward or inverse");
    int n = g.size();
    WeightMatrix W(g, beta);
    Propagation p;
    p.init = {{v0, 1.0}};
    p.dir = Direction::column;
    p.allowed.assign(n, 1);
    p.allowed[v0] = 0;
    for (int v = 0; v < n; ++v) p.targets.push_back(v);
    p.skip_zero_power = true;
    p.ctl = ctl;
    auto est = propagate(g, W, p);

    SourceTransfer out;
    out.R.assign(n, 0.0);
    for (int v = 0; v < n; ++v) {
        if (!est[v].converged()) fail(ErrorKind::undetermined, "R(" + g.name(v) + ",v0) " + status_name(est[v].status));
        out.R[v] = est[v].value;
    }
    out.R00 = out.R[v0];
    if (!(out.R00 < 1.0)) fail(ErrorKind::precondition, "not transient at the base vertex: R(v0,v0) >= 1");
    double s = 1.0 - out.R00;
    Digraph src = turn_into_source(g, v0);

    if (direction == "forward") {
        if (static_cast<int>(values.size()) != n) fail(ErrorKind::precondition, "vector size does not match the graph");
        if (!(values[v0] > 0)) fail(ErrorKind::precondition, "vector vanishes at the base vertex");
        std::vector<double> phi = values;
        for (double& x : phi) x /= values[v0];
        require_harmonic(g, beta, phi, "input vector");
        std::vector<double> psi(src.size(), std::nan(""));
        for (int u = 0; u < src.size(); ++u) {
            int v = g.find(src.name(u));
            if (std::isnan(phi[v])) continue;
            double x = (phi[v] - out.R[v]) / s;
            if (x < -1e-9 * std::max(1.0, phi[v]))
                fail(ErrorKind::precondition, "negative intermediate at " + g.name(v));
            psi[u] = std::max(0.0, x);
        }
        psi[*src.base] = 1.0;
        out.psi = make_harmonic(src, beta, *src.base, psi);
        out.graph = std::move(src);
    } else {
        if (static_cast<int>(values.size()) != src.size())
            fail(ErrorKind::precondition, "vector size does not match the source-turned graph");
        int b = *src.base;
        if (!(values[b] > 0)) fail(ErrorKind::precondition, "vector vanishes at the base vertex");
        std::vector<double> psi = values;
        for (double& x : psi) x /= values[b];
        require_harmonic(src, beta, psi, "input vector");
        std::vector<double> phi(n, 0.0);
        for (int v = 0; v < n; ++v) {
            int u = src.find(g.name(v));
            double x = u >= 0 ? psi[u] : 0.0;
            phi[v] = std::isnan(x) ? x : s * x + out.R[v];
        }
        phi[v0] = 1.0;
        out.psi = make_harmonic(g, beta, v0, phi);
        out.graph = copy_of(g);
    }
    out.psi.normalized = true;
    return out;
}

namespace {

// A path from v0 through vertices with a single incoming arrow that reaches
// the truncation boundary or a length of 8.
bool unique_incoming_prefix(const Digraph& g, int v0) {
    std::vector<int> depth(g.size(), -1);
    std::vector<int> stack{v0};
    depth[v0] = 0;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (depth[u] >= 8 || (u != v0 && g.boundary(u))) return true;
        for (int a : g.out(u)) {
            int w = g.arrow(a).dst;
            if (depth[w] >= 0 || g.in_boundary(w)) continue;
            double in = 0.0;
            for (int b : g.in(w)) in += g.arrow(b).mult;
            if (in != 1.0) continue;
            depth[w] = depth[u] + 1;
            stack.push_back(w);
        }
    }
    return false;
}

}  // namespace

ReturnPathPlan plan_return_paths(const Digraph& g0, int v0, double h, const std::string& mode, int count,
                                 const SeriesControls& ctl) {
    require_vertex(g0, v0);
    if (mode != "recurrent_exact" && mode != "recurrent_with_loop" && mode != "transient_variant")
        fail(ErrorKind::precondition, "unknown mode " + mode);
    if (!(h > 0)) fail(ErrorKind::precondition, "h must be positive");
    if (count < 1) fail(ErrorKind::precondition, "count must be positive");
    if (!g0.in(v0).empty()) fail(ErrorKind::precondition, "v0 has incoming arrows");
    std::vector<int> order;
    std::vector<char> seen(g0.size(), 0);
    std::deque<int> q{v0};
    seen[v0] = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        if (u != v0) order.push_back(u);
        for (int a : g0.out(u)) {
            int w = g0.arrow(a).dst;
            if (!seen[w]) {
                seen[w] = 1;
                q.push_back(w);
            }
        }
    }
    for (int v = 0; v < g0.size(); ++v)
        if (!seen[v]) fail(ErrorKind::precondition, "vertex " + g0.name(v) + " is not reachable from v0");
    if (order.empty()) fail(ErrorKind::precondition, "no vertex besides v0");
    if (static_cast<int>(order.size()) > count) order.resize(count);
    if (mode == "transient_variant" && !unique_incoming_prefix(g0, v0))
        fail(ErrorKind::precondition, "no ray prefix with unique incoming arrows");

    WeightMatrix W(g0, h);
    auto G = green_row(g0, W, v0, order, ctl);
    for (size_t i = 0; i < order.size(); ++i) {
        if (G[i].status == SeriesStatus::diverged)
            fail(ErrorKind::precondition, "h is below the growth bound at " + g0.name(order[i]));
        if (G[i].status == SeriesStatus::undetermined)
            fail(ErrorKind::undetermined, "alpha series undetermined at " + g0.name(order[i]));
    }

    ReturnPathPlan plan;
    plan.base = g0.name(v0);
    plan.h = h;
    plan.mode = mode;
    plan.loop = mode != "recurrent_exact";
    const double eh = std::exp(-h);
    const double T = plan.loop ? 1.0 - eh : 1.0;
    KahanSum used;
    int N = static_cast<int>(order.size());
    for (int i = 0; i < N; ++i) {
        double alpha = G[i].value;
        ReturnPathEntry e;
        e.source = g0.name(order[i]);
        e.alpha = alpha;
        if (i + 1 < N) {
            // Dyadic bracket: the i-th contribution lies in (target e^{-h}, target].
            double target = T * std::ldexp(1.0, -(i + 1));
            int m = 1;
            while (alpha * std::exp(-m * h) > target) {
                if (++m > 4096) fail(ErrorKind::resource, "return path too long");
            }
            double unit = alpha * std::exp(-m * h);
            e.length = m;
            e.mult = std::floor(target / unit);
            used.add(e.mult * unit);
        } else {
            // Closure: the last term takes the remaining mass exactly.
            double R = T - used.sum;
            bool closed = false;
            for (int m = 1; m <= 512 && !closed; ++m) {
                double unit = alpha * std::exp(-m * h);
                if (unit > R) continue;
                double b = std::round(R / unit);
                if (b > 9.007199254740992e15) break;
                if (std::fabs(R - b * unit) <= 1e-13 * T) {
                    e.length = m;
                    e.mult = b;
                    closed = true;
                }
            }
            if (!closed) fail(ErrorKind::precondition, "cannot close the plan exactly");
        }
        plan.entries.push_back(e);
    }
    KahanSum mass;
    for (const auto& e : plan.entries) mass.add(e.alpha * e.mult * std::exp(-e.length * h));
    if (plan.loop) mass.add(eh);
    plan.mass = mass.sum;
    if (std::fabs(plan.mass - 1.0) > 1e-12) fail(ErrorKind::internal, "plan mass " + std::to_string(plan.mass));
    return plan;
}

ReturnPathGraphs apply_return_paths(const Digraph& g0, const ReturnPathPlan& plan) {
    int v0 = g0.require(plan.base);
    if (!g0.in(v0).empty()) fail(ErrorKind::precondition, "v0 now has incoming arrows");
    Digraph g = copy_of(g0);
    for (size_t i = 0; i < plan.entries.size(); ++i) {
        const auto& e = plan.entries[i];
        int src = g.require(e.source);
        if (e.length < 1 || !(e.mult >= 1)) fail(ErrorKind::precondition, "invalid plan entry");
        int prev = src;
        double mult = e.mult;
        for (int k = 1; k < e.length; ++k) {
            int lvl = g.level(src) >= 0 ? g.level(src) + k : -1;
            int r = g.add_vertex("ret" + std::to_string(i + 1) + ":" + std::to_string(k), lvl);
            g.add_arrow(prev, r, mult, 1.0);
            mult = 1.0;
            prev = r;
        }
        g.add_arrow(prev, v0, mult, 1.0);
    }
    g.base = v0;
    ReturnPathGraphs out;
    if (plan.loop) {
        out.gamma_prime = g;
        g.add_arrow(v0, v0, 1.0, 1.0);
    }
    out.gamma = std::move(g);
    return out;
}

json plan_to_json(const ReturnPathPlan& p) {
    json entries = json::array();
    for (const auto& e : p.entries)
        entries.push_back({{"source", e.source}, {"length", e.length}, {"mult", e.mult}, {"alpha", e.alpha}});
    return {{"base", p.base}, {"h", p.h}, {"mode", p.mode}, {"entries", entries}, {"mass", p.mass}, {"loop", p.loop}};
}

ReturnPathPlan plan_from_json(const json& j) {
    try {
        ReturnPathPlan p;
        p.base = j.at("base").get<std::string>();
        p.h = j.at("h").get<double>();
        p.mode = j.value("mode", std::string("recurrent_exact"));
        p.loop = j.value("loop", p.mode != "recurrent_exact");
        p.mass = j.value("mass", 0.0);
        for (const auto& e : j.at("entries"))
            p.entries.push_back({e.at("source").get<std::string>(), e.at("length").get<int>(), e.at("mult").get<double>(),
                                 e.value("alpha", 0.0)});
        return p;
    } catch (const json::exception& ex) {
        fail(ErrorKind::schema, std::string("plan: ") + ex.what());
    }
}

Digraph attach_finite(const Digraph& g, const std::map<std::string, Attachment>& assignments) {
    Digraph out = copy_of(g);
    std::vector<std::pair<int, const Attachment*>> todo;
    for (const auto& [name, att] : assignments) {
        int v = g.require(name);
        const Digraph& H = att.graph;
        if (H.size() == 0) fail(ErrorKind::precondition, "empty graph attached at " + name);
        if (strongly_connected_components(H).size() != 1) fail(ErrorKind::precondition, "H not strongly connected at " + name);
        if (H.any_boundary() || !H.closed()) fail(ErrorKind::precondition, "H must be finite at " + name);
        H.require(att.anchor);
        todo.emplace_back(v, &att);
    }
    std::sort(todo.begin(), todo.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [v, att] : todo) {
        const Digraph& H = att->graph;
        int anchor = H.require(att->anchor);
        std::vector<int> map(H.size(), -1);
        for (int x = 0; x < H.size(); ++x) {
            if (x == anchor) {
                map[x] = v;
                continue;
            }
            int lvl = g.level(v) >= 0 ? g.level(v) + 1 : -1;
            map[x] = out.add_vertex(g.name(v) + "/" + H.name(x), lvl);
        }
        for (const Arrow& a : H.arrows()) out.add_arrow(map[a.src], map[a.dst], a.mult, a.F);
    }
    return out;
}

}  // namespace kmsgraph
