#include "kmsgraph/graph.hpp"

#include <algorithm>
#include <cmath>

namespace kmsgraph {

const char* kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::schema: return "schema";
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::undetermined: return "undetermined";
        case ErrorKind::internal: return "internal";
        case ErrorKind::resource: return "resource";
    }
    return "unknown";
}

int Digraph::add_vertex(const std::string& name, int level) {
    auto [it, inserted] = index_.emplace(name, size());
    if (!inserted) fail(ErrorKind::schema, "duplicate vertex '" + name + "'");
    names_.push_back(name);
    out_.emplace_back();
    in_.emplace_back();
    level_.push_back(level);
    boundary_.push_back(0);
    in_boundary_.push_back(0);
    return it->second;
}

int Digraph::add_arrow(int src, int dst, double mult, double F) {
    if (src < 0 || src >= size() || dst < 0 || dst >= size())
        fail(ErrorKind::schema, "dangling endpoint");
    if (!(mult >= 1.0) || !std::isfinite(mult) || mult != std::floor(mult))
        fail(ErrorKind::schema, "multiplicity must be a positive integer");
    int a = arrow_count();
    arrows_.push_back({src, dst, mult, F});
    out_[src].push_back(a);
    in_[dst].push_back(a);
    return a;
}

int Digraph::add_arrow(const std::string& src, const std::string& dst, double mult, double F) {
    int s = find(src), d = find(dst);
    if (s < 0 || d < 0)
        fail(ErrorKind::schema, "dangling endpoint: " + (s < 0 ? src : dst));
    return add_arrow(s, d, mult, F);
}

int Digraph::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

int Digraph::require(const std::string& name) const {
    int v = find(name);
    if (v < 0) fail(ErrorKind::precondition, "vertex not found: " + name);
    return v;
}

double Digraph::out_multiplicity(int v) const {
    double m = 0;
    for (int a : out_[v]) m += arrows_[a].mult;
    return m;
}

bool Digraph::has_levels() const {
    return !level_.empty() && std::all_of(level_.begin(), level_.end(), [](int l) { return l >= 0; });
}

bool Digraph::any_boundary() const {
    return std::any_of(boundary_.begin(), boundary_.end(), [](char c) { return c != 0; });
}

bool Digraph::closed() const {
    return std::none_of(in_boundary_.begin(), in_boundary_.end(), [](char c) { return c != 0; });
}

std::vector<int> Digraph::sinks() const {
    std::vector<int> s;
    for (int v = 0; v < size(); ++v)
        if (out_[v].empty() && !boundary(v)) s.push_back(v);
    return s;
}

void Digraph::require_no_sinks() const {
    auto s = sinks();
    if (!s.empty()) fail(ErrorKind::precondition, "sink detected at vertex " + names_[s.front()]);
}

int Digraph::base_or(const std::string& fallback) const {
    if (base) return *base;
    return require(fallback);
}

Digraph induced(const Digraph& g, const std::vector<int>& keep) {
    std::vector<int> map(g.size(), -1);
    Digraph h;
    h.family = g.family;
    for (int v : keep) {
        if (map[v] >= 0) continue;
        map[v] = h.add_vertex(g.name(v), g.level(v));
        h.set_boundary(map[v], g.boundary(v));
        h.set_in_boundary(map[v], g.in_boundary(v));
    }
    for (const Arrow& a : g.arrows()) {
        int s = map[a.src], d = map[a.dst];
        if (s >= 0 && d >= 0) h.add_arrow(s, d, a.mult, a.F);
        else if (s >= 0) h.set_boundary(s, true);
        else if (d >= 0) h.set_in_boundary(d, true);
    }
    if (g.base && map[*g.base] >= 0) h.base = map[*g.base];
    return h;
}

bool graph_equal(const Digraph& a, const Digraph& b) {
    if (a.names() != b.names() || a.arrow_count() != b.arrow_count()) return false;
    for (int i = 0; i < a.arrow_count(); ++i) {
        const Arrow &x = a.arrow(i), &y = b.arrow(i);
        if (x.src != y.src || x.dst != y.dst || x.mult != y.mult || x.F != y.F) return false;
    }
    return true;
}

FinitePath vertex_path(int v) { return FinitePath{v, {}, v, 0.0}; }

FinitePath make_path(const Digraph& g, int source, const std::vector<int>& arrows) {
    FinitePath p = vertex_path(source);
    for (int a : arrows) {
        if (a < 0 || a >= g.arrow_count()) fail(ErrorKind::precondition, "unknown arrow");
        if (g.arrow(a).src != p.range) fail(ErrorKind::precondition, "arrows do not compose");
        p.arrows.push_back(a);
        p.range = g.arrow(a).dst;
        p.F += g.arrow(a).F;
    }
    return p;
}

FinitePath path_through(const Digraph& g, const std::vector<int>& vertices) {
    if (vertices.empty()) fail(ErrorKind::precondition, "empty vertex sequence");
    std::vector<int> arrows;
    for (size_t i = 0; i + 1 < vertices.size(); ++i) {
        int found = -1;
        for (int a : g.out(vertices[i]))
            if (g.arrow(a).dst == vertices[i + 1]) { found = a; break; }
        if (found < 0)
            fail(ErrorKind::precondition,
                 "no arrow " + g.name(vertices[i]) + " -> " + g.name(vertices[i + 1]));
        arrows.push_back(found);
    }
    return make_path(g, vertices.front(), arrows);
}

FinitePath path_concat(const FinitePath& a, const FinitePath& b) {
    if (a.range != b.source) fail(ErrorKind::precondition, "non-composable endpoints");
    FinitePath p = a;
    p.arrows.insert(p.arrows.end(), b.arrows.begin(), b.arrows.end());
    p.range = b.range;
    p.F = a.F + b.F;
    return p;
}

std::vector<int> path_vertices(const Digraph& g, const FinitePath& p) {
    std::vector<int> vs{p.source};
    for (int a : p.arrows) vs.push_back(g.arrow(a).dst);
    return vs;
}

}  // namespace kmsgraph
