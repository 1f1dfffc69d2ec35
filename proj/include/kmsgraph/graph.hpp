#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kmsgraph/error.hpp"

namespace kmsgraph {

// A bundle of parallel arrows sharing one potential value.
struct Arrow {
    int src = 0;
    int dst = 0;
    double mult = 1.0;
    double F = 0.0;
};

// Finite row-finite multigraph, possibly a truncation of an infinite one.
// boundary[v]: out-arrows of v are not all materialized.
// in_boundary[v]: some arrow into v starts at an unmaterialized vertex.
class Digraph {
public:
    int add_vertex(const std::string& name, int level = -1);
    int add_arrow(int src, int dst, double mult, double F);
    int add_arrow(const std::string& src, const std::string& dst, double mult, double F);

    int size() const { return static_cast<int>(names_.size()); }
    int arrow_count() const { return static_cast<int>(arrows_.size()); }
    const std::string& name(int v) const { return names_[v]; }
    const std::vector<std::string>& names() const { return names_; }
    int find(const std::string& name) const;
    int require(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) >= 0; }

    const Arrow& arrow(int a) const { return arrows_[a]; }
    const std::vector<Arrow>& arrows() const { return arrows_; }
    const std::vector<int>& out(int v) const { return out_[v]; }
    const std::vector<int>& in(int v) const { return in_[v]; }
    double out_multiplicity(int v) const;

    int level(int v) const { return level_[v]; }
    void set_level(int v, int level) { level_[v] = level; }
    bool has_levels() const;

    bool boundary(int v) const { return boundary_[v] != 0; }
    bool in_boundary(int v) const { return in_boundary_[v] != 0; }
    void set_boundary(int v, bool b) { boundary_[v] = b ? 1 : 0; }
    void set_in_boundary(int v, bool b) { in_boundary_[v] = b ? 1 : 0; }
    bool any_boundary() const;
    bool closed() const;  // no in-boundary vertex

    std::string family = "explicit";
    std::optional<int> base;
    // Family knowledge about the infinite graph: whether NW is infinite.
    std::optional<bool> nw_infinite_hint;

    // Sinks among non-boundary vertices.
    std::vector<int> sinks() const;
    void require_no_sinks() const;

    int base_or(const std::string& fallback) const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<Arrow> arrows_;
    std::vector<std::vector<int>> out_, in_;
    std::vector<int> level_;
    std::vector<char> boundary_, in_boundary_;
};

// Subgraph induced by a vertex subset. Vertices losing out-arrows become
// boundary, vertices losing in-arrows become in-boundary.
Digraph induced(const Digraph& g, const std::vector<int>& keep);

// Arrow-by-arrow equality including names, multiplicities and potentials.
bool graph_equal(const Digraph& a, const Digraph& b);

// Finite path as a vertex plus a sequence of arrow bundles.
struct FinitePath {
    int source = 0;
    std::vector<int> arrows;
    int range = 0;
    double F = 0.0;

    int length() const { return static_cast<int>(arrows.size()); }
};

FinitePath vertex_path(int v);
FinitePath make_path(const Digraph& g, int source, const std::vector<int>& arrows);
// Path through a vertex sequence using the first bundle between consecutive vertices.
FinitePath path_through(const Digraph& g, const std::vector<int>& vertices);
FinitePath path_concat(const FinitePath& a, const FinitePath& b);
std::vector<int> path_vertices(const Digraph& g, const FinitePath& p);

}  // namespace kmsgraph
