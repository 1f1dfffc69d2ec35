#pragma once

#include <optional>
#include <string>

#include "kmsgraph/families.hpp"
#include "kmsgraph/graph.hpp"

namespace kmsgraph {

// A parsed graph document: an explicit finite graph or a family of truncations.
struct GraphSource {
    std::string kind;  // explicit | leveled | bratteli | family
    std::optional<Digraph> graph;
    FamilyPtr family;
    LeveledSpec leveled;
    std::string family_name;
    json family_params = json::object();

    Digraph materialize(int depth) const;
    std::string base_vertex() const;
    bool is_bratteli() const;
};

GraphSource parse_graph(const std::string& text, bool require_no_sinks = false);
GraphSource parse_graph_json(const json& doc, bool require_no_sinks = false);
json serialize_graph(const GraphSource& src);
GraphSource from_family(const std::string& name, const json& params);
GraphSource from_digraph(Digraph g);

// Explicit-form document of any truncation.
json digraph_to_json(const Digraph& g);

// Sorted keys, shortest round-trip floats.
std::string dump(const json& j, int indent = -1);

}  // namespace kmsgraph
