#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "kmsgraph/graph.hpp"

namespace kmsgraph {

using json = nlohmann::json;

// A countable graph realized through coherent truncations. Depth N holds
// the vertices of level 0..N; deeper truncations only add vertices and arrows.
class Family {
public:
    virtual ~Family() = default;
    virtual std::string name() const = 0;
    virtual json params() const = 0;
    virtual Digraph truncate(int depth) const = 0;
    virtual std::string base_vertex() const = 0;
    virtual bool is_bratteli() const { return false; }
    // Largest depth the family can materialize (finite graphs stop early).
    virtual int max_depth() const { return 1 << 20; }

    virtual std::vector<std::string> ray_names() const { return {}; }
    // Vertex i (i >= 0) of a named ray.
    virtual std::string ray_vertex(const std::string& ray, long i) const;
    // Smallest depth whose truncation holds ray vertex i.
    virtual int depth_for_ray(const std::string& ray, long i) const;
};

using FamilyPtr = std::shared_ptr<const Family>;

// Builds a built-in family: pascal, dihedral-cayley, regular-tree, golden,
// single-loop, car-phase, three-exit, ray-graph, glue.
FamilyPtr make_family(const std::string& name, const json& params);
std::vector<std::string> family_names();

// One arrow bundle between consecutive levels, by index within each level.
struct LevelArrow {
    int src_idx = 0;
    int dst_idx = 0;
    double mult = 1.0;
    double F = 0.0;
};

// Level blocks from a document, continued by a tail rule.
struct LeveledSpec {
    bool bratteli = false;
    std::vector<std::vector<std::string>> levels;
    std::vector<std::vector<LevelArrow>> level_arrows;
    std::string tail = "none";  // none | repeat | family
    std::string tail_family;
    json tail_params = json::object();
};

FamilyPtr make_leveled(const LeveledSpec& spec);
// Validates the diagram shape of a Bratteli truncation.
void check_bratteli(const Digraph& g);

// Ray description: explicit eventually periodic vertex sequence or a named
// ray of a family, read from position `offset` onwards.
struct RaySpec {
    std::vector<std::string> preamble;
    std::vector<std::string> block;
    FamilyPtr family;
    std::string family_ray;
    long offset = 0;

    bool is_family() const { return family != nullptr; }
    std::string vertex(long i) const;
    // The n+1 vertices of prefix(n).
    std::vector<std::string> vertices(long n) const;
    // Depth a family truncation needs to hold prefix(n).
    int depth_needed(long n) const;
    std::string describe() const;
};

RaySpec family_ray(FamilyPtr family, const std::string& name);
RaySpec explicit_ray(std::vector<std::string> preamble, std::vector<std::string> block = {});
// Parses "name" (family ray) or "a,b,c" / "a,b;c,d" (preamble;block).
RaySpec parse_ray(const std::string& text, FamilyPtr family);
RaySpec shift(const RaySpec& p, long k);
FinitePath ray_prefix(const Digraph& g, const RaySpec& p, long n);
bool distinct_vertices(const std::vector<std::string>& vs);

}  // namespace kmsgraph
