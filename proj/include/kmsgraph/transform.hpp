#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kmsgraph/families.hpp"
#include "kmsgraph/graph.hpp"
#include "kmsgraph/harmonic.hpp"
#include "kmsgraph/series.hpp"

namespace kmsgraph {

// R(v,w): paths v -> w of positive length meeting w only at the end.
SeriesEstimate simple_path_sum(const Digraph& g, double beta, int v, int w, const SeriesControls& ctl = {});

// Deletes the arrows into v0, then prunes dead ends. Vertex and arrow order
// are kept; truncation-boundary vertices are never pruned.
Digraph turn_into_source(const Digraph& g, int v0);

struct SourceTransfer {
    Digraph graph;           // domain of the output vector
    HarmonicVector psi;
    double R00 = 0.0;        // R(v0,v0)
    std::vector<double> R;   // R(v,v0) over the input graph of the forward map
};

// forward: phi on g -> psi on g^{v0}; inverse: psi on g^{v0} -> phi on g.
// The graph argument is always the original g.
SourceTransfer transfer_harmonic_source(const Digraph& g, double beta, int v0, const std::vector<double>& values,
                                        const std::string& direction, const SeriesControls& ctl = {});

struct ReturnPathEntry {
    std::string source;
    int length = 1;
    double mult = 1.0;
    double alpha = 0.0;  // sum_n A(g0)^n_{v0,source} e^{-nh}
};

struct ReturnPathPlan {
    std::string base;
    double h = 0.0;
    std::string mode = "recurrent_exact";  // | recurrent_with_loop | transient_variant
    std::vector<ReturnPathEntry> entries;
    double mass = 0.0;  // sum alpha b e^{-mh}, plus e^{-h} for the loop
    bool loop = false;
};

ReturnPathPlan plan_return_paths(const Digraph& g0, int v0, double h, const std::string& mode = "recurrent_exact",
                                 int count = 20, const SeriesControls& ctl = {});

struct ReturnPathGraphs {
    Digraph gamma;
    std::optional<Digraph> gamma_prime;  // gamma without the loop at v0
};

ReturnPathGraphs apply_return_paths(const Digraph& g0, const ReturnPathPlan& plan);

json plan_to_json(const ReturnPathPlan& p);
ReturnPathPlan plan_from_json(const json& j);

struct Attachment {
    Digraph graph;  // finite and strongly connected
    std::string anchor;
};

// Each assigned vertex v is identified with the anchor of its graph; the
// other attached vertices are named "v/x" and sit one level below v.
Digraph attach_finite(const Digraph& g, const std::map<std::string, Attachment>& assignments);

struct GlueInterval {
    double lo = 0.0, hi = 0.0;
    bool lo_closed = true, hi_closed = true;
    bool contains(double beta) const;
    bool empty() const;
};

struct GlueDiagramSpec {
    std::string kind = "car";  // width x width all-ones levels
    int width = 2;
    GlueInterval interval;
};

struct GlueSpec {
    std::vector<GlueDiagramSpec> diagrams;
    double h = 0.5;
    int slack_bits = 20;
};

GlueSpec glue_spec_from_json(const json& j);
json glue_spec_to_json(const GlueSpec& s);

// Sequences d_n, b_n, a_n (n >= 1) stored as logs; index 0 unused.
struct GlueSequences {
    std::vector<double> log_d, log_b, log_a;
};

GlueSequences glue_sequences(const GlueDiagramSpec& d, int n_max, int slack_bits);

// Verdicts of sum_n (d_n/a_n) e^{n beta} and sum_n (b_n/a_n) e^{-n beta}.
std::pair<SeriesStatus, SeriesStatus> glue_series(const GlueSequences& s, double beta, const SeriesControls& ctl = {});

struct GlueDiagram {
    std::vector<std::vector<int>> levels;  // vertex ids per materialized level
    std::vector<int> telescope;            // original level of each level
    GlueSequences seq;
    std::vector<int> vertices() const;
};

struct GlueGraph {
    Digraph graph;
    std::vector<int> spine;
    std::vector<GlueDiagram> diagrams;
};

// Spine v_0..v_depth with the diagrams attached; the level of Br^k_j is k + ceil(j/2).
GlueGraph build_glue(const GlueSpec& spec, int depth);

// The unique normalized harmonic vector of diagram k (NaN off the diagram).
std::vector<double> glue_diagram_harmonic(const GlueGraph& gg, int k, double beta);

struct GlueCount {
    double beta = 0.0;
    std::vector<char> feasible;  // per diagram
    std::vector<std::string> reasons;
    int extreme_count = 0;       // the spine measure plus feasible diagrams
};

GlueCount glue_extreme_count(const GlueGraph& gg, double beta, const SeriesControls& ctl = {});

FamilyPtr make_glue_family(const json& params);

}  // namespace kmsgraph
