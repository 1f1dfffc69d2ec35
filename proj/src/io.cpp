#include "kmsgraph/io.hpp"

#include <cmath>

namespace kmsgraph {

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(ErrorKind::schema, where + ": missing field '" + key + "'");
    return obj[key];
}

double number(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) fail(ErrorKind::schema, where + "." + key + ": expected number");
    return v.get<double>();
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string()) fail(ErrorKind::schema, where + "." + key + ": expected string");
    return v.get<std::string>();
}

double multiplicity(const json& obj, const std::string& where) {
    double m = obj.contains("mult") ? number(obj, "mult", where) : 1.0;
    if (m == 0) fail(ErrorKind::schema, where + ".mult: zero multiplicity");
    if (!(m >= 1) || m != std::floor(m)) fail(ErrorKind::schema, where + ".mult: expected positive integer");
    return m;
}

int index_field(const json& obj, const char* key, const std::string& where) {
    double x = number(obj, key, where);
    if (x != std::floor(x) || x < 0) fail(ErrorKind::schema, where + "." + key + ": expected nonnegative integer");
    return static_cast<int>(x);
}

}  // namespace

Digraph GraphSource::materialize(int depth) const {
    if (graph) return *graph;
    if (!family) fail(ErrorKind::internal, "empty graph source");
    return family->truncate(depth);
}

std::string GraphSource::base_vertex() const {
    if (graph) return graph->name(graph->base.value_or(0));
    return family->base_vertex();
}

bool GraphSource::is_bratteli() const { return family && family->is_bratteli(); }

GraphSource parse_graph(const std::string& text, bool require_no_sinks) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::schema, std::string("invalid JSON: ") + e.what());
    }
    return parse_graph_json(doc, require_no_sinks);
}

GraphSource parse_graph_json(const json& doc, bool require_no_sinks) {
    if (!doc.is_object()) fail(ErrorKind::schema, "document: expected object");
    std::string kind = string_field(doc, "kind", "document");
    GraphSource src;
    src.kind = kind;
    if (kind == "explicit") {
        const json& vs = field(doc, "vertices", "document");
        const json& as = field(doc, "arrows", "document");
        if (!vs.is_array()) fail(ErrorKind::schema, "document.vertices: expected array");
        if (!as.is_array()) fail(ErrorKind::schema, "document.arrows: expected array");
        Digraph g;
        for (size_t i = 0; i < vs.size(); ++i) {
            if (!vs[i].is_string()) fail(ErrorKind::schema, "vertices[" + std::to_string(i) + "]: expected string");
            g.add_vertex(vs[i].get<std::string>());
        }
        for (size_t i = 0; i < as.size(); ++i) {
            std::string where = "arrows[" + std::to_string(i) + "]";
            std::string s = string_field(as[i], "src", where), d = string_field(as[i], "dst", where);
            if (!g.contains(s) || !g.contains(d))
                fail(ErrorKind::schema, where + ": dangling endpoint '" + (g.contains(s) ? d : s) + "'");
            double F = as[i].contains("F") ? number(as[i], "F", where) : 0.0;
            g.add_arrow(g.find(s), g.find(d), multiplicity(as[i], where), F);
        }
        if (doc.contains("base_vertex")) {
            std::string b = string_field(doc, "base_vertex", "document");
            if (!g.contains(b)) fail(ErrorKind::schema, "document.base_vertex: dangling endpoint '" + b + "'");
            g.base = g.find(b);
        }
        if (require_no_sinks) g.require_no_sinks();
        src.graph = std::move(g);
        return src;
    }
    if (kind == "leveled" || kind == "bratteli") {
        LeveledSpec spec;
        spec.bratteli = kind == "bratteli";
        const json& levels = field(doc, "levels", "document");
        if (!levels.is_array()) fail(ErrorKind::schema, "document.levels: expected array");
        for (size_t n = 0; n < levels.size(); ++n) {
            std::string where = "levels[" + std::to_string(n) + "]";
            const json& vs = field(levels[n], "vertices", where);
            if (!vs.is_array()) fail(ErrorKind::schema, where + ".vertices: expected array");
            std::vector<std::string> names;
            for (const auto& v : vs) {
                if (!v.is_string()) fail(ErrorKind::schema, where + ".vertices: expected strings");
                names.push_back(v.get<std::string>());
            }
            spec.levels.push_back(names);
        }
        const json& blocks = field(doc, "level_arrows", "document");
        if (!blocks.is_array()) fail(ErrorKind::schema, "document.level_arrows: expected array");
        for (size_t n = 0; n < blocks.size(); ++n) {
            if (!blocks[n].is_array()) fail(ErrorKind::schema, "level_arrows[" + std::to_string(n) + "]: expected array");
            std::vector<LevelArrow> block;
            for (size_t i = 0; i < blocks[n].size(); ++i) {
                std::string where = "level_arrows[" + std::to_string(n) + "][" + std::to_string(i) + "]";
                const json& a = blocks[n][i];
                LevelArrow la;
                la.src_idx = index_field(a, "src_idx", where);
                la.dst_idx = index_field(a, "dst_idx", where);
                la.mult = multiplicity(a, where);
                la.F = a.contains("F") ? number(a, "F", where) : 0.0;
                block.push_back(la);
            }
            spec.level_arrows.push_back(block);
        }
        if (doc.contains("tail")) {
            const json& t = doc["tail"];
            spec.tail = string_field(t, "rule", "document.tail");
            if (spec.tail == "family") {
                spec.tail_family = string_field(t, "name", "document.tail");
                if (t.contains("params")) spec.tail_params = t["params"];
            }
        }
        src.leveled = spec;
        src.family = make_leveled(spec);
        if (require_no_sinks) src.family->truncate(static_cast<int>(spec.levels.size())).require_no_sinks();
        return src;
    }
    if (kind == "family") {
        src.family_name = string_field(doc, "name", "document");
        if (doc.contains("params")) src.family_params = doc["params"];
        src.family = make_family(src.family_name, src.family_params);
        src.family_params = src.family->params();
        return src;
    }
    fail(ErrorKind::schema, "document.kind: unknown kind '" + kind + "'");
}

GraphSource from_family(const std::string& name, const json& params) {
    json doc{{"kind", "family"}, {"name", name}, {"params", params.is_null() ? json::object() : params}};
    return parse_graph_json(doc);
}

GraphSource from_digraph(Digraph g) {
    GraphSource src;
    src.kind = "explicit";
    src.graph = std::move(g);
    return src;
}

json digraph_to_json(const Digraph& g) {
    json doc{{"kind", "explicit"}};
    doc["vertices"] = g.names();
    json arrows = json::array();
    for (const Arrow& a : g.arrows())
        arrows.push_back({{"src", g.name(a.src)}, {"dst", g.name(a.dst)}, {"mult", a.mult}, {"F", a.F}});
    doc["arrows"] = arrows;
    if (g.base) doc["base_vertex"] = g.name(*g.base);
    return doc;
}

json serialize_graph(const GraphSource& src) {
    if (src.kind == "explicit") return digraph_to_json(*src.graph);
    if (src.kind == "family") return {{"kind", "family"}, {"name", src.family_name}, {"params", src.family_params}};
    json doc{{"kind", src.kind}};
    json levels = json::array();
    for (const auto& lv : src.leveled.levels) levels.push_back({{"vertices", lv}});
    doc["levels"] = levels;
    json blocks = json::array();
    for (const auto& b : src.leveled.level_arrows) {
        json block = json::array();
        for (const auto& a : b) block.push_back({{"src_idx", a.src_idx}, {"dst_idx", a.dst_idx}, {"mult", a.mult}, {"F", a.F}});
        blocks.push_back(block);
    }
    doc["level_arrows"] = blocks;
    json tail{{"rule", src.leveled.tail}};
    if (src.leveled.tail == "family") {
        tail["name"] = src.leveled.tail_family;
        tail["params"] = src.leveled.tail_params;
    }
    doc["tail"] = tail;
    return doc;
}

std::string dump(const json& j, int indent) { return j.dump(indent); }

}  // namespace kmsgraph
