#include "kmsgraph/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace kmsgraph {

json jnum(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

json names_of(const Digraph& g, const std::vector<int>& vs) {
    json out = json::array();
    for (int v : vs) out.push_back(g.name(v));
    return out;
}

json levels_of(const Digraph& g, const std::vector<std::vector<int>>& levels) {
    json out = json::array();
    for (const auto& l : levels) out.push_back(names_of(g, l));
    return out;
}

json to_json(const SeriesEstimate& e) {
    json j{{"value", jnum(e.value)}, {"status", status_name(e.status)}, {"terms_used", e.terms_used}};
    j["tail_bound"] = e.tail_bound ? jnum(*e.tail_bound) : json(nullptr);
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

json to_json(const Digraph& g, const HarmonicVector& h) {
    json vals = json::object();
    for (int v = 0; v < g.size() && v < static_cast<int>(h.values.size()); ++v) vals[g.name(v)] = jnum(h.values[v]);
    return {{"beta", h.beta},
            {"base", h.base >= 0 ? json(g.name(h.base)) : json(nullptr)},
            {"normalized", h.normalized},
            {"residual_max", jnum(h.residual_max)},
            {"values", vals}};
}

json to_json(const Digraph& g, const ResidualReport& r) {
    json res = json::object();
    for (const auto& [v, d] : r.residuals) res[g.name(v)] = jnum(d);
    return {{"residuals", res},
            {"max_residual", jnum(r.max_residual)},
            {"argmax", r.argmax >= 0 ? json(g.name(r.argmax)) : json(nullptr)},
            {"excluded", names_of(g, r.excluded)},
            {"violations", names_of(g, r.violations)}};
}

json to_json(const EntropyEstimate& e) {
    return {{"estimate", jnum(e.estimate)},
            {"lower_bound", jnum(e.lower_bound)},
            {"status", e.status},
            {"core_size", e.core_size},
            {"powers_used", e.powers_used}};
}

json to_json(const RecurrenceReport& r) {
    return {{"verdict", recurrence_name(r.verdict)}, {"green", to_json(r.green)}, {"first_return", to_json(r.first_return)}};
}

json to_json(const TemperatureClassification& t) {
    return {{"nw_status", t.nw_status},
            {"shape", t.shape},
            {"loop_sign", t.loop_sign},
            {"beta0", t.beta0 ? jnum(*t.beta0) : json(nullptr)},
            {"cofinal", t.cofinal},
            {"loops_have_exits", t.loops_have_exits},
            {"nw_size", t.nw_size}};
}

json to_json(const KernelValue& k) {
    return {{"value", jnum(k.value)},
            {"numerator", to_json(k.numerator)},
            {"denominator", to_json(k.denominator)},
            {"error", jnum(k.error)}};
}

json to_json(const Digraph& g, const RayWeight& w) {
    json segs = json::array();
    for (double x : w.segment_log) segs.push_back(jnum(x));
    return {{"prefix", names_of(g, w.prefix)},
            {"segment_log", segs},
            {"log_value", jnum(w.log_value)},
            {"value", jnum(w.value)},
            {"capped", w.capped}};
}

json to_json(const Digraph& g, const SummabilityReport& s) {
    json trace = json::array();
    for (double x : s.log_trace) trace.push_back(jnum(x));
    json j{{"beta", s.beta},
           {"ray", names_of(g, s.ray)},
           {"verdict", s.verdict},
           {"log_trace", trace},
           {"log_limit", jnum(s.log_limit)},
           {"tail_bound", s.tail_bound ? jnum(*s.tail_bound) : json(nullptr)},
           {"closure", s.closure},
           {"terms_used", s.terms_used}};
    if (s.psi) j["psi"] = to_json(g, *s.psi);
    return j;
}

json to_json(const Digraph& g, const BoundaryLimitReport& b) {
    json rows = json::array();
    for (size_t i = 0; i < b.sample.size(); ++i) {
        json ks = json::array(), ds = json::array();
        for (double x : b.kernel[i]) ks.push_back(jnum(x));
        for (double x : b.deviation[i]) ds.push_back(jnum(x));
        rows.push_back({{"vertex", g.name(b.sample[i])}, {"kernel", ks}, {"deviation", ds}});
    }
    return {{"schedule", b.schedule},
            {"samples", rows},
            {"monotone", b.monotone},
            {"final_deviation", jnum(b.final_deviation)},
            {"verdict", b.verdict}};
}

json to_json(const Digraph& g, const EndApprox& e) {
    return {{"rule", e.D.rule},
            {"depth", e.depth},
            {"coherent", e.coherent},
            {"boundary", levels_of(g, e.boundary)},
            {"fingerprint", levels_of(g, e.fingerprint)}};
}

json to_json(const Digraph& g, const BratteliEnds& b) {
    json ideals = json::array();
    for (const auto& I : b.ideals)
        ideals.push_back({{"complement_top", names_of(g, I.complement_top)},
                          {"proper", I.proper},
                          {"hereditary", I.hereditary},
                          {"saturated", I.saturated},
                          {"condition_d", I.condition_d}});
    return {{"depth", b.depth}, {"counts", b.counts}, {"stabilized", b.stabilized}, {"ideals", ideals}};
}

json to_json(const Digraph& g, const MinimalityReport& m) {
    return {{"verdict", minimality_name(m.verdict)}, {"levels", levels_of(g, m.levels)}, {"witness_level", m.witness_level}};
}

json to_json(const AlmostUndirected& a) {
    return {{"yes", a.yes}, {"N", a.N}, {"arrows_tested", a.arrows_tested}, {"arrows_excluded", a.arrows_excluded}};
}

json to_json(const Digraph& g, const Decomposition& d) {
    json Ms = json::array();
    for (const auto& M : d.M) {
        json rows = json::array();
        for (const auto& r : M) {
            json row = json::array();
            for (double x : r) row.push_back(jnum(x));
            rows.push_back(row);
        }
        Ms.push_back(rows);
    }
    return {{"v0", g.name(d.v0)},
            {"beta", d.beta ? jnum(*d.beta) : json(nullptr)},
            {"rule", d.D.rule},
            {"boundary", levels_of(g, d.boundary)},
            {"M", Ms},
            {"green00", to_json(d.green00)},
            {"converged", d.converged}};
}

json to_json(const Digraph& g, const Decomposition& d, const LevelChainSet& s) {
    json chains = json::array();
    for (int i : s.distinct) {
        const LevelChain& c = s.chains[i];
        json levels = json::array();
        for (size_t k = 0; k < c.psi.size(); ++k) {
            json lv = json::object();
            for (size_t x = 0; x < c.psi[k].size() && k < d.boundary.size(); ++x)
                lv[g.name(d.boundary[k][x])] = jnum(c.psi[k][x]);
            levels.push_back(lv);
        }
        chains.push_back({{"seed", c.seed >= 0 ? json(g.name(c.seed)) : json(nullptr)},
                          {"defect", jnum(chain_defect(d, c))},
                          {"levels", levels}});
    }
    return {{"horizon", s.horizon},
            {"raw_chains", s.chains.size()},
            {"distinct", s.distinct.size()},
            {"gap", jnum(s.gap)},
            {"chains", chains}};
}

json to_json(const SourceTransfer& t) {
    return {{"R00", jnum(t.R00)}, {"graph", t.graph.family}, {"psi", to_json(t.graph, t.psi)}};
}

json to_json(const GlueCount& c) {
    json f = json::array();
    for (size_t k = 0; k < c.feasible.size(); ++k)
        f.push_back({{"diagram", k + 1}, {"feasible", c.feasible[k] != 0}, {"reason", c.reasons[k]}});
    return {{"beta", c.beta}, {"diagrams", f}, {"extreme_count", c.extreme_count}};
}

namespace {

void flatten_into(const json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        if (j.empty()) out.emplace_back(path, "{}");
        for (auto it = j.begin(); it != j.end(); ++it) flatten_into(it.value(), path + "/" + it.key(), out);
    } else if (j.is_array()) {
        if (j.empty()) out.emplace_back(path, "[]");
        for (size_t i = 0; i < j.size(); ++i) flatten_into(j[i], path + "/" + std::to_string(i), out);
    } else if (j.is_string()) {
        out.emplace_back(path, j.get<std::string>());
    } else {
        out.emplace_back(path, j.dump());
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> flatten(const json& j) {
    std::vector<std::pair<std::string, std::string>> out;
    flatten_into(j, "", out);
    return out;
}

std::string render(const json& j, const std::string& format) {
    if (format == "json") return j.dump(2) + "\n";
    auto rows = flatten(j);
    std::ostringstream os;
    if (format == "csv") {
        os << "key,value\n";
        for (const auto& [k, v] : rows) os << csv_field(k.empty() ? "/" : k) << "," << csv_field(v) << "\n";
        return os.str();
    }
    if (format == "table") {
        size_t w = 3;
        for (const auto& r : rows) w = std::max(w, r.first.size());
        for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(w)) << (k.empty() ? "/" : k) << "  " << v << "\n";
        return os.str();
    }
    fail(ErrorKind::precondition, "unknown format " + format);
}

}  // namespace kmsgraph
