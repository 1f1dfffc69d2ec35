#include "kmsgraph/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "kmsgraph/acceptance.hpp"
#include "kmsgraph/io.hpp"
#include "kmsgraph/report.hpp"

namespace kmsgraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Opts {
    std::string graph_file, family, params = "{}";
    double beta = kNaN;
    int depth = 16;
    double tol = kNaN;
    int max_power = 512;
    std::string format = "json";
    bool format_set = false;
    bool strict = false;
    unsigned seed = 12345;

    std::string from, to, vertex, base, ray, ray2, psi, mode, rule = "bfs", direction = "forward";
    std::string plan, spec, attach, mu, nu, sample, hereditary, preset;
    std::vector<int> schedule, only;
    std::vector<double> betas;
    int length = 20, levels = 8, horizon = 3, window = 2, end_depth = 6, max_n = 3, count = 20;
    double h = kNaN, alpha = 0.3;
    bool taboo = false, doob = false, full = false;
};

struct Outcome {
    json report;
    int code = 0;
};

using Handler = std::function<Outcome(const Opts&)>;

// ---------------------------------------------------------------- input helpers

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) fail(ErrorKind::precondition, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Inline JSON, or @path.
json json_arg(const std::string& text, const std::string& flag) {
    std::string body = !text.empty() && text[0] == '@' ? read_file(text.substr(1)) : text;
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::schema, flag + ": invalid JSON: " + e.what());
    }
}

// JSON array of names, or a comma-separated list.
std::vector<std::string> name_list(const std::string& text, const std::string& flag) {
    std::vector<std::string> out;
    if (!text.empty() && text[0] == '[') {
        json j = json_arg(text, flag);
        for (const auto& x : j) {
            if (!x.is_string()) fail(ErrorKind::schema, flag + ": expected vertex names");
            out.push_back(x.get<std::string>());
        }
        return out;
    }
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

double need_beta(const Opts& o) {
    if (std::isnan(o.beta)) fail(ErrorKind::precondition, "--beta is required");
    return o.beta;
}

double tol_or(const Opts& o, double fallback) { return std::isnan(o.tol) ? fallback : o.tol; }

SeriesControls controls(const Opts& o) {
    SeriesControls c;
    c.max_power = o.max_power;
    return c;
}

GraphSource load_source(const Opts& o) {
    if (!o.graph_file.empty() && !o.family.empty()) fail(ErrorKind::precondition, "--graph and --family are exclusive");
    if (!o.graph_file.empty()) return parse_graph(read_file(o.graph_file));
    if (!o.family.empty()) return from_family(o.family, json_arg(o.params, "--params"));
    fail(ErrorKind::precondition, "a graph is required: --graph FILE or --family NAME");
}

struct Loaded {
    GraphSource src;
    Digraph g;
    std::optional<RaySpec> ray;
};

// Materializes the graph deep enough for `ray_len` vertices of --ray.
Loaded load(const Opts& o, long ray_len = 0) {
    Loaded L{load_source(o), {}, std::nullopt};
    int depth = o.depth;
    if (ray_len > 0) {
        if (o.ray.empty()) fail(ErrorKind::precondition, "--ray is required");
        L.ray = parse_ray(o.ray, L.src.family);
        if (L.src.family) depth = std::max(depth, L.ray->depth_needed(ray_len));
    }
    L.g = L.src.materialize(depth);
    return L;
}

int vertex_or_base(const Loaded& L, const std::string& name) {
    return L.g.require(name.empty() ? L.src.base_vertex() : name);
}

std::vector<double> psi_values(const Digraph& g, const std::string& text) {
    if (text.empty()) fail(ErrorKind::precondition, "--psi is required");
    json j = json_arg(text, "--psi");
    if (j.is_object() && j.contains("values")) j = j["values"];
    if (!j.is_object()) fail(ErrorKind::schema, "--psi: expected an object of vertex values");
    std::map<std::string, double> m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number()) fail(ErrorKind::schema, "--psi: value of " + it.key() + " is not a number");
        m[it.key()] = it.value().get<double>();
    }
    return values_from_map(g, m);
}

FinitePath path_arg(const Digraph& g, const std::string& text, const std::string& flag) {
    auto names = name_list(text, flag);
    if (names.empty()) fail(ErrorKind::precondition, flag + " is required");
    if (names.size() == 1) return vertex_path(g.require(names[0]));
    std::vector<int> vs;
    for (const auto& n : names) vs.push_back(g.require(n));
    return path_through(g, vs);
}

SummabilityControls summability_controls(const Opts& o) {
    SummabilityControls s;
    s.series = controls(o);
    s.cauchy_tol = tol_or(o, s.cauchy_tol);
    return s;
}

EndControls end_controls(const Opts& o) {
    EndControls c;
    c.rule = o.rule;
    c.escape_horizon = o.horizon;
    return c;
}

// ---------------------------------------------------------------- verbs

Outcome v_parse(const Opts& o) {
    Loaded L = load(o);
    json j{{"source", serialize_graph(L.src)},
           {"depth", o.depth},
           {"vertices", L.g.size()},
           {"arrows", L.g.arrow_count()},
           {"base", L.src.base_vertex()},
           {"closed", L.g.closed()},
           {"sinks", names_of(L.g, L.g.sinks())}};
    if (o.full) j["graph"] = digraph_to_json(L.g);
    return {j};
}

Outcome v_green(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    int v = vertex_or_base(L, o.from), w = vertex_or_base(L, o.to);
    SeriesEstimate e = o.taboo ? simple_path_sum(L.g, beta, v, w, controls(o)) : green_function(L.g, beta, v, w, controls(o));
    json j = to_json(e);
    j["beta"] = beta;
    j["from"] = L.g.name(v);
    j["to"] = L.g.name(w);
    j["kind"] = o.taboo ? "simple_path_sum" : "green";
    return {j};
}

Outcome v_entropy(const Opts& o) {
    Loaded L = load(o);
    int v = vertex_or_base(L, o.vertex);
    json j = to_json(gurevich_entropy(L.g, v, controls(o)));
    j["vertex"] = L.g.name(v);
    return {j};
}

Outcome v_first_return(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    int v = vertex_or_base(L, o.vertex);
    json j = to_json(first_return_series(L.g, beta, v, controls(o)));
    j["beta"] = beta;
    j["vertex"] = L.g.name(v);
    return {j};
}

Outcome v_classify(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    int v = vertex_or_base(L, o.vertex);
    json j = to_json(classify_recurrence(L.g, beta, v, controls(o), tol_or(o, 1e-9)));
    j["beta"] = beta;
    j["vertex"] = L.g.name(v);
    return {j};
}

Outcome v_beta_set(const Opts& o) {
    Loaded L = load(o);
    return {to_json(classify_beta_set(L.g, tol_or(o, 1e-12)))};
}

Outcome v_harmonic_verify(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    auto psi = psi_values(L.g, o.psi);
    std::string mode = o.mode.empty() ? "harmonic" : o.mode;
    json j = to_json(L.g, verify_harmonic(L.g, beta, psi, mode, tol_or(o, 1e-9)));
    j["beta"] = beta;
    j["mode"] = mode;
    if (o.doob) {
        DoobMatrix P = doob_transform(L.g, beta, psi);
        json rs = json::object();
        for (int v = 0; v < L.g.size(); ++v)
            if (!std::isnan(P.row_sums[v])) rs[L.g.name(v)] = jnum(P.row_sums[v]);
        j["doob"] = {{"row_sums", rs}, {"max_row_defect", jnum(P.max_row_defect)}};
    }
    return {j};
}

Outcome v_delta_solve(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    int v0 = vertex_or_base(L, o.base);
    if (!o.hereditary.empty()) {
        std::vector<int> H;
        for (const auto& n : name_list(o.hereditary, "--hereditary")) H.push_back(L.g.require(n));
        auto all = psi_values(L.g, o.psi);
        std::vector<double> on_H;
        for (int v : H) on_H.push_back(all[v]);
        Extension ext = extend_from_hereditary(L.g, beta, H, on_H, v0, controls(o));
        json j{{"feasible", ext.feasible}, {"reason", ext.reason}, {"base_series", to_json(ext.base_series)}};
        if (ext.feasible) j["psi"] = to_json(L.g, ext.psi);
        return {j};
    }
    Decomposition d = bratteli_decompose(L.g, v0, beta, o.rule, o.levels, o.horizon, controls(o));
    LevelChainSet s = solve_level_chain(d, o.levels);
    json j = to_json(L.g, d, s);
    json bounds = json::array();
    for (double x : normalization_bounds(L.g, beta, v0, o.levels)) bounds.push_back(jnum(x));
    j["normalization_bounds"] = bounds;
    j["beta"] = beta;
    if (o.full) j["decomposition"] = to_json(L.g, d);
    return {j};
}

Outcome v_martin(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    int v0 = vertex_or_base(L, o.base), v = vertex_or_base(L, o.from);
    if (o.to.empty()) fail(ErrorKind::precondition, "--to is required");
    int w = L.g.require(o.to);
    json j = to_json(martin_kernel(L.g, beta, v0, v, w, controls(o)));
    j["beta"] = beta;
    j["base"] = L.g.name(v0);
    j["from"] = L.g.name(v);
    j["to"] = L.g.name(w);
    return {j};
}

Outcome v_ray_weight(const Opts& o) {
    Loaded L = load(o, o.length);
    double beta = need_beta(o);
    auto prefix = resolve_ray(L.g, *L.ray, o.length);
    json j = to_json(L.g, ray_weight(L.g, beta, prefix, controls(o)));
    j["beta"] = beta;
    return {j};
}

Outcome v_summability(const Opts& o) {
    Loaded L = load(o, o.length);
    double beta = need_beta(o);
    auto prefix = resolve_ray(L.g, *L.ray, o.length);
    return {to_json(L.g, summability(L.g, beta, vertex_or_base(L, o.base), prefix, summability_controls(o)))};
}

Outcome v_extremal_ray(const Opts& o) {
    Loaded L = load(o, o.length);
    double beta = need_beta(o);
    auto prefix = resolve_ray(L.g, *L.ray, o.length);
    HarmonicVector h = extremal_measure_along_ray(L.g, beta, vertex_or_base(L, o.base), prefix, summability_controls(o));
    return {to_json(L.g, h)};
}

Outcome v_boundary_test(const Opts& o) {
    std::vector<int> schedule = o.schedule;
    if (schedule.empty()) schedule = {std::max(1, o.length / 4), std::max(1, o.length / 2), o.length};
    long n = *std::max_element(schedule.begin(), schedule.end());
    Loaded L = load(o, n);
    double beta = need_beta(o);
    int v0 = vertex_or_base(L, o.base);
    auto prefix = resolve_ray(L.g, *L.ray, n);
    HarmonicVector m = make_harmonic(L.g, beta, v0, psi_values(L.g, o.psi));
    std::vector<int> sample;
    for (const auto& s : name_list(o.sample, "--sample")) sample.push_back(L.g.require(s));
    if (sample.empty()) fail(ErrorKind::precondition, "--sample is required");
    auto r = boundary_limit_test(L.g, beta, v0, prefix, m, sample, schedule, tol_or(o, 1e-3), controls(o));
    return {to_json(L.g, r)};
}

Outcome v_ends(const Opts& o) {
    Opts deeper = o;
    if (!o.ray2.empty()) {
        GraphSource s = load_source(o);
        if (s.family) deeper.depth = std::max(o.depth, parse_ray(o.ray2, s.family).depth_needed(o.length));
    }
    Loaded L = load(deeper, o.length);
    int v0 = vertex_or_base(L, o.base);
    auto prefix = resolve_ray(L.g, *L.ray, o.length);
    EndApprox e = end_fingerprint(L.g, v0, prefix, o.end_depth, end_controls(o));
    json j = to_json(L.g, e);
    if (!o.ray2.empty()) {
        RaySpec r2 = parse_ray(o.ray2, L.src.family);
        EndApprox e2 = end_fingerprint(L.g, v0, resolve_ray(L.g, r2, o.length), o.end_depth, end_controls(o));
        j["other"] = to_json(L.g, e2);
        j["same_end"] = same_end(L.g, e, L.g, e2);
    }
    return {j};
}

Outcome v_bratteli_ends(const Opts& o) {
    Opts deeper = o;
    deeper.depth = o.depth + o.horizon;  // ideals are tested below the deepest level
    Loaded L = load(deeper);
    return {to_json(L.g, bratteli_ends(L.g, o.depth, o.window, o.horizon))};
}

Outcome v_minimal_end(const Opts& o) {
    Loaded L = load(o, o.length);
    int v0 = vertex_or_base(L, o.base);
    auto prefix = resolve_ray(L.g, *L.ray, o.length);
    EndApprox e = end_fingerprint(L.g, v0, prefix, o.end_depth, end_controls(o));
    json j = to_json(L.g, minimal_end_test(L.g, e, o.horizon));
    j["end"] = to_json(L.g, e);
    return {j};
}

Outcome v_almost_undirected(const Opts& o) {
    Loaded L = load(o);
    return {to_json(almost_undirected_test(L.g, o.max_n))};
}

Outcome v_to_bratteli(const Opts& o) {
    Loaded L = load(o, o.ray.empty() ? 0 : o.length);
    int v0 = vertex_or_base(L, o.base);
    std::optional<double> beta;
    if (!std::isnan(o.beta)) beta = o.beta;
    BratteliReduction r = graph_to_bratteli(L.g, v0, o.rule, o.levels, beta, o.horizon);
    json j{{"diagram", digraph_to_json(r.diagram)}, {"decomposition", to_json(L.g, r.decomposition)}};
    if (L.ray) j["projected_ray"] = names_of(L.g, project_ray(L.g, r.decomposition.D, resolve_ray(L.g, *L.ray, o.length), o.levels));
    return {j};
}

Outcome v_source_turn(const Opts& o) {
    Loaded L = load(o);
    return {digraph_to_json(turn_into_source(L.g, vertex_or_base(L, o.vertex)))};
}

Outcome v_transfer(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    int v0 = vertex_or_base(L, o.vertex);
    return {to_json(transfer_harmonic_source(L.g, beta, v0, psi_values(L.g, o.psi), o.direction, controls(o)))};
}

Outcome v_plan_returns(const Opts& o) {
    Loaded L = load(o);
    if (std::isnan(o.h)) fail(ErrorKind::precondition, "--entropy is required");
    std::string mode = o.mode.empty() ? "recurrent_exact" : o.mode;
    return {plan_to_json(plan_return_paths(L.g, vertex_or_base(L, o.vertex), o.h, mode, o.count, controls(o)))};
}

Outcome v_apply_returns(const Opts& o) {
    Loaded L = load(o);
    if (o.plan.empty()) fail(ErrorKind::precondition, "--plan is required");
    ReturnPathGraphs r = apply_return_paths(L.g, plan_from_json(json_arg(o.plan, "--plan")));
    json j{{"gamma", digraph_to_json(r.gamma)}};
    j["gamma_prime"] = r.gamma_prime ? digraph_to_json(*r.gamma_prime) : json(nullptr);
    return {j};
}

Outcome v_attach(const Opts& o) {
    Loaded L = load(o);
    if (o.attach.empty()) fail(ErrorKind::precondition, "--attach is required");
    json spec = json_arg(o.attach, "--attach");
    if (!spec.is_object()) fail(ErrorKind::schema, "--attach: expected {vertex: {graph, anchor}}");
    std::map<std::string, Attachment> as;
    for (auto it = spec.begin(); it != spec.end(); ++it) {
        const json& a = it.value();
        if (!a.is_object() || !a.contains("graph") || !a.contains("anchor") || !a["anchor"].is_string())
            fail(ErrorKind::schema, "--attach: entry " + it.key() + " needs graph and anchor");
        as[it.key()] = Attachment{parse_graph_json(a["graph"]).materialize(o.depth), a["anchor"].get<std::string>()};
    }
    return {digraph_to_json(attach_finite(L.g, as))};
}

Outcome v_glue(const Opts& o) {
    std::string text = !o.spec.empty() ? o.spec : o.params;
    if (text.empty() || text == "{}") fail(ErrorKind::precondition, "--spec is required");
    GlueSpec spec = glue_spec_from_json(json_arg(text, "--spec"));
    std::vector<double> betas = o.betas;
    if (!std::isnan(o.beta)) betas.push_back(o.beta);
    if (betas.empty()) fail(ErrorKind::precondition, "--beta or --betas is required");
    GlueGraph gg = build_glue(spec, o.depth);
    json counts = json::array(), series = json::array();
    for (double b : betas) {
        counts.push_back(to_json(glue_extreme_count(gg, b, controls(o))));
        json per = json::array();
        for (const auto& d : gg.diagrams) {
            auto [s1, s2] = glue_series(d.seq, b, controls(o));
            per.push_back({{"first", status_name(s1)}, {"second", status_name(s2)}});
        }
        series.push_back({{"beta", b}, {"diagrams", per}});
    }
    return {json{{"spec", glue_spec_to_json(spec)},
                 {"depth", o.depth},
                 {"vertices", gg.graph.size()},
                 {"counts", counts},
                 {"series", series}}};
}

Outcome v_kms(const Opts& o) {
    Loaded L = load(o);
    double beta = need_beta(o);
    int v0 = vertex_or_base(L, o.base);
    HarmonicVector m = make_harmonic(L.g, beta, v0, psi_values(L.g, o.psi));
    FinitePath mu = path_arg(L.g, o.mu, "--mu");
    FinitePath nu = o.nu.empty() ? mu : path_arg(L.g, o.nu, "--nu");
    return {json{{"beta", beta},
                 {"mu", names_of(L.g, path_vertices(L.g, mu))},
                 {"nu", names_of(L.g, path_vertices(L.g, nu))},
                 {"cylinder_mu", jnum(measure_of_cylinder(L.g, m, mu))},
                 {"cylinder_nu", jnum(measure_of_cylinder(L.g, m, nu))},
                 {"refinement_defect", jnum(refinement_defect(L.g, m, mu))},
                 {"state", jnum(kms_state_value(L.g, m, mu, nu))}}};
}

// Pascal grid: kernels along the alpha ray against alpha^{x-1}(1-alpha)^{y-1}e^{beta(x+y-2)}.
Outcome example_pascal_boundary(const Opts& o) {
    double beta = std::isnan(o.beta) ? 1.0 : o.beta;
    FamilyPtr fam = make_family("pascal", json::object());
    std::ostringstream spec;
    spec << "alpha:" << o.alpha;
    RaySpec ray = family_ray(fam, spec.str());
    std::vector<int> schedule = o.schedule.empty() ? std::vector<int>{20, 40, 80} : o.schedule;
    int n = *std::max_element(schedule.begin(), schedule.end());
    Digraph g = fam->truncate(ray.depth_needed(n));
    int v0 = g.require("(1,1)");
    auto prefix = resolve_ray(g, ray, n);
    std::vector<int> sample;
    for (const char* s : {"(1,1)", "(2,1)", "(1,2)", "(2,2)", "(3,1)", "(1,3)"}) sample.push_back(g.require(s));
    HarmonicVector m = make_harmonic(g, beta, v0, pascal_alpha_vector(g, o.alpha, beta));
    double tol = tol_or(o, 1e-3);
    auto r = boundary_limit_test(g, beta, v0, prefix, m, sample, schedule, tol, controls(o));
    json rows = json::array();
    for (size_t i = 0; i < sample.size(); ++i) {
        json row{{"vertex", g.name(sample[i])}, {"expected", jnum(m.values[sample[i]] / m.values[v0])}};
        for (size_t k = 0; k < schedule.size(); ++k) {
            row["K@" + std::to_string(schedule[k])] = jnum(r.kernel[i][k]);
            row["dev@" + std::to_string(schedule[k])] = jnum(r.deviation[i][k]);
        }
        rows.push_back(row);
    }
    bool pass = r.monotone && r.final_deviation < tol;
    json j{{"preset", "pascal-boundary"},
           {"alpha", o.alpha},
           {"beta", beta},
           {"rows", rows},
           {"monotone", r.monotone},
           {"max_deviation", jnum(r.final_deviation)},
           {"tolerance", tol},
           {"pass", pass}};
    return {j, pass ? 0 : 1};
}

const std::vector<std::pair<std::string, int>>& presets() {
    static const std::vector<std::pair<std::string, int>> p{
        {"pascal-closed-form", 1}, {"pascal-harmonic", 2}, {"pascal-boundary", 3}, {"golden", 4},
        {"ray-return", 5},         {"source-turn", 6},     {"car-phase", 7},       {"dihedral", 8},
        {"three-exit", 9},         {"glue", 10},           {"properties", 11}};
    return p;
}

Outcome v_example(const Opts& o) {
    if (o.preset == "pascal-boundary") return example_pascal_boundary(o);
    for (const auto& [name, id] : presets()) {
        if (name != o.preset) continue;
        std::ostringstream sink;
        auto r = run_acceptance(sink, {id}, o.seed).at(0);
        return {json{{"preset", name}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail},
                     {"seconds", r.seconds}, {"budget", r.budget}},
                r.pass ? 0 : 1};
    }
    std::string names;
    for (const auto& p : presets()) names += (names.empty() ? "" : ", ") + p.first;
    fail(ErrorKind::precondition, "unknown preset " + o.preset + " (known: " + names + ")");
}

bool has_undetermined(const json& j) {
    if (j.is_string()) return j.get<std::string>() == "undetermined";
    if (j.is_structured())
        for (const auto& x : j)
            if (has_undetermined(x)) return true;
    return false;
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::schema:
        case ErrorKind::precondition: return 2;
        case ErrorKind::undetermined: return 3;
        default: return 1;
    }
}

// ---------------------------------------------------------------- option wiring

using OptionAdder = std::function<void(CLI::App*, Opts&)>;

const std::map<std::string, OptionAdder>& option_adders() {
    static const std::map<std::string, OptionAdder> m{
        {"from", [](CLI::App* a, Opts& o) { a->add_option("--from", o.from, "Source vertex (default: base)"); }},
        {"to", [](CLI::App* a, Opts& o) { a->add_option("--to", o.to, "Target vertex"); }},
        {"vertex", [](CLI::App* a, Opts& o) { a->add_option("--vertex", o.vertex, "Vertex (default: base)"); }},
        {"base", [](CLI::App* a, Opts& o) { a->add_option("--base", o.base, "Base vertex v0 (default: graph base)"); }},
        {"ray", [](CLI::App* a, Opts& o) {
             a->add_option("--ray", o.ray, "Ray: family ray name, or 'a,b;c,d' (preamble;periodic block)");
             a->add_option("--length", o.length, "Ray prefix length")->check(CLI::PositiveNumber);
         }},
        {"ray2", [](CLI::App* a, Opts& o) { a->add_option("--ray2", o.ray2, "Second ray to compare ends with"); }},
        {"psi", [](CLI::App* a, Opts& o) { a->add_option("--psi", o.psi, "Vector as JSON {vertex: value} or @file"); }},
        {"mode", [](CLI::App* a, Opts& o) { a->add_option("--mode", o.mode, "Mode"); }},
        {"rule", [](CLI::App* a, Opts& o) {
             a->add_option("--rule", o.rule, "Exhaustion rule")->check(CLI::IsMember({"bfs", "levels"}));
         }},
        {"levels", [](CLI::App* a, Opts& o) { a->add_option("--levels", o.levels, "Number of exhaustion levels")->check(CLI::PositiveNumber); }},
        {"horizon", [](CLI::App* a, Opts& o) { a->add_option("--horizon", o.horizon, "Escape or reachability horizon")->check(CLI::NonNegativeNumber); }},
        {"window", [](CLI::App* a, Opts& o) { a->add_option("--window", o.window, "Stabilization window")->check(CLI::NonNegativeNumber); }},
        {"end-depth", [](CLI::App* a, Opts& o) { a->add_option("--end-depth", o.end_depth, "Fingerprint depth")->check(CLI::PositiveNumber); }},
        {"max-n", [](CLI::App* a, Opts& o) { a->add_option("--max-n", o.max_n, "Largest return length N")->check(CLI::PositiveNumber); }},
        {"direction", [](CLI::App* a, Opts& o) {
             a->add_option("--direction", o.direction, "Transfer direction")->check(CLI::IsMember({"forward", "inverse"}));
         }},
        {"h", [](CLI::App* a, Opts& o) { a->add_option("--entropy", o.h, "Target entropy h"); }},
        {"count", [](CLI::App* a, Opts& o) { a->add_option("--count", o.count, "Number of return paths")->check(CLI::PositiveNumber); }},
        {"plan", [](CLI::App* a, Opts& o) { a->add_option("--plan", o.plan, "Plan JSON or @file"); }},
        {"spec", [](CLI::App* a, Opts& o) { a->add_option("--spec", o.spec, "Glue spec JSON or @file"); }},
        {"betas", [](CLI::App* a, Opts& o) { a->add_option("--betas", o.betas, "Inverse temperatures")->delimiter(','); }},
        {"attach", [](CLI::App* a, Opts& o) { a->add_option("--attach", o.attach, "JSON {vertex: {graph, anchor}} or @file"); }},
        {"mu", [](CLI::App* a, Opts& o) { a->add_option("--mu", o.mu, "Path as vertex list"); }},
        {"nu", [](CLI::App* a, Opts& o) { a->add_option("--nu", o.nu, "Path as vertex list (default: mu)"); }},
        {"sample", [](CLI::App* a, Opts& o) { a->add_option("--sample", o.sample, "Sample vertices (JSON array or comma list)"); }},
        {"schedule", [](CLI::App* a, Opts& o) { a->add_option("--schedule", o.schedule, "Ray indices k")->delimiter(','); }},
        {"taboo", [](CLI::App* a, Opts& o) { a->add_flag("--taboo", o.taboo, "Sum paths that visit the target only at the end"); }},
        {"doob", [](CLI::App* a, Opts& o) { a->add_flag("--doob", o.doob, "Also report Doob row sums"); }},
        {"full", [](CLI::App* a, Opts& o) { a->add_flag("--full", o.full, "Include the full graph or decomposition"); }},
        {"hereditary", [](CLI::App* a, Opts& o) {
             a->add_option("--hereditary", o.hereditary, "Extend --psi from this hereditary set instead");
         }},
        {"alpha", [](CLI::App* a, Opts& o) { a->add_option("--alpha", o.alpha, "Pascal ray slope")->check(CLI::Range(0.0, 1.0)); }},
        {"preset", [](CLI::App* a, Opts& o) { a->add_option("preset", o.preset, "Preset name")->required(); }},
        {"only", [](CLI::App* a, Opts& o) { a->add_option("--only", o.only, "Criterion ids")->delimiter(','); }},
    };
    return m;
}

struct VerbEntry {
    VerbInfo info;
    std::vector<std::string> options;
    Handler run;
};

const std::vector<VerbEntry>& verbs() {
    static const std::vector<VerbEntry> v{
        {{"parse", "graph-core", {"parse_graph", "serialize_graph"}, "Validate a graph document and summarize its truncation"},
         {"full"}, v_parse},
        {{"green", "spectral", {"green_function", "simple_path_sum"}, "Green function G(v,w), or the taboo sum with --taboo"},
         {"from", "to", "taboo"}, v_green},
        {{"entropy", "spectral", {"gurevich_entropy"}, "Gurevich entropy at a vertex"}, {"vertex"}, v_entropy},
        {{"first-return", "spectral", {"first_return_series"}, "First-return series at a vertex"}, {"vertex"}, v_first_return},
        {{"classify", "spectral", {"classify_recurrence"}, "Recurrent or transient at beta"}, {"vertex"}, v_classify},
        {{"beta-set", "spectral", {"classify_beta_set"}, "Shape of the set of KMS inverse temperatures"}, {}, v_beta_set},
        {{"harmonic-verify", "harmonic", {"verify_harmonic", "doob_transform"}, "Residuals of a vector under A(beta)"},
         {"psi", "mode", "doob"}, v_harmonic_verify},
        {{"delta-solve", "harmonic", {"bratteli_decompose", "solve_level_chain", "normalization_bounds", "extend_from_hereditary"},
          "Level chains of the exhaustion, or an extension from a hereditary set"},
         {"base", "rule", "levels", "horizon", "full", "hereditary", "psi"}, v_delta_solve},
        {{"martin", "martin", {"martin_kernel"}, "Martin kernel K(v,w) relative to a base"}, {"base", "from", "to"}, v_martin},
        {{"ray-weight", "martin", {"ray_weight"}, "Weight of a ray prefix"}, {"ray"}, v_ray_weight},
        {{"summability", "martin", {"summability"}, "Summability verdict along a ray"}, {"ray", "base"}, v_summability},
        {{"extremal-ray", "martin", {"extremal_measure_along_ray"}, "Extremal harmonic vector supported by a ray"},
         {"ray", "base"}, v_extremal_ray},
        {{"boundary-test", "martin", {"boundary_limit_test"}, "Kernel limits along a ray against a vector"},
         {"ray", "base", "psi", "sample", "schedule"}, v_boundary_test},
        {{"ends", "ends", {"end_fingerprint", "same_end"}, "End fingerprint of a ray"},
         {"ray", "ray2", "base", "rule", "horizon", "end-depth"}, v_ends},
        {{"bratteli-ends", "ends", {"bratteli_ends"}, "Ideal sets of a Bratteli diagram"}, {"window", "horizon"}, v_bratteli_ends},
        {{"minimal-end", "ends", {"minimal_end_test"}, "Minimality of the end of a ray"},
         {"ray", "base", "rule", "horizon", "end-depth"}, v_minimal_end},
        {{"almost-undirected", "ends", {"almost_undirected_test"}, "Bounded return lengths for every arrow"},
         {"max-n"}, v_almost_undirected},
        {{"to-bratteli", "ends", {"graph_to_bratteli", "project_ray"}, "Bratteli diagram of an exhaustion"},
         {"base", "rule", "levels", "horizon", "ray"}, v_to_bratteli},
        {{"source-turn", "transform", {"turn_into_source"}, "Remove the arrows into a vertex"}, {"vertex"}, v_source_turn},
        {{"transfer", "transform", {"transfer_harmonic_source"}, "Move a harmonic vector across source-turning"},
         {"vertex", "psi", "direction"}, v_transfer},
        {{"plan-returns", "transform", {"plan_return_paths"}, "Plan return paths for a target entropy"},
         {"vertex", "h", "mode", "count"}, v_plan_returns},
        {{"apply-returns", "transform", {"apply_return_paths"}, "Attach planned return paths"}, {"plan"}, v_apply_returns},
        {{"attach", "transform", {"attach_finite"}, "Attach finite strongly connected graphs"}, {"attach"}, v_attach},
        {{"glue", "transform", {"build_glue", "glue_extreme_count", "glue_series"}, "Glued Bratteli diagrams and extreme counts"},
         {"spec", "betas"}, v_glue},
        {{"kms", "harmonic", {"kms_state_value", "measure_of_cylinder", "refinement_defect"}, "KMS state and cylinder measures"},
         {"base", "psi", "mu", "nu"}, v_kms},
        {{"example", "cli", {}, "Worked example presets with expected values"}, {"preset", "alpha", "schedule"}, v_example},
        {{"selftest", "cli", {"run_acceptance"}, "Run the acceptance suite"}, {"only"}, nullptr},
    };
    return v;
}

void add_common(CLI::App* a, Opts& o) {
    a->add_option("--graph", o.graph_file, "Graph document (JSON file, '-' for stdin)");
    a->add_option("--family", o.family, "Built-in family")->check(CLI::IsMember(family_names()));
    a->add_option("--params", o.params, "Family parameters as JSON or @file");
    a->add_option("--beta", o.beta, "Inverse temperature");
    a->add_option("--depth", o.depth, "Truncation depth")->check(CLI::NonNegativeNumber);
    a->add_option("--tol", o.tol, "Tolerance")->check(CLI::PositiveNumber);
    a->add_option("--max-power", o.max_power, "Series power cap")->check(CLI::PositiveNumber);
    a->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
    a->add_flag("--strict", o.strict, "Exit 3 when a verdict is undetermined");
    a->add_option("--seed", o.seed, "Seed for randomized checks");
}

}  // namespace

const std::vector<VerbInfo>& verb_table() {
    static const std::vector<VerbInfo> t = [] {
        std::vector<VerbInfo> out;
        for (const auto& e : verbs()) out.push_back(e.info);
        return out;
    }();
    return t;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Opts o;
    CLI::App app{"Analytic invariants of weighted countable directed graphs", "kmsgraph"};
    app.require_subcommand(1);
    std::map<CLI::App*, const VerbEntry*> by_app;
    for (const auto& e : verbs()) {
        CLI::App* sub = app.add_subcommand(e.info.verb, e.info.summary);
        add_common(sub, o);
        for (const auto& key : e.options) option_adders().at(key)(sub, o);
        by_app[sub] = &e;
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }
    const VerbEntry* verb = nullptr;
    CLI::App* chosen = nullptr;
    for (auto [sub, e] : by_app)
        if (sub->parsed()) verb = e, chosen = sub;
    o.format_set = chosen->count("--format") > 0;

    try {
        if (verb->info.verb == "selftest") {
            auto results = run_acceptance(out, o.only, o.seed);
            int passed = 0;
            for (const auto& r : results) passed += r.pass ? 1 : 0;
            out << passed << "/" << results.size() << " criteria passed\n";
            return passed == static_cast<int>(results.size()) ? 0 : 1;
        }
        Outcome r = verb->run(o);
        std::string format = o.format;
        if (verb->info.verb == "example" && !o.format_set) format = "table";
        out << render(r.report, format);
        if (r.code != 0) return r.code;
        if (o.strict && has_undetermined(r.report)) {
            err << "undetermined verdict (--strict)\n";
            return 3;
        }
        return 0;
    } catch (const Error& e) {
        err << "error (" << kind_name(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        err << "error (schema): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error (internal): " << e.what() << "\n";
        return 1;
    }
}

}  // namespace kmsgraph
