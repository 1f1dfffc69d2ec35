#include <algorithm>
#include <cmath>
#include <limits>

#include "kmsgraph/transform.hpp"

namespace kmsgraph {

namespace {

const double kLn2 = std::log(2.0);
const double kExact = 9007199254740992.0;  // 2^53
const double kLog2Budget = 1000.0;

std::string spine_name(long n) { return "v" + std::to_string(n); }
std::string br_name(int k, int j, int x) {
    return "B" + std::to_string(k) + ":" + std::to_string(j) + ":" + std::to_string(x);
}
int ceil_half(int j) { return (j + 1) / 2; }

// Sequence values are stored as logs; multiplicities below 2^53 are snapped
// back to integers, larger doubles are integers already.
double as_mult(long double x) {
    double d = static_cast<double>(x);
    return d < kExact ? std::round(d) : d;
}

double rounded_log(double log_x) {
    if (log_x < std::log(kExact)) return std::log(std::max(1.0, std::round(std::exp(log_x))));
    return log_x;
}

}  // namespace

bool GlueInterval::contains(double beta) const {
    bool above = lo < beta || (lo_closed && beta == lo);
    bool below = beta < hi || (hi_closed && beta == hi);
    return above && below;
}

bool GlueInterval::empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }

GlueSpec glue_spec_from_json(const json& j) {
    GlueSpec s;
    try {
        if (!j.is_object()) fail(ErrorKind::schema, "glue spec must be an object");
        s.h = j.value("h", 0.5);
        s.slack_bits = j.value("slack_bits", 20);
        if (j.contains("diagrams")) {
            for (const auto& d : j.at("diagrams")) {
                GlueDiagramSpec ds;
                ds.kind = d.value("kind", std::string("car"));
                ds.width = d.value("width", 2);
                const json& iv = d.at("interval");
                ds.interval.lo = iv.at("lo").get<double>();
                ds.interval.hi = iv.at("hi").get<double>();
                ds.interval.lo_closed = iv.value("lo_closed", true);
                ds.interval.hi_closed = iv.value("hi_closed", true);
                s.diagrams.push_back(ds);
            }
        }
    } catch (const json::exception& ex) {
        fail(ErrorKind::schema, std::string("glue spec: ") + ex.what());
    }
    if (!(s.h > 0)) fail(ErrorKind::schema, "glue spec: h must be positive");
    if (s.slack_bits < 1 || s.slack_bits > 40) fail(ErrorKind::schema, "glue spec: slack_bits must lie in [1,40]");
    for (const auto& d : s.diagrams) {
        if (d.kind != "car") fail(ErrorKind::schema, "glue spec: unknown diagram kind " + d.kind);
        if (d.width < 2) fail(ErrorKind::schema, "glue spec: width must be at least 2");
        if (!std::isfinite(d.interval.lo) || !std::isfinite(d.interval.hi))
            fail(ErrorKind::schema, "glue spec: interval endpoints must be finite");
        if (!d.interval.empty() && d.interval.lo < s.h)
            fail(ErrorKind::precondition, "glue spec: interval not contained in [h, inf)");
    }
    return s;
}

json glue_spec_to_json(const GlueSpec& s) {
    json ds = json::array();
    for (const auto& d : s.diagrams)
        ds.push_back({{"kind", d.kind},
                      {"width", d.width},
                      {"interval",
                       {{"lo", d.interval.lo}, {"hi", d.interval.hi}, {"lo_closed", d.interval.lo_closed}, {"hi_closed", d.interval.hi_closed}}}});
    return {{"h", s.h}, {"slack_bits", s.slack_bits}, {"diagrams", ds}};
}

GlueSequences glue_sequences(const GlueDiagramSpec& d, int n_max, int slack_bits) {
    GlueSequences s;
    s.log_d.assign(n_max + 1, 0.0);
    s.log_b.assign(n_max + 1, 0.0);
    s.log_a.assign(n_max + 1, 0.0);
    // d_n/a_n = e^{-n hi} n^{-2}, b_n/a_n = e^{n lo} n^{-2}; the n^{-2} factor
    // only at closed endpoints. The first terms are 1.
    const double slack = slack_bits * kLn2;
    for (int n = 2; n <= n_max; ++n) {
        double ln = std::log(static_cast<double>(n));
        s.log_d[n] = slack;
        s.log_a[n] = rounded_log(slack + n * d.interval.hi + (d.interval.hi_closed ? 2 * ln : 0.0));
        s.log_b[n] = rounded_log(s.log_a[n] + n * d.interval.lo - (d.interval.lo_closed ? 2 * ln : 0.0));
    }
    return s;
}

std::pair<SeriesStatus, SeriesStatus> glue_series(const GlueSequences& s, double beta, const SeriesControls& ctl) {
    SeriesTracker up(ctl), down(ctl);
    for (size_t n = 1; n < s.log_a.size(); ++n) {
        double x = static_cast<double>(n);
        up.add(std::exp(s.log_d[n] - s.log_a[n] + x * beta));
        down.add(std::exp(s.log_b[n] - s.log_a[n] - x * beta));
    }
    return {up.finish(false).status, down.finish(false).status};
}

std::vector<int> GlueDiagram::vertices() const {
    std::vector<int> out;
    for (const auto& l : levels) out.insert(out.end(), l.begin(), l.end());
    return out;
}

GlueGraph build_glue(const GlueSpec& spec, int depth) {
    if (depth < 0) fail(ErrorKind::precondition, "depth must be nonnegative");
    int K = static_cast<int>(spec.diagrams.size());
    GlueGraph gg;
    Digraph& g = gg.graph;
    g.family = "glue";
    g.nw_infinite_hint = false;
    gg.diagrams.resize(K);

    // Sequences and telescoping per diagram.
    for (int k = 1; k <= K; ++k) {
        const auto& ds = spec.diagrams[k - 1];
        GlueDiagram& D = gg.diagrams[k - 1];
        int J = std::max(0, 2 * (depth - k));
        D.seq = glue_sequences(ds, J + 2, spec.slack_bits);
        const double lw = std::log2(static_cast<double>(ds.width));
        auto log2a = [&](int n) { return D.seq.log_a[n] / kLn2; };
        D.telescope.assign(J + 1, 0);
        for (int j = 1; j <= J; ++j) {
            // Paths from the top to level j number width^{t_j - 1}.
            int need = static_cast<int>(std::ceil((1.0 + log2a(j + 1)) / lw + 1e-9)) + 1;
            D.telescope[j] = std::max(D.telescope[j - 1] + 1, need);
            double bits = (D.telescope[j] - 1) * lw;
            if (bits > kLog2Budget) fail(ErrorKind::resource, "telescoping exceeds depth budget");
            if (bits < 1.0 + log2a(j + 1) || (j % 2 == 0 && bits < 1.0 + log2a(j / 2 + 1)))
                fail(ErrorKind::internal, "telescoping certificate fails at level " + std::to_string(j));
        }
        D.levels.assign(k <= depth ? J + 1 : 0, {});
    }

    // Vertices ordered by level: spine first, then diagram levels.
    for (int L = 0; L <= depth; ++L) {
        gg.spine.push_back(g.add_vertex(spine_name(L), L));
        for (int k = 1; k <= K; ++k) {
            GlueDiagram& D = gg.diagrams[k - 1];
            for (int j = std::max(0, 2 * (L - k) - 1); j <= 2 * (L - k); ++j) {
                if (k + ceil_half(j) != L) continue;
                int width = j == 0 ? 1 : spec.diagrams[k - 1].width;
                for (int x = 0; x < width; ++x) D.levels[j].push_back(g.add_vertex(br_name(k, j, x), L));
            }
        }
    }

    auto pow_w = [](int w, long double e) { return std::pow(static_cast<long double>(w), e); };
    for (int n = 0; n <= depth; ++n) {
        int v = gg.spine[n];
        if (n + 1 <= depth) g.add_arrow(v, gg.spine[n + 1], 1.0, 1.0);
        else g.set_boundary(v, true);
        for (int k = 1; k <= K; ++k) {
            GlueDiagram& D = gg.diagrams[k - 1];
            int w = spec.diagrams[k - 1].width;
            if (n == k - 1 && !D.levels.empty()) g.add_arrow(v, D.levels[0][0], 1.0, 1.0);
            // Green: v_{k+i} -> Br_{2i}, d_{i+1} x_{i+1}(u) arrows to each u.
            int i = n - k;
            if (i >= 0 && 2 * i < static_cast<int>(D.levels.size())) {
                long double a = std::exp(static_cast<long double>(D.seq.log_a[i + 1]));
                long double d = std::exp(static_cast<long double>(D.seq.log_d[i + 1]));
                long double x = i == 0 ? 1.0L : std::floor(pow_w(w, D.telescope[2 * i] - 1) / a);
                if (x >= 1) for (int u : D.levels[2 * i]) g.add_arrow(v, u, as_mult(d * x), 1.0);
            }
            // Blue: v_{k+2i+1} -> Br_i, b_{i+1} y_{i+1}(u) arrows to each u.
            int r = n - k - 1;
            if (r >= 0 && r % 2 == 0) {
                int ib = r / 2;
                long double a = std::exp(static_cast<long double>(D.seq.log_a[ib + 1]));
                long double b = std::exp(static_cast<long double>(D.seq.log_b[ib + 1]));
                long double y = ib == 0 ? 1.0L : std::floor(pow_w(w, D.telescope[ib] - 1) / a);
                if (y >= 1) for (int u : D.levels[ib]) g.add_arrow(v, u, as_mult(b * y), 1.0);
            }
        }
    }
    for (int k = 1; k <= K; ++k) {
        GlueDiagram& D = gg.diagrams[k - 1];
        int w = spec.diagrams[k - 1].width;
        int J = static_cast<int>(D.levels.size()) - 1;
        for (int j = 0; j <= J; ++j) {
            for (int u : D.levels[j]) {
                if (k + 2 * j + 1 > depth) g.set_in_boundary(u, true);
                if (j == J) {
                    g.set_boundary(u, true);
                    continue;
                }
                int delta = D.telescope[j + 1] - D.telescope[j];
                double m = as_mult(pow_w(w, delta - 1));
                for (int t : D.levels[j + 1]) g.add_arrow(u, t, m, 1.0);
            }
        }
    }
    g.base = gg.spine[0];
    return gg;
}

std::vector<double> glue_diagram_harmonic(const GlueGraph& gg, int k, double beta) {
    if (k < 1 || k > static_cast<int>(gg.diagrams.size())) fail(ErrorKind::precondition, "no diagram " + std::to_string(k));
    const GlueDiagram& D = gg.diagrams[k - 1];
    const Digraph& g = gg.graph;
    std::vector<double> psi(g.size(), std::numeric_limits<double>::quiet_NaN());
    if (D.levels.empty()) return psi;
    int J = static_cast<int>(D.levels.size()) - 1;
    std::vector<double> val(g.size(), 0.0);
    std::vector<double> lg(J + 1, 0.0);
    for (int u : D.levels[J]) val[u] = 1.0;
    const double e = std::exp(-beta);
    // Pull back from the deepest level, rescaling each level to max 1.
    for (int j = J - 1; j >= 0; --j) {
        double mx = 0.0;
        for (int u : D.levels[j]) {
            KahanSum s;
            for (int a : g.out(u)) s.add(g.arrow(a).mult * e * val[g.arrow(a).dst]);
            val[u] = s.sum;
            mx = std::max(mx, s.sum);
        }
        if (!(mx > 0)) fail(ErrorKind::internal, "diagram level without descendants");
        for (int u : D.levels[j]) val[u] /= mx;
        lg[j] = lg[j + 1] + std::log(mx);
    }
    double top = val[D.levels[0][0]];
    for (int j = 0; j <= J; ++j)
        for (int u : D.levels[j]) psi[u] = val[u] * std::exp(lg[j] - lg[0]) / top;
    return psi;
}

GlueCount glue_extreme_count(const GlueGraph& gg, double beta, const SeriesControls& ctl) {
    GlueCount c;
    c.beta = beta;
    c.extreme_count = 1;  // the spine measure
    for (int k = 1; k <= static_cast<int>(gg.diagrams.size()); ++k) {
        std::vector<double> psi = glue_diagram_harmonic(gg, k, beta);
        std::vector<int> H = gg.diagrams[k - 1].vertices();
        if (H.empty()) {
            c.feasible.push_back(0);
            c.reasons.push_back("diagram not materialized");
            continue;
        }
        Extension ext = extend_from_hereditary(gg.graph, beta, H, psi, gg.spine[0], ctl);
        c.feasible.push_back(ext.feasible ? 1 : 0);
        c.reasons.push_back(ext.feasible ? "" : ext.reason);
        if (ext.feasible) ++c.extreme_count;
    }
    return c;
}

namespace {

class GlueFamily : public Family {
public:
    explicit GlueFamily(GlueSpec spec) : spec_(std::move(spec)) {}
    std::string name() const override { return "glue"; }
    json params() const override { return glue_spec_to_json(spec_); }
    Digraph truncate(int depth) const override { return build_glue(spec_, depth).graph; }
    std::string base_vertex() const override { return "v0"; }
    std::vector<std::string> ray_names() const override {
        std::vector<std::string> r{"spine"};
        for (size_t k = 1; k <= spec_.diagrams.size(); ++k) r.push_back("E" + std::to_string(k));
        return r;
    }
    std::string ray_vertex(const std::string& ray, long i) const override {
        if (ray == "spine") return spine_name(i);
        int k = diagram_of(ray);
        return i < k ? spine_name(i) : br_name(k, static_cast<int>(i - k), 0);
    }
    int depth_for_ray(const std::string& ray, long i) const override {
        if (ray == "spine") return static_cast<int>(i);
        int k = diagram_of(ray);
        return i < k ? static_cast<int>(i) : k + ceil_half(static_cast<int>(i - k));
    }

private:
    int diagram_of(const std::string& ray) const {
        if (ray.size() > 1 && ray[0] == 'E') {
            int k = std::atoi(ray.c_str() + 1);
            if (k >= 1 && k <= static_cast<int>(spec_.diagrams.size())) return k;
        }
        fail(ErrorKind::precondition, "family glue has no ray '" + ray + "'");
    }
    GlueSpec spec_;
};

}  // namespace

FamilyPtr make_glue_family(const json& params) { return std::make_shared<GlueFamily>(glue_spec_from_json(params)); }

}  // namespace kmsgraph
