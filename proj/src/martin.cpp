#include "kmsgraph/martin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "kmsgraph/spectral.hpp"

namespace kmsgraph {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_vertex(const Digraph& g, int v) {
    if (v < 0 || v >= g.size()) fail(ErrorKind::precondition, "vertex not found");
}

double rel_tail(const SeriesEstimate& e) {
    if (!e.tail_bound || e.value <= 0) return 0.0;
    return *e.tail_bound / e.value;
}

}  // namespace

KernelValue martin_kernel(const Digraph& g, double beta, int v0, int v, int w, const SeriesControls& ctl) {
    require_vertex(g, v0);
    require_vertex(g, v);
    require_vertex(g, w);
    WeightMatrix W(g, beta);
    auto est = green_column(g, W, w, {v, v0}, ctl);
    KernelValue k;
    k.numerator = est[0];
    k.denominator = est[1];
    if (!k.denominator.converged()) fail(ErrorKind::undetermined, std::string("denominator series ") + status_name(k.denominator.status));
    if (!(k.denominator.value > 0)) fail(ErrorKind::precondition, "base vertex does not reach " + g.name(w));
    if (!k.numerator.converged()) fail(ErrorKind::undetermined, std::string("numerator series ") + status_name(k.numerator.status));
    k.value = k.numerator.value / k.denominator.value;
    k.error = rel_tail(k.numerator) + rel_tail(k.denominator);
    return k;
}

std::vector<double> martin_column(const Digraph& g, const WeightMatrix& W, int v0, int w, const SeriesControls& ctl) {
    std::vector<int> all(g.size());
    std::iota(all.begin(), all.end(), 0);
    auto est = green_column(g, W, w, all, ctl);
    const SeriesEstimate& den = est[v0];
    if (!den.converged()) fail(ErrorKind::undetermined, std::string("denominator series ") + status_name(den.status));
    if (!(den.value > 0)) fail(ErrorKind::precondition, "base vertex does not reach " + g.name(w));
    std::vector<double> k(g.size(), kNaN);
    for (int v = 0; v < g.size(); ++v)
        if (est[v].converged()) k[v] = est[v].value / den.value;
    return k;
}

std::vector<int> resolve_ray(const Digraph& g, const RaySpec& ray, long n) {
    std::vector<int> out;
    for (const auto& name : ray.vertices(n)) {
        int v = g.find(name);
        if (v < 0) fail(ErrorKind::precondition, "ray prefix too short: " + name + " not materialized");
        out.push_back(v);
    }
    return out;
}

RayWeight ray_weight(const Digraph& g, double beta, const std::vector<int>& prefix, const SeriesControls& ctl) {
    for (int v : prefix) require_vertex(g, v);
    if (std::set<int>(prefix.begin(), prefix.end()).size() != prefix.size())
        fail(ErrorKind::precondition, "repeated vertex in prefix");
    RayWeight rw;
    rw.prefix = prefix;
    WeightMatrix W(g, beta);
    std::vector<char> allowed(g.size(), 1);
    KahanSum acc;
    for (size_t j = 0; j + 1 < prefix.size(); ++j) {
        allowed[prefix[j]] = 0;
        Propagation p;
        p.init = {{prefix[j], 1.0}};
        p.dir = Direction::row;
        p.allowed = allowed;
        p.targets = {prefix[j + 1]};
        p.skip_zero_power = true;
        p.ctl = ctl;
        SeriesEstimate e = propagate(g, W, p).front();
        if (e.status == SeriesStatus::diverged) fail(ErrorKind::undetermined, "segment sum diverges at " + g.name(prefix[j]));
        if (!(e.value > 0)) fail(ErrorKind::precondition, "no path from " + g.name(prefix[j]) + " to " + g.name(prefix[j + 1]) + " avoiding earlier ray vertices");
        rw.segment_capped.push_back(e.status == SeriesStatus::undetermined);
        if (e.status == SeriesStatus::undetermined) rw.capped = true;
        double l = std::log(e.value);
        rw.segment_log.push_back(l);
        acc.add(l);
    }
    rw.log_value = acc.sum;
    rw.value = std::exp(acc.sum);
    return rw;
}

namespace {

struct Closure {
    bool ok = false;
    double tail = 0.0;
    std::string kind;
};

// Tail of the increments d[0..n) by an exact, geometric or power-law model.
Closure close_tail(const std::vector<double>& d, const SummabilityControls& ctl) {
    Closure c;
    int n = static_cast<int>(d.size());
    if (n < ctl.run + 1) return c;
    // Increments at rounding level count as zero.
    bool zero = true;
    for (int i = n - ctl.run; i < n; ++i)
        if (d[i] > 1e-13) zero = false;
    if (zero) {
        c.ok = true;
        c.kind = "exact";
        return c;
    }
    bool small = true;
    double r = 0.0;
    for (int i = n - ctl.run; i < n; ++i) {
        if (d[i] > ctl.cauchy_tol) small = false;
        if (d[i - 1] <= 0) {
            r = 1.0;
            break;
        }
        r = std::max(r, d[i] / d[i - 1]);
    }
    if (small && r < 1.0) {
        c.ok = true;
        c.kind = "geometric";
        c.tail = d[n - 1] * r / (1.0 - r);
        return c;
    }
    // Power law d_k ~ C k^-p fitted on the last window; needs a clear p > 1.
    int w = std::min(ctl.fit_window, n - 1);
    if (w < 8) return c;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = n - w; i < n; ++i) {
        if (d[i] <= 0) return c;
        if (d[i] > d[i - 1]) return c;
        double x = std::log(i + 1.0), y = std::log(d[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double p = -(w * sxy - sx * sy) / (w * sxx - sx * sx);
    if (!(p >= 1.5)) return c;
    c.ok = true;
    c.kind = "power_law";
    c.tail = d[n - 1] * n / (p - 1.0);
    return c;
}

}  // namespace

SummabilityReport summability(const Digraph& g, double beta, int v0, const std::vector<int>& ray,
                              const SummabilityControls& ctl) {
    require_vertex(g, v0);
    if (ray.empty()) fail(ErrorKind::precondition, "ray prefix too short");
    WeightMatrix W(g, beta);
    SeriesEstimate g00 = green_row(g, W, v0, {v0}, ctl.series).front();
    if (!g00.converged()) fail(ErrorKind::precondition, "not transient at the base vertex");
    RayWeight rw = ray_weight(g, beta, ray, ctl.series);
    auto G = green_row(g, W, v0, ray, ctl.series);

    SummabilityReport rep;
    rep.beta = beta;
    rep.ray = ray;
    double logW = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    bool exceeded = false;
    for (size_t k = 0; k < ray.size(); ++k) {
        // The trace stops at the first segment known only as a lower bound.
        if (k > 0 && rw.segment_capped[k - 1]) break;
        if (k > 0) logW += rw.segment_log[k - 1];
        if (!G[k].converged() || !(G[k].value > 0)) break;
        double t = std::log(G[k].value) - logW;
        if (!rep.log_trace.empty()) {
            double slack = 1e-9 + rel_tail(G[k]) + rel_tail(G[k - 1]);
            if (t < rep.log_trace.back() - slack)
                fail(ErrorKind::internal, "monotonicity violation at ray position " + std::to_string(k));
        }
        rep.log_trace.push_back(t);
        lo = std::min(lo, t);
        if (t - lo > ctl.log_threshold) {
            exceeded = true;
            break;
        }
    }
    rep.terms_used = static_cast<int>(rep.log_trace.size());
    if (rep.log_trace.empty()) fail(ErrorKind::undetermined, "Green series along the ray undetermined");
    rep.log_limit = rep.log_trace.back();
    if (exceeded) {
        rep.verdict = "not_summable";
        return rep;
    }
    std::vector<double> d;
    for (size_t k = 1; k < rep.log_trace.size(); ++k) d.push_back(std::max(0.0, rep.log_trace[k] - rep.log_trace[k - 1]));
    Closure c = close_tail(d, ctl);
    if (!c.ok) {
        rep.verdict = "undetermined";
        return rep;
    }
    rep.verdict = "summable";
    rep.closure = c.kind;
    rep.tail_bound = c.tail;
    rep.log_limit += c.tail;

    int wk = ray[rep.log_trace.size() - 1];
    std::vector<double> col = martin_column(g, W, v0, wk, ctl.series);
    // The kernel at the deepest vertex is harmonic away from that vertex.
    col[wk] = kNaN;
    col[v0] = 1.0;
    rep.psi = make_harmonic(g, beta, v0, col);
    return rep;
}

HarmonicVector extremal_measure_along_ray(const Digraph& g, double beta, int v0, const std::vector<int>& ray,
                                          const SummabilityControls& ctl) {
    SummabilityReport rep = summability(g, beta, v0, ray, ctl);
    if (rep.verdict != "summable") fail(ErrorKind::precondition, "ray is " + rep.verdict);
    return *rep.psi;
}

BoundaryLimitReport boundary_limit_test(const Digraph& g, double beta, int v0, const std::vector<int>& ray,
                                        const HarmonicVector& m, const std::vector<int>& sample,
                                        const std::vector<int>& schedule, double tol, const SeriesControls& ctl) {
    if (!m.has(v0) || !(m.values[v0] > 0)) fail(ErrorKind::precondition, "measure vanishes at the base vertex");
    BoundaryLimitReport rep;
    rep.sample = sample;
    rep.schedule = schedule;
    rep.kernel.assign(sample.size(), {});
    rep.deviation.assign(sample.size(), {});
    WeightMatrix W(g, beta);
    for (int k : schedule) {
        if (k < 0 || k >= static_cast<int>(ray.size())) fail(ErrorKind::precondition, "ray prefix too short");
        std::vector<int> targets = sample;
        targets.push_back(v0);
        auto est = green_column(g, W, ray[k], targets, ctl);
        const SeriesEstimate& den = est.back();
        if (!den.converged() || !(den.value > 0)) fail(ErrorKind::undetermined, "Green series along the ray undetermined");
        for (size_t i = 0; i < sample.size(); ++i) {
            if (!est[i].converged()) fail(ErrorKind::undetermined, "Green series along the ray undetermined");
            if (!m.has(sample[i])) fail(ErrorKind::precondition, "vertex not covered: " + g.name(sample[i]));
            double K = est[i].value / den.value;
            double t = m.values[sample[i]] / m.values[v0];
            rep.kernel[i].push_back(K);
            rep.deviation[i].push_back(t > 0 ? std::fabs(K - t) / t : std::fabs(K));
        }
    }
    for (const auto& dv : rep.deviation) {
        for (size_t j = 1; j < dv.size(); ++j)
            if (dv[j] > dv[j - 1] + 1e-12) rep.monotone = false;
        if (!dv.empty()) rep.final_deviation = std::max(rep.final_deviation, dv.back());
    }
    rep.verdict = rep.monotone && rep.final_deviation < tol ? "consistent" : "inconsistent";
    return rep;
}

}  // namespace kmsgraph
