#include "kmsgraph/families.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "kmsgraph/transform.hpp"

namespace kmsgraph {

namespace {

constexpr long kMaxVertices = 4'000'000;

double param_num(const json& p, const char* key, double dflt) {
    if (!p.contains(key)) return dflt;
    if (!p[key].is_number()) fail(ErrorKind::schema, std::string("param '") + key + "' must be a number");
    return p[key].get<double>();
}

std::string fmt_int(long v) { return std::to_string(v); }

// Families described by local successor rules. Arrows may point back by at
// most max_drop() levels; such arrows flag in-boundary vertices.
class LocalFamily : public Family {
public:
    struct Succ {
        std::string name;
        double mult;
        double F;
    };

    virtual std::vector<std::string> level_vertices(int n) const = 0;
    virtual std::vector<Succ> successors(const std::string& v) const = 0;
    virtual int max_drop() const { return 0; }
    virtual long level_size_estimate(int n) const { return static_cast<long>(level_vertices(n).size()); }

    Digraph truncate(int depth) const override {
        if (depth < 0) fail(ErrorKind::precondition, "depth must be nonnegative");
        depth = std::min(depth, max_depth());
        long total = 0;
        for (int n = 0; n <= depth; ++n) {
            total += level_size_estimate(n);
            if (total > kMaxVertices)
                fail(ErrorKind::resource, name() + " cannot materialize depth " + fmt_int(depth));
        }
        Digraph g;
        g.family = name();
        for (int n = 0; n <= depth; ++n)
            for (const auto& v : level_vertices(n)) g.add_vertex(v, n);
        for (int v = 0; v < g.size(); ++v) {
            for (const auto& s : successors(g.name(v))) {
                int w = g.find(s.name);
                if (w >= 0) g.add_arrow(v, w, s.mult, s.F);
                else g.set_boundary(v, true);
            }
        }
        for (int n = depth + 1; n <= depth + max_drop() && n <= max_depth(); ++n)
            for (const auto& u : level_vertices(n))
                for (const auto& s : successors(u)) {
                    int w = g.find(s.name);
                    if (w >= 0) g.set_in_boundary(w, true);
                }
        g.base = g.find(base_vertex());
        return g;
    }
};

std::pair<long, long> parse_pair(const std::string& v) {
    long x = 0, y = 0;
    char tail = 0;
    if (std::sscanf(v.c_str(), "(%ld,%ld)%c", &x, &y, &tail) != 2)
        fail(ErrorKind::precondition, "not a pascal vertex: " + v);
    return {x, y};
}

std::string pair_name(long x, long y) { return "(" + fmt_int(x) + "," + fmt_int(y) + ")"; }

long ray_param(const std::string& ray, const std::string& prefix) {
    if (ray.rfind(prefix, 0) != 0) return 0;
    return std::stol(ray.substr(prefix.size()));
}

[[noreturn]] void unknown_ray(const std::string& fam, const std::string& ray) {
    fail(ErrorKind::precondition, "family " + fam + " has no ray '" + ray + "'");
}

// Pascal grid: (x,y) -> (x+1,y) with potential u, (x,y) -> (x,y+1) with v.
class Pascal : public LocalFamily {
public:
    explicit Pascal(const json& p) : u_(param_num(p, "u", 1.0)), v_(param_num(p, "v", 1.0)) {}
    std::string name() const override { return "pascal"; }
    json params() const override { return {{"u", u_}, {"v", v_}}; }
    std::string base_vertex() const override { return "(1,1)"; }
    std::vector<std::string> level_vertices(int n) const override {
        std::vector<std::string> out;
        for (long x = n + 1; x >= 1; --x) out.push_back(pair_name(x, n + 2 - x));
        return out;
    }
    std::vector<Succ> successors(const std::string& v) const override {
        auto [x, y] = parse_pair(v);
        return {{pair_name(x + 1, y), 1.0, u_}, {pair_name(x, y + 1), 1.0, v_}};
    }
    std::vector<std::string> ray_names() const override { return {"diagonal", "t:<k>", "alpha:<a>"}; }
    std::string ray_vertex(const std::string& ray, long i) const override {
        if (ray == "diagonal" || ray == "t:0") return pair_name(1 + (i + 1) / 2, 1 + i / 2);
        if (ray.rfind("t:", 0) == 0) {
            long k = ray_param(ray, "t:");
            return k > 0 ? pair_name(k, 1 + i) : pair_name(1 + i, -k);
        }
        if (ray.rfind("alpha:", 0) == 0) {
            double a = std::stod(ray.substr(6));
            long f = static_cast<long>(std::floor(a * static_cast<double>(i)));
            return pair_name(f + 1, i - f + 1);
        }
        unknown_ray(name(), ray);
    }
    int depth_for_ray(const std::string& ray, long i) const override {
        auto [x, y] = parse_pair(ray_vertex(ray, i));
        return static_cast<int>(x + y - 2);
    }

private:
    double u_, v_;
};

// Cayley graph of the infinite dihedral group: top row t_i, bottom row b_i.
class Dihedral : public LocalFamily {
public:
    explicit Dihedral(const json& p) : F_(param_num(p, "F", 1.0)) {}
    std::string name() const override { return "dihedral-cayley"; }
    json params() const override { return {{"F", F_}}; }
    std::string base_vertex() const override { return "t0"; }
    int max_drop() const override { return 1; }
    std::vector<std::string> level_vertices(int n) const override {
        if (n == 0) return {"t0", "b0"};
        return {"t" + fmt_int(n), "b" + fmt_int(n), "t" + fmt_int(-n), "b" + fmt_int(-n)};
    }
    std::vector<Succ> successors(const std::string& v) const override {
        long i = std::stol(v.substr(1));
        if (v[0] == 't') return {{"t" + fmt_int(i + 1), 1.0, F_}, {"b" + fmt_int(i), 1.0, F_}};
        return {{"b" + fmt_int(i - 1), 1.0, F_}, {"t" + fmt_int(i), 1.0, F_}};
    }
    std::vector<std::string> ray_names() const override { return {"right", "left"}; }
    std::string ray_vertex(const std::string& ray, long i) const override {
        if (ray == "right") return "t" + fmt_int(i);
        if (ray == "left") return "b" + fmt_int(-i);
        unknown_ray(name(), ray);
    }
    int depth_for_ray(const std::string& ray, long i) const override {
        ray_vertex(ray, i);
        return static_cast<int>(i);
    }

private:
    double F_;
};

// Rooted d-ary tree with every edge replaced by two opposite arrows.
class RegularTree : public LocalFamily {
public:
    explicit RegularTree(const json& p) : d_(static_cast<int>(param_num(p, "d", 2))), F_(param_num(p, "F", 1.0)) {
        if (d_ < 1 || d_ > 9) fail(ErrorKind::schema, "regular-tree needs 1 <= d <= 9");
    }
    std::string name() const override { return "regular-tree"; }
    json params() const override { return {{"d", d_}, {"F", F_}}; }
    std::string base_vertex() const override { return "r"; }
    int max_drop() const override { return 1; }
    long level_size_estimate(int n) const override {
        double s = std::pow(static_cast<double>(d_), n);
        return s > 1e12 ? static_cast<long>(1e12) : static_cast<long>(s);
    }
    std::vector<std::string> level_vertices(int n) const override {
        std::vector<std::string> cur{"r"};
        for (int k = 0; k < n; ++k) {
            std::vector<std::string> next;
            for (const auto& v : cur)
                for (int c = 0; c < d_; ++c) next.push_back(v + "." + fmt_int(c));
            cur.swap(next);
        }
        return cur;
    }
    std::vector<Succ> successors(const std::string& v) const override {
        std::vector<Succ> s;
        auto dot = v.rfind('.');
        if (dot != std::string::npos) s.push_back({v.substr(0, dot), 1.0, F_});
        for (int c = 0; c < d_; ++c) s.push_back({v + "." + fmt_int(c), 1.0, F_});
        return s;
    }
    std::vector<std::string> ray_names() const override { return {"branch:<digits>"}; }
    std::string ray_vertex(const std::string& ray, long i) const override {
        if (ray.rfind("branch:", 0) != 0 || ray.size() <= 7) unknown_ray(name(), ray);
        std::string digits = ray.substr(7);
        std::string v = "r";
        for (long k = 0; k < i; ++k) {
            char c = digits[static_cast<size_t>(k) % digits.size()];
            if (c < '0' || c - '0' >= d_) unknown_ray(name(), ray);
            v += std::string(".") + c;
        }
        return v;
    }
    int depth_for_ray(const std::string& ray, long i) const override {
        ray_vertex(ray, i);
        return static_cast<int>(i);
    }

private:
    int d_;
    double F_;
};

// v0 -> v1 -> v2 -> ...
class RayGraph : public LocalFamily {
public:
    explicit RayGraph(const json& p) : F_(param_num(p, "F", 1.0)) {}
    std::string name() const override { return "ray-graph"; }
    json params() const override { return {{"F", F_}}; }
    std::string base_vertex() const override { return "v0"; }
    std::vector<std::string> level_vertices(int n) const override { return {"v" + fmt_int(n)}; }
    std::vector<Succ> successors(const std::string& v) const override {
        return {{"v" + fmt_int(std::stol(v.substr(1)) + 1), 1.0, F_}};
    }
    std::vector<std::string> ray_names() const override { return {"main"}; }
    std::string ray_vertex(const std::string& ray, long i) const override {
        if (ray != "main") unknown_ray(name(), ray);
        return "v" + fmt_int(i);
    }
    int depth_for_ray(const std::string&, long i) const override { return static_cast<int>(i); }

private:
    double F_;
};

// The two-vertices-per-level diagram with labels b_j = log(j)/alpha on crossings.
class CarPhase : public LocalFamily {
public:
    explicit CarPhase(const json& p) : alpha_(param_num(p, "alpha", 1.0)) {
        if (!(alpha_ > 0)) fail(ErrorKind::schema, "car-phase needs alpha > 0");
    }
    std::string name() const override { return "car-phase"; }
    json params() const override { return {{"alpha", alpha_}}; }
    std::string base_vertex() const override { return "v0"; }
    bool is_bratteli() const override { return true; }
    std::vector<std::string> level_vertices(int n) const override {
        if (n == 0) return {"v0"};
        return {lv(n, 0), lv(n, 1)};
    }
    std::vector<Succ> successors(const std::string& v) const override {
        if (v == "v0") return {{lv(1, 0), 1.0, 1.0}, {lv(1, 1), 1.0, 1.0}};
        auto colon = v.find(':');
        long j = std::stol(v.substr(1, colon - 1));
        int x = v[colon + 1] - '0';
        double b = std::log(static_cast<double>(j)) / alpha_;
        return {{lv(j + 1, x), 1.0, 1.0}, {lv(j + 1, 1 - x), 1.0, b}};
    }
    std::vector<std::string> ray_names() const override { return {"left", "right"}; }
    std::string ray_vertex(const std::string& ray, long i) const override {
        if (ray != "left" && ray != "right") unknown_ray(name(), ray);
        return i == 0 ? "v0" : lv(i, ray == "left" ? 0 : 1);
    }
    int depth_for_ray(const std::string&, long i) const override { return static_cast<int>(i); }

private:
    static std::string lv(long j, int x) { return "L" + fmt_int(j) + ":" + fmt_int(x); }
    double alpha_;
};

// Spine v_i, side chains v_j^-, v_j^+; odd side vertices v_{2i-1}^{+-} send d_i arrows to v_i.
class ThreeExit : public LocalFamily {
public:
    explicit ThreeExit(const json& p) : F_(param_num(p, "F", 1.0)) {
        if (p.contains("d") && p["d"].is_array()) {
            for (const auto& x : p["d"]) d_.push_back(x.get<double>());
        } else {
            base_ = param_num(p, "d_base", 2.0);
        }
        for (double d : d_)
            if (!(d >= 1) || d != std::floor(d)) fail(ErrorKind::schema, "three-exit d_i must be positive integers");
        if (d_.empty() && (!(base_ >= 1) || base_ != std::floor(base_)))
            fail(ErrorKind::schema, "three-exit d_base must be a positive integer");
    }
    std::string name() const override { return "three-exit"; }
    json params() const override {
        if (!d_.empty()) return {{"d", d_}, {"F", F_}};
        return {{"d_base", base_}, {"F", F_}};
    }
    std::string base_vertex() const override { return "v0"; }
    int max_depth() const override { return d_.empty() ? 1 << 20 : static_cast<int>(2 * d_.size()); }
    double d(long i) const {
        if (!d_.empty()) return d_[static_cast<size_t>(i - 1)];
        return std::pow(base_, static_cast<double>(i));
    }
    std::vector<std::string> level_vertices(int n) const override {
        if (n == 0) return {"v0"};
        std::vector<std::string> out;
        if (n % 2 == 1) out.push_back("v" + fmt_int((n + 1) / 2));
        out.push_back("v" + fmt_int(n) + "-");
        out.push_back("v" + fmt_int(n) + "+");
        return out;
    }
    std::vector<Succ> successors(const std::string& v) const override {
        if (v == "v0") return {{"v1-", 1.0, F_}, {"v1", 1.0, F_}, {"v1+", 1.0, F_}};
        char last = v.back();
        if (last == '+' || last == '-') {
            long j = std::stol(v.substr(1, v.size() - 2));
            std::vector<Succ> s{{"v" + fmt_int(j + 1) + last, 1.0, F_}};
            if (j % 2 == 1) s.push_back({"v" + fmt_int((j + 1) / 2), d((j + 1) / 2), F_});
            return s;
        }
        long i = std::stol(v.substr(1));
        return {{"v" + fmt_int(i + 1), 1.0, F_}};
    }
    std::vector<std::string> ray_names() const override { return {"p0", "p+", "p-"}; }
    std::string ray_vertex(const std::string& ray, long i) const override {
        if (ray == "p0") return "v" + fmt_int(i + 1);
        if (ray == "p+") return "v" + fmt_int(i + 1) + "+";
        if (ray == "p-") return "v" + fmt_int(i + 1) + "-";
        unknown_ray(name(), ray);
    }
    int depth_for_ray(const std::string& ray, long i) const override {
        if (ray == "p0") return static_cast<int>(2 * (i + 1) - 1);
        ray_vertex(ray, i);
        return static_cast<int>(i + 1);
    }

private:
    std::vector<double> d_;
    double base_ = 2.0;
    double F_;
};

// Finite explicit families ignore the depth.
class FiniteFamily : public Family {
public:
    FiniteFamily(std::string name, json params, Digraph g) : name_(std::move(name)), params_(std::move(params)), g_(std::move(g)) {
        g_.family = name_;
    }
    std::string name() const override { return name_; }
    json params() const override { return params_; }
    Digraph truncate(int depth) const override {
        if (depth < 0) fail(ErrorKind::precondition, "depth must be nonnegative");
        return g_;
    }
    std::string base_vertex() const override { return g_.name(g_.base.value_or(0)); }
    int max_depth() const override { return 0; }

private:
    std::string name_;
    json params_;
    Digraph g_;
};

FamilyPtr golden(const json& p) {
    double F = param_num(p, "F", 1.0);
    Digraph g;
    g.add_vertex("v0", 0);
    g.add_vertex("v1", 1);
    g.add_arrow(0, 1, 1, F);
    g.add_arrow(1, 0, 1, F);
    g.add_arrow(1, 1, 1, F);
    g.base = 0;
    g.nw_infinite_hint = false;
    return std::make_shared<FiniteFamily>("golden", json{{"F", F}}, std::move(g));
}

FamilyPtr single_loop(const json& p) {
    double F = param_num(p, "F", 1.0);
    double N = param_num(p, "N", 1);
    if (!(N >= 1) || N != std::floor(N)) fail(ErrorKind::schema, "single-loop needs integer N >= 1");
    Digraph g;
    g.add_vertex("v", 0);
    g.add_arrow(0, 0, N, F);
    g.base = 0;
    g.nw_infinite_hint = false;
    return std::make_shared<FiniteFamily>("single-loop", json{{"N", N}, {"F", F}}, std::move(g));
}

// Document-defined levels with a tail rule.
class Leveled : public Family {
public:
    explicit Leveled(LeveledSpec spec) : spec_(std::move(spec)) {
        if (spec_.levels.empty()) fail(ErrorKind::schema, "levels must be nonempty");
        size_t m = spec_.levels.size();
        if (spec_.level_arrows.size() + 1 != m && spec_.level_arrows.size() != m)
            fail(ErrorKind::schema, "level_arrows must have one block per level gap");
        for (size_t n = 0; n < spec_.level_arrows.size(); ++n) {
            size_t wsrc = spec_.levels[n].size();
            size_t wdst = n + 1 < m ? spec_.levels[n + 1].size() : spec_.levels[n].size();
            for (const auto& a : spec_.level_arrows[n]) {
                if (a.src_idx < 0 || a.dst_idx < 0 || static_cast<size_t>(a.src_idx) >= wsrc ||
                    static_cast<size_t>(a.dst_idx) >= wdst)
                    fail(ErrorKind::schema, "dangling endpoint in level_arrows block " + fmt_int(static_cast<long>(n)));
                if (!(a.mult >= 1) || a.mult != std::floor(a.mult))
                    fail(ErrorKind::schema, "zero or fractional multiplicity in level_arrows");
            }
        }
        if (spec_.tail == "repeat" && spec_.level_arrows.size() + 1 == m) {
            if (m < 2 || spec_.levels[m - 1].size() != spec_.levels[m - 2].size())
                fail(ErrorKind::schema, "repeat tail needs equal widths on the last two levels");
        }
        if (spec_.tail == "family") tail_ = make_family(spec_.tail_family, spec_.tail_params);
        else if (spec_.tail != "none" && spec_.tail != "repeat")
            fail(ErrorKind::schema, "unknown tail rule '" + spec_.tail + "'");
        if (spec_.bratteli && spec_.levels[0].size() != 1)
            fail(ErrorKind::schema, "bratteli level 0 must be a singleton");
    }
    std::string name() const override { return spec_.bratteli ? "bratteli" : "leveled"; }
    json params() const override { return json::object(); }
    const LeveledSpec& spec() const { return spec_; }
    std::string base_vertex() const override { return spec_.levels[0][0]; }
    bool is_bratteli() const override { return spec_.bratteli; }
    int max_depth() const override {
        return spec_.tail == "none" ? static_cast<int>(spec_.levels.size()) - 1 : 1 << 20;
    }

    Digraph truncate(int depth) const override {
        if (depth < 0) fail(ErrorKind::precondition, "depth must be nonnegative");
        depth = std::min(depth, max_depth());
        int m = static_cast<int>(spec_.levels.size()) - 1;
        std::vector<std::vector<std::string>> names;
        std::vector<std::vector<LevelArrow>> arrows;
        Digraph fam;
        std::vector<std::vector<int>> fam_levels;
        if (tail_ && depth > m) {
            fam = tail_->truncate(depth + 1);
            fam_levels.resize(depth + 2);
            for (int v = 0; v < fam.size(); ++v)
                if (fam.level(v) >= 0 && fam.level(v) <= depth + 1) fam_levels[fam.level(v)].push_back(v);
        }
        auto fam_block = [&](int n) {
            std::vector<LevelArrow> block;
            std::vector<int> pos(fam.size(), -1);
            for (size_t i = 0; i < fam_levels[n + 1].size(); ++i) pos[fam_levels[n + 1][i]] = static_cast<int>(i);
            for (size_t i = 0; i < fam_levels[n].size(); ++i)
                for (int a : fam.out(fam_levels[n][i])) {
                    const Arrow& ar = fam.arrow(a);
                    if (pos[ar.dst] < 0) fail(ErrorKind::schema, "tail family is not leveled");
                    block.push_back({static_cast<int>(i), pos[ar.dst], ar.mult, ar.F});
                }
            return block;
        };
        for (int n = 0; n <= depth + 1; ++n) {
            if (n <= m) {
                names.push_back(spec_.levels[n]);
            } else if (spec_.tail == "repeat") {
                std::vector<std::string> lv;
                for (size_t i = 0; i < spec_.levels[m].size(); ++i)
                    lv.push_back("L" + fmt_int(n) + ":" + fmt_int(static_cast<long>(i)));
                names.push_back(lv);
            } else if (tail_) {
                std::vector<std::string> lv;
                for (int v : fam_levels[n]) lv.push_back(fam.name(v));
                names.push_back(lv);
            } else {
                break;
            }
        }
        for (int n = 0; n + 1 < static_cast<int>(names.size()); ++n) {
            if (n < static_cast<int>(spec_.level_arrows.size())) arrows.push_back(spec_.level_arrows[n]);
            else if (spec_.tail == "repeat") arrows.push_back(spec_.level_arrows.back());
            else {
                if (fam_levels[n].size() != names[n].size())
                    fail(ErrorKind::schema, "tail family width differs at level " + fmt_int(n));
                arrows.push_back(fam_block(n));
            }
        }
        Digraph g;
        g.family = name();
        std::vector<std::vector<int>> ids(names.size());
        for (int n = 0; n < static_cast<int>(names.size()); ++n)
            for (const auto& v : names[n]) ids[n].push_back(g.add_vertex(v, n));
        std::vector<int> keep;
        for (int n = 0; n <= depth && n < static_cast<int>(names.size()); ++n)
            keep.insert(keep.end(), ids[n].begin(), ids[n].end());
        for (int n = 0; n < static_cast<int>(arrows.size()); ++n)
            for (const auto& a : arrows[n]) g.add_arrow(ids[n][a.src_idx], ids[n + 1][a.dst_idx], a.mult, a.F);
        g.base = 0;
        Digraph t = induced(g, keep);
        t.family = name();
        t.base = 0;
        if (spec_.bratteli) check_bratteli(t);
        return t;
    }

private:
    LeveledSpec spec_;
    FamilyPtr tail_;
};

}  // namespace

std::string Family::ray_vertex(const std::string& ray, long) const {
    fail(ErrorKind::precondition, "family " + name() + " has no ray '" + ray + "'");
}

int Family::depth_for_ray(const std::string& ray, long) const {
    fail(ErrorKind::precondition, "family " + name() + " has no ray '" + ray + "'");
}

FamilyPtr make_family(const std::string& name, const json& params) {
    json p = params.is_null() ? json::object() : params;
    if (!p.is_object()) fail(ErrorKind::schema, "params must be an object");
    if (name == "pascal") return std::make_shared<Pascal>(p);
    if (name == "dihedral-cayley" || name == "dihedral") return std::make_shared<Dihedral>(p);
    if (name == "regular-tree") return std::make_shared<RegularTree>(p);
    if (name == "golden") return golden(p);
    if (name == "single-loop") return single_loop(p);
    if (name == "car-phase") return std::make_shared<CarPhase>(p);
    if (name == "three-exit") return std::make_shared<ThreeExit>(p);
    if (name == "ray-graph") return std::make_shared<RayGraph>(p);
    if (name == "glue") return make_glue_family(p);
    fail(ErrorKind::schema, "unknown family '" + name + "'");
}

std::vector<std::string> family_names() {
    return {"pascal", "dihedral-cayley", "regular-tree", "golden", "single-loop",
            "car-phase", "three-exit", "ray-graph", "glue"};
}

FamilyPtr make_leveled(const LeveledSpec& spec) { return std::make_shared<Leveled>(spec); }

void check_bratteli(const Digraph& g) {
    if (!g.has_levels()) fail(ErrorKind::schema, "bratteli diagram needs level tags");
    int top = 0;
    for (int v = 0; v < g.size(); ++v) {
        if (g.level(v) == 0) ++top;
        for (int a : g.out(v))
            if (g.level(g.arrow(a).dst) != g.level(v) + 1)
                fail(ErrorKind::schema, "bratteli arrows must go from level n to n+1");
        if (g.level(v) > 0 && g.in(v).empty()) fail(ErrorKind::schema, "bratteli vertex " + g.name(v) + " is a source");
        if (g.out(v).empty() && !g.boundary(v)) fail(ErrorKind::precondition, "sink detected at vertex " + g.name(v));
    }
    if (top != 1) fail(ErrorKind::schema, "bratteli level 0 must be a singleton");
}

std::string RaySpec::vertex(long i) const {
    long j = i + offset;
    if (family) return family->ray_vertex(family_ray, j);
    long pre = static_cast<long>(preamble.size());
    if (j < pre) return preamble[static_cast<size_t>(j)];
    if (block.empty()) fail(ErrorKind::precondition, "ray prefix too short");
    return block[static_cast<size_t>((j - pre) % static_cast<long>(block.size()))];
}

std::vector<std::string> RaySpec::vertices(long n) const {
    std::vector<std::string> vs;
    for (long i = 0; i <= n; ++i) vs.push_back(vertex(i));
    return vs;
}

int RaySpec::depth_needed(long n) const {
    if (!family) return 0;
    int d = 0;
    for (long i = 0; i <= n; ++i) d = std::max(d, family->depth_for_ray(family_ray, i + offset));
    return d;
}

std::string RaySpec::describe() const {
    std::ostringstream os;
    if (family) {
        os << family->name() << ":" << family_ray;
    } else {
        for (size_t i = 0; i < preamble.size(); ++i) os << (i ? "," : "") << preamble[i];
        if (!block.empty()) {
            os << ";";
            for (size_t i = 0; i < block.size(); ++i) os << (i ? "," : "") << block[i];
        }
    }
    if (offset) os << "+" << offset;
    return os.str();
}

RaySpec family_ray(FamilyPtr family, const std::string& name) {
    RaySpec r;
    r.family = std::move(family);
    r.family_ray = name;
    r.family->ray_vertex(name, 0);
    return r;
}

RaySpec explicit_ray(std::vector<std::string> preamble, std::vector<std::string> block) {
    RaySpec r;
    r.preamble = std::move(preamble);
    r.block = std::move(block);
    return r;
}

static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

RaySpec parse_ray(const std::string& text, FamilyPtr family) {
    auto parts = split(text, ';');
    auto pre = split(parts[0], ',');
    if (family && parts.size() == 1 && pre.size() == 1) return family_ray(family, text);
    if (parts.size() > 2) fail(ErrorKind::schema, "ray takes at most one ';'");
    std::vector<std::string> block;
    if (parts.size() == 2) block = split(parts[1], ',');
    if (pre.size() == 1 && pre[0].empty()) pre.clear();
    return explicit_ray(pre, block);
}

RaySpec shift(const RaySpec& p, long k) {
    RaySpec r = p;
    if (k < 0) fail(ErrorKind::precondition, "shift must be nonnegative");
    if (r.family) {
        r.offset += k;
        return r;
    }
    long pre = static_cast<long>(r.preamble.size());
    if (k <= pre) {
        r.preamble.erase(r.preamble.begin(), r.preamble.begin() + k);
        return r;
    }
    if (r.block.empty()) fail(ErrorKind::precondition, "ray prefix too short");
    long rot = (k - pre) % static_cast<long>(r.block.size());
    r.preamble.clear();
    std::rotate(r.block.begin(), r.block.begin() + rot, r.block.end());
    return r;
}

FinitePath ray_prefix(const Digraph& g, const RaySpec& p, long n) {
    std::vector<int> vs;
    for (const auto& name : p.vertices(n)) vs.push_back(g.require(name));
    return path_through(g, vs);
}

bool distinct_vertices(const std::vector<std::string>& vs) {
    std::set<std::string> seen(vs.begin(), vs.end());
    return seen.size() == vs.size();
}

}  // namespace kmsgraph
