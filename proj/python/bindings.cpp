#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "kmsgraph/acceptance.hpp"
#include "kmsgraph/cli.hpp"
#include "kmsgraph/io.hpp"
#include "kmsgraph/martin.hpp"
#include "kmsgraph/report.hpp"
#include "kmsgraph/spectral.hpp"

namespace py = pybind11;
using namespace kmsgraph;

namespace {

// Results cross the boundary as JSON text; the Python wrapper decodes them.
std::string out(const json& j) { return dump(j); }

SeriesControls controls(int max_power) {
    SeriesControls c;
    c.max_power = max_power;
    return c;
}

int vertex(const Digraph& g, const std::optional<std::string>& name) {
    if (name) return g.require(*name);
    if (!g.base) fail(ErrorKind::precondition, "graph has no base vertex");
    return *g.base;
}

Digraph from_text(const std::string& text, int depth) { return parse_graph(text).materialize(depth); }

Digraph from_family_json(const std::string& name, const std::string& params, int depth) {
    return from_family(name, json::parse(params)).materialize(depth);
}

}  // namespace

PYBIND11_MODULE(_kmsgraph, m) {
    m.doc() = "Weighted countable digraphs: Green functions, entropy, Martin kernels and KMS weights";

    static py::exception<Error> exc(m, "KmsGraphError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(exc, (std::string(kind_name(e.kind())) + ": " + e.what()).c_str());
        } catch (const json::exception& e) {
            py::set_error(exc, (std::string("schema: ") + e.what()).c_str());
        }
    });

    py::class_<Digraph>(m, "Graph")
        .def_static("parse", &from_text, py::arg("text"), py::arg("depth") = 16)
        .def_static("family", &from_family_json, py::arg("name"), py::arg("params") = "{}", py::arg("depth") = 16)
        .def_property_readonly("size", &Digraph::size)
        .def_property_readonly("arrow_count", &Digraph::arrow_count)
        .def_property_readonly("names", &Digraph::names)
        .def_property_readonly("base", [](const Digraph& g) -> std::optional<std::string> {
            if (!g.base) return std::nullopt;
            return g.name(*g.base);
        })
        .def("arrows",
             [](const Digraph& g) {
                 std::vector<std::tuple<std::string, std::string, double, double>> r;
                 for (const auto& a : g.arrows()) r.emplace_back(g.name(a.src), g.name(a.dst), a.mult, a.F);
                 return r;
             })
        .def("to_json", [](const Digraph& g) { return out(digraph_to_json(g)); })
        .def("__len__", &Digraph::size);

    m.def(
        "green_function",
        [](const Digraph& g, double beta, std::optional<std::string> v, std::optional<std::string> w, int max_power) {
            int a = vertex(g, v), b = w ? g.require(*w) : a;
            return out(to_json(green_function(g, beta, a, b, controls(max_power))));
        },
        py::arg("graph"), py::arg("beta"), py::arg("source") = py::none(), py::arg("target") = py::none(),
        py::arg("max_power") = 512);
    m.def(
        "first_return",
        [](const Digraph& g, double beta, std::optional<std::string> v, int max_power) {
            return out(to_json(first_return_series(g, beta, vertex(g, v), controls(max_power))));
        },
        py::arg("graph"), py::arg("beta"), py::arg("vertex") = py::none(), py::arg("max_power") = 512);
    m.def(
        "entropy",
        [](const Digraph& g, std::optional<std::string> v) { return out(to_json(gurevich_entropy(g, vertex(g, v)))); },
        py::arg("graph"), py::arg("vertex") = py::none());
    m.def(
        "classify",
        [](const Digraph& g, double beta, std::optional<std::string> v) {
            return out(to_json(classify_recurrence(g, beta, vertex(g, v))));
        },
        py::arg("graph"), py::arg("beta"), py::arg("vertex") = py::none());
    m.def(
        "martin_kernel",
        [](const Digraph& g, double beta, const std::string& v, const std::string& w, std::optional<std::string> base) {
            return out(to_json(martin_kernel(g, beta, vertex(g, base), g.require(v), g.require(w))));
        },
        py::arg("graph"), py::arg("beta"), py::arg("v"), py::arg("w"), py::arg("base") = py::none());
    m.def(
        "verify_harmonic",
        [](const Digraph& g, double beta, const std::map<std::string, double>& psi, const std::string& mode) {
            return out(to_json(g, verify_harmonic(g, beta, values_from_map(g, psi), mode)));
        },
        py::arg("graph"), py::arg("beta"), py::arg("psi"), py::arg("mode") = "harmonic");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream o, e;
            int code = run_cli(args, o, e);
            return py::make_tuple(code, o.str(), e.str());
        },
        py::arg("args"));
    m.def("verbs", [] {
        std::vector<std::string> r;
        for (const auto& v : verb_table()) r.push_back(v.verb);
        return r;
    });
    m.def(
        "selftest",
        [](const std::vector<int>& only) {
            std::ostringstream o;
            std::vector<std::pair<int, bool>> r;
            for (const auto& c : run_acceptance(o, only)) r.emplace_back(c.id, c.pass);
            return r;
        },
        py::arg("only") = std::vector<int>{});
}
