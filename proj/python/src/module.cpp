#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "riccibench/blocks.hpp"
#include "riccibench/charclasses.hpp"
#include "riccibench/curvature.hpp"
#include "riccibench/gluing.hpp"
#include "riccibench/scenario.hpp"

namespace py = pybind11;

namespace {

// dicts cross the boundary as JSON text; the Python package decodes them
std::string run_block_json(const std::string& name, const std::string& params, int grid) {
    py::gil_scoped_release release;
    return rb::to_json(rb::run_block(name, rb::json::parse(params), grid)).dump();
}

py::tuple run_scenario_json(const std::string& scenario, std::optional<int> grid, std::optional<std::uint64_t> seed) {
    rb::ScenarioResult r;
    {
        py::gil_scoped_release release;
        r = rb::run_scenario(rb::json::parse(scenario), {grid, seed});
    }
    py::dict files;
    for (const auto& f : r.files) files[py::str(f.name)] = f.content;
    return py::make_tuple(r.status, r.report.dump(), files, r.failure);
}

std::string pipeline_json(const std::string& graph, int grid) {
    py::gil_scoped_release release;
    return rb::to_json(rb::assemble_pipeline(rb::pipeline_from_json(rb::json::parse(graph)), grid)).dump();
}

// sin/cos doubly warped metric, the round sphere of dimension p+q+1
std::vector<std::pair<std::string, double>> round_sphere_curvature(int p, int q, double t) {
    rb::DoublyWarpedMetric m;
    m.p = p;
    m.q = q;
    m.f = rb::sine(1.0, 1.0, 0.0, {0.0, M_PI / 2});
    m.h = rb::cosine(1.0, 1.0, 0.0, {0.0, M_PI / 2});
    m.collapse_points = {0.0, M_PI / 2};
    return rb::doubly_warped_curvature(m, t).entries;
}

rb::Mod2Ring ring_of(const std::pair<std::string, int>& spec) {
    if (spec.first == "W") return rb::ring_wi(spec.second);
    if (spec.first == "CP") return rb::ring_cpn(spec.second);
    throw std::invalid_argument("unknown ring '" + spec.first + "', expected W or CP");
}

int sw_number(const std::vector<std::pair<std::string, int>>& factors, const std::vector<std::pair<int, int>>& monomial) {
    std::vector<rb::Mod2Ring> rings;
    for (const auto& f : factors) rings.push_back(ring_of(f));
    std::vector<rb::SWPower> mono;
    for (const auto& [k, e] : monomial) mono.push_back({k, e});
    return rb::sw_number(rings, mono);
}

std::string total_class(const std::vector<std::pair<std::string, int>>& factors) {
    std::vector<rb::Mod2Ring> rings;
    for (const auto& f : factors) rings.push_back(ring_of(f));
    const rb::Mod2Ring R = rb::product(rings);
    return rb::format(R, R.sw);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "riccibench native core";

    py::register_exception<rb::ParamError>(m, "ParamError", PyExc_ValueError);
    py::register_exception<rb::ScenarioError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<rb::BlockError>(m, "BlockError", PyExc_RuntimeError);

    m.attr("DEFAULT_GRID") = rb::kDefaultGrid;
    m.def("run_block_json", &run_block_json, py::arg("name"), py::arg("params") = "{}",
          py::arg("grid") = rb::kDefaultGrid, "build one block, returns the report as JSON text");
    m.def("run_scenario_json", &run_scenario_json, py::arg("scenario"), py::arg("grid") = py::none(),
          py::arg("seed") = py::none(), "run a scenario, returns (status, report JSON, files, failure)");
    m.def("pipeline_json", &pipeline_json, py::arg("graph"), py::arg("grid") = 2048,
          "assemble a pipeline graph, returns the report as JSON text");
    m.def("block_names", &rb::block_names, "registered block builders");
    m.def("round_sphere_curvature", &round_sphere_curvature, py::arg("p"), py::arg("q"), py::arg("t"),
          "curvature entries of dt^2 + sin^2 ds_p^2 + cos^2 ds_q^2");
    m.def("sw_number", &sw_number, py::arg("factors"), py::arg("monomial"),
          "Stiefel-Whitney number of a product of W_i and CP^n factors, e.g. [('W', 1), ('CP', 2)], [(3, 1), (2, 3)]");
    m.def("total_class", &total_class, py::arg("factors"), "total Stiefel-Whitney class of a product");
}
