#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "procat/cli.hpp"

namespace py = pybind11;
using namespace procat;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string dumps(const Json& j) { return j.dump(); }

std::string command(const std::string& name, const std::filesystem::path& workspace, const std::vector<std::string>& args,
                    std::int64_t horizon, std::int64_t budget, std::optional<std::string> gamma,
                    std::optional<std::string> pair, std::optional<std::filesystem::path> replay, int* exit_code) {
  CliOptions o;
  o.json = true;
  o.limits.horizon = horizon;
  o.limits.budget = budget;
  o.gamma = std::move(gamma);
  o.pair = std::move(pair);
  o.replay = std::move(replay);
  const CliResult r = run_command(name, workspace, args, o);
  *exit_code = r.exit_code;
  return dumps(r.report);
}

}  // namespace

PYBIND11_MODULE(_procat, m) {
  m.doc() = "Bindings for the procat engine";

  static py::handle error = py::exception<Error>(m, "ProcatError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (e.kind() + ": " + e.what()).c_str());
    }
  });

  m.attr("REPORT_SCHEMA") = kReportSchema;
  m.def("commands", &cli_commands);
  m.def(
      "run_command",
      [](const std::string& name, const std::filesystem::path& workspace, const std::vector<std::string>& args,
         std::int64_t horizon, std::int64_t budget, std::optional<std::string> gamma, std::optional<std::string> pair,
         std::optional<std::filesystem::path> replay) {
        int code = 0;
        std::string report = command(name, workspace, args, horizon, budget, gamma, pair, replay, &code);
        return py::make_tuple(code, report);
      },
      py::arg("command"), py::arg("workspace"), py::arg("args") = std::vector<std::string>{}, py::arg("horizon") = Limits{}.horizon,
      py::arg("budget") = Limits{}.budget, py::arg("gamma") = py::none(), py::arg("pair") = py::none(),
      py::arg("replay") = py::none());

  py::class_<Morphism>(m, "Morphism")
      .def_readonly("src", &Morphism::src)
      .def_readonly("tgt", &Morphism::tgt)
      .def_readonly("value", &Morphism::value)
      .def("__eq__", [](const Morphism& a, const Morphism& b) { return a == b; })
      .def("__hash__", [](const Morphism& a) { return py::hash(py::make_tuple(a.src, a.tgt, a.value)); });

  py::class_<Category>(m, "Category")
      .def_static("load", &load_category_file, py::arg("path"), py::arg("name") = "")
      .def_static("cycgrp", &Category::cycgrp)
      .def_property_readonly("name", &Category::name)
      .def_property_readonly("is_finite", &Category::is_finite)
      .def("objects", &Category::objects)
      .def("object_name", &Category::object_name)
      .def("parse_object", &Category::parse_object)
      .def("morphism_count", &Category::morphism_count)
      .def("morphism_name", &Category::morphism_name)
      .def("morphism", &Category::parse_morphism, py::arg("name"), py::arg("src") = py::none(), py::arg("tgt") = py::none())
      .def("hom", &Category::hom)
      .def("identity", &Category::identity)
      .def("compose", &Category::compose, py::arg("g"), py::arg("f"));

  py::class_<IndexPoset>(m, "IndexPoset")
      .def_static("chain", &IndexPoset::chain)
      .def_static("singleton", &IndexPoset::singleton)
      .def_static("omega", &IndexPoset::omega)
      .def_static("product", &IndexPoset::product)
      .def_property_readonly("is_finite", &IndexPoset::is_finite)
      .def("describe", &IndexPoset::describe)
      .def("properties", [](const IndexPoset& p) { return dumps(to_json(poset_properties(p))); });

  py::class_<Workspace>(m, "Workspace")
      .def_static("load", &Workspace::load)
      .def_static("parse", &Workspace::parse, py::arg("text"), py::arg("base_dir") = ".", py::arg("file") = "<string>")
      .def("kind_of", &Workspace::kind_of)
      .def("declarations", &Workspace::declarations)
      .def("category", &Workspace::category, py::return_value_policy::copy)
      .def("poset", &Workspace::poset, py::return_value_policy::copy)
      .def("check_jmorphism", [](const Workspace& w, const std::string& name) { return dumps(to_json(check_jmorphism(w.jmorphism(name)))); })
      .def("equivalent", [](const Workspace& w, const std::string& a, const std::string& b) {
        return dumps(to_json(equivalent_jmorphisms(w.jmorphism(a), w.jmorphism(b))));
      });
}
