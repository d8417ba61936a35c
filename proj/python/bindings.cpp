#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "maims/cli.hpp"
#include "maims/error.hpp"
#include "maims/eval.hpp"
#include "maims/llm_backend.hpp"
#include "maims/pipeline.hpp"
#include "maims/scales.hpp"
#include "maims/templates.hpp"

namespace py = pybind11;

namespace {

maims::Role role_arg(const std::string& token) {
    auto r = maims::role_from_token(token);
    if (!r) throw py::value_error("role must be poster, analysis or discriminator");
    return *r;
}

} // namespace

PYBIND11_MODULE(_maims, m) {
    m.doc() = "Scale-grounded mental health analysis: metrics, parsing, validation and the CLI";

    static py::exception<maims::Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const maims::Error& e) {
            py::set_error(error, (e.kind() + ": " + e.what()).c_str());
        }
    });

    m.def("weighted_f1", &maims::weighted_f1, py::arg("golds"), py::arg("preds"),
          "Support-weighted F1 over the classes present in golds.");
    m.def("accuracy", &maims::accuracy, py::arg("golds"), py::arg("preds"));

    m.def(
        "validate_scale_file",
        [](const std::string& path) -> std::vector<std::string> {
            try {
                maims::load_scale(path);
                return {};
            } catch (const maims::MalformedScale& e) {
                return e.violations();
            }
        },
        py::arg("path"), "Violations found in a scale file; empty when valid.");

    m.def(
        "load_scale_json",
        [](const std::string& path) { return maims::scale_to_json(maims::load_scale(path)).dump(); },
        py::arg("path"));

    m.def(
        "score_scale_json",
        [](const std::string& scale_path, const std::string& response_json) -> py::object {
            auto scale = maims::load_scale(scale_path);
            auto response = maims::scale_response_from_json(nlohmann::json::parse(response_json));
            auto s = maims::score_scale(response, scale);
            if (!s) return py::none();
            return py::make_tuple(s->total, s->answered_count);
        },
        py::arg("scale_path"), py::arg("response_json"), "(total, answered_count), or None for unvalued scales.");

    m.def("evidence_matches", &maims::evidence_matches, py::arg("quote"), py::arg("post_text"));

    m.def(
        "parse_label",
        [](const std::string& raw, const std::vector<std::string>& labels) {
            maims::TaskSpec task;
            task.labels = labels;
            auto r = maims::parse_label(raw, task);
            return py::make_tuple(r.label ? py::object(py::str(*r.label)) : py::object(py::none()), r.explanation,
                                  r.problem);
        },
        py::arg("raw"), py::arg("labels"), "(label or None, explanation, problem)");

    m.def(
        "cache_key",
        [](const std::string& role, const std::string& identity, const std::string& model, double temperature,
           const std::string& prompt) { return maims::cache_key(role_arg(role), identity, model, temperature, prompt); },
        py::arg("role"), py::arg("backend_identity"), py::arg("model"), py::arg("temperature"), py::arg("prompt"));

    m.def("render_template", &maims::render_template, py::arg("template"), py::arg("vars"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = maims::cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the maims command line in-process; returns (exit_code, stdout, stderr).");
}
