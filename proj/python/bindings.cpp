#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "horseshoe/acceptance.hpp"
#include "horseshoe/commands.hpp"
#include "horseshoe/errors.hpp"
#include "horseshoe/parallel.hpp"
#include "horseshoe/param_space.hpp"

namespace py = pybind11;

namespace {

// The Python side passes configs as JSON text; the package wraps this in dicts.
hs::RunConfig config_of(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw hs::Error(hs::ErrorCode::ConfigError, e.what());
    }
    return hs::run_config_from_json(j);
}

hs::RClass class_of(const hs::RunConfig& c, const std::string& dump) {
    if (!dump.empty()) return hs::RClass::load_jsonl(dump);
    hs::RClass cls = hs::build_class(c);
    for (long i : c.path) cls.extend(i);
    return cls;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Horseshoe class construction, composition checks and transverse dimension";
    m.attr("SCHEMA_VERSION") = hs::kSchemaVersion;

    py::register_exception<hs::Error>(m, "HorseshoeError", PyExc_RuntimeError);
    // Registered later, so tried first: config errors surface as ValueError.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const hs::Error& e) {
            if (e.code() != hs::ErrorCode::ConfigError) throw;
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("default_config", [] { return hs::to_json(hs::RunConfig{}).dump(); });
    m.def("normalize_config", [](const std::string& cfg) { return hs::to_json(config_of(cfg)).dump(); });
    m.def("config_warnings", [](const std::string& cfg) { return hs::config_warnings(config_of(cfg)); });

    m.def(
        "build",
        [](const std::string& cfg) {
            auto c = config_of(cfg);
            hs::BuildOutput b;
            {
                py::gil_scoped_release release;
                b = hs::cmd_build(c);
            }
            return py::make_tuple(b.summary.dump(), py::bytes(b.dump), b.geometry);
        },
        py::arg("config"), "Returns (summary JSON, class dump JSONL bytes, geometry CSV).");
    m.def(
        "extend",
        [](const std::string& dump, const std::string& cfg) {
            auto c = config_of(cfg);
            hs::BuildOutput b;
            {
                py::gil_scoped_release release;
                b = hs::cmd_extend(hs::RClass::load_jsonl(dump), c);
            }
            return py::make_tuple(b.summary.dump(), py::bytes(b.dump), b.geometry);
        },
        py::arg("dump"), py::arg("config"));
    m.def(
        "dimension",
        [](const std::string& cfg, const std::string& dump) {
            auto c = config_of(cfg);
            py::gil_scoped_release release;
            return hs::cmd_dimension(class_of(c, dump), c).dump();
        },
        py::arg("config"), py::arg("dump") = "");
    m.def(
        "gibbs",
        [](const std::string& cfg, const std::string& dump) {
            auto c = config_of(cfg);
            py::gil_scoped_release release;
            return hs::cmd_gibbs(class_of(c, dump), c);
        },
        py::arg("config"), py::arg("dump") = "");
    m.def("exponents", [](const std::string& cfg) { return hs::cmd_exponents(config_of(cfg)).dump(); });
    m.def("h4_region", [](const std::string& cfg) { return hs::cmd_h4region(config_of(cfg)); });
    m.def("dump_tangency", [](const std::string& cfg) { return hs::cmd_dump_tangency(config_of(cfg)); });
    m.def("dump_geometry", [](const std::string& cfg) { return hs::cmd_dump_geometry(config_of(cfg)); });
    m.def(
        "verify",
        [](const std::string& cfg, const std::vector<int>& ids) {
            auto c = config_of(cfg);
            py::gil_scoped_release release;
            return hs::cmd_verify(c, ids).dump();
        },
        py::arg("config"), py::arg("criteria") = std::vector<int>{});
    m.def("set_worker_count", &hs::set_worker_count, py::arg("n"), "0 restores HORSESHOE_THREADS or the core count.");
    m.def("worker_count", &hs::worker_count);
}
