#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "itv/error.hpp"
#include "itv/experiments.hpp"
#include "itv/model_io.hpp"
#include "itv/report.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_python(const json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

itv::ExampleId example_id(const std::string& name) {
    if (auto id = itv::parse_example_id(name)) return *id;
    throw itv::InputError("unknown example '" + name + "'");
}

itv::LossKind loss_kind(const std::string& name) {
    if (name == "zero_one") return itv::LossKind::ZeroOne;
    if (name == "mse") return itv::LossKind::MeanSquaredError;
    if (name == "table") return itv::LossKind::CustomTable;
    throw itv::InputError("unknown loss '" + name + "'");
}

itv::AuditOptions audit_options(double tolerance, std::uint64_t capacity) {
    itv::AuditOptions o;
    o.tolerance = tolerance;
    o.capacity = capacity;
    return o;
}

}  // namespace

PYBIND11_MODULE(itvaudit, m) {
    m.doc() = "Introduced-unfairness audits for supervised-learning structural causal models";
    m.attr("__version__") = itv::kToolVersion;

    // Translators registered later are tried first.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const itv::InputError& e) {
            py::set_error(PyExc_ValueError, e.what());
        } catch (const itv::PreconditionError& e) {
            py::set_error(PyExc_ValueError, e.what());
        } catch (const itv::Error& e) {
            py::set_error(PyExc_RuntimeError, e.what());
        }
    });
    py::register_exception<itv::CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<itv::UnsupportedCaseError>(m, "UnsupportedCaseError", PyExc_ValueError);

    m.def("example_names", [] {
        std::vector<std::string> names;
        for (auto id : itv::all_examples()) names.emplace_back(itv::example_name(id));
        return names;
    }, "Names of the built-in worked examples.");

    m.def("example_model", [](const std::string& name) {
        const itv::Example ex = itv::load_example(example_id(name));
        return itv::emit_model(ex.model, ex.groups);
    }, py::arg("name"), "Model file text of a worked example.");

    m.def("run_example", [](const std::string& name, double tolerance, std::uint64_t capacity) {
        return to_python(itv::example_report(example_id(name), audit_options(tolerance, capacity)));
    }, py::arg("name"), py::arg("tolerance") = 1e-9, py::arg("capacity") = 100'000'000ULL,
       "Audit report of a worked example with its reference checks.");

    m.def("validate", [](const std::string& text) {
        const itv::ModelDocument doc = itv::parse_model(text);
        const itv::SLGraph& g = doc.model.graph();
        return to_python(json{{"kind", "validate"}, {"ok", true}, {"nodes", g.size()}, {"edges", g.edges().size()}});
    }, py::arg("text"), "Parse and validate model file text.");

    m.def("criteria", [](const std::string& text, bool padmissible, const std::vector<std::string>& psie_via) {
        return to_python(itv::criteria_report(itv::parse_graph(text), {padmissible, psie_via}));
    }, py::arg("text"), py::arg("padmissible") = false, py::arg("psie_via") = std::vector<std::string>{},
       "Graphical criteria for a model or graph file.");

    m.def("audit", [](const std::string& text, std::optional<std::string> loss,
                      const std::vector<std::string>& psie_via, bool all_optima, double tolerance,
                      std::uint64_t capacity) {
        const itv::ModelDocument doc = itv::parse_model(text);
        if (!doc.groups) throw itv::InputError("audit needs a sensitive node and groups");
        itv::AuditOptions o = audit_options(tolerance, capacity);
        if (loss) o.loss = loss_kind(*loss);
        o.psie_via = psie_via;
        o.all_optima = all_optima;
        return to_python(itv::audit_report(doc.model, *doc.groups, o));
    }, py::arg("text"), py::arg("loss") = py::none(), py::arg("psie_via") = std::vector<std::string>{},
       py::arg("all_optima") = false, py::arg("tolerance") = 1e-9, py::arg("capacity") = 100'000'000ULL,
       "Solve the optimal policy and report fairness measures.");

    m.def("experiment", [](std::size_t samples, std::size_t nodes, double edge_prob, double alpha,
                           std::size_t domain_size, const std::string& loss, const std::string& criterion,
                           double threshold, std::uint64_t seed, std::size_t max_attempts, std::size_t threads,
                           bool records) {
        itv::ExperimentConfig cfg;
        cfg.n_samples = samples;
        cfg.n_nodes = nodes;
        cfg.edge_prob = edge_prob;
        cfg.dirichlet_alpha = alpha;
        cfg.domain_size = domain_size;
        cfg.loss = loss_kind(loss);
        const auto filter = itv::parse_criterion(criterion);
        if (!filter) throw itv::InputError("unknown criterion '" + criterion + "'");
        cfg.criterion = *filter;
        cfg.itv_threshold = threshold;
        cfg.seed = seed;
        cfg.max_attempts = max_attempts;
        cfg.threads = threads;
        itv::validate_config(cfg);
        itv::ExperimentResult result;
        {
            py::gil_scoped_release release;
            result = itv::itv_incidence(cfg);
        }
        json out = itv::experiment_summary(result);
        if (records) {
            out["records"] = json::array();
            for (const auto& r : result.records) out["records"].push_back(itv::record_json(r));
        }
        return to_python(out);
    }, py::arg("samples") = 1000, py::arg("nodes") = 6, py::arg("edge_prob") = 0.4, py::arg("alpha") = 1.0,
       py::arg("domain_size") = 2, py::arg("loss") = "zero_one", py::arg("criterion") = "theorem1",
       py::arg("threshold") = 0.01, py::arg("seed") = 0, py::arg("max_attempts") = 10'000, py::arg("threads") = 1,
       py::arg("records") = false, "Incidence of ITV among random criterion-satisfying models.");

    m.def("witness", [](const std::string& text) {
        const itv::Witness w = itv::witness_scm(itv::parse_graph(text));
        json out = itv::witness_json(w);
        out["model"] = itv::emit_model(w.model, w.groups);
        return to_python(out);
    }, py::arg("text"), "Parameterise a graph so every zero-one optimal policy introduces variation.");
}
