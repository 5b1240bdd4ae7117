#include "itv/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "itv/error.hpp"
#include "itv/experiments.hpp"
#include "itv/model_io.hpp"
#include "itv/report.hpp"

namespace itv {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
    if (!out) throw InputError("failed writing '" + path + "'");
}

std::optional<LossKind> parse_loss(const std::string& s) {
    if (s == "zero_one") return LossKind::ZeroOne;
    if (s == "mse") return LossKind::MeanSquaredError;
    if (s == "table") return LossKind::CustomTable;
    return std::nullopt;
}

// Re-raises a ParseError with the file path in front of line:column.
template <typename F>
auto with_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw InputError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                         e.detail());
    }
}

struct Globals {
    double tolerance = 1e-9;
    std::uint64_t capacity = 100'000'000;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string format = "text";
};

void emit(std::ostream& out, const Globals& g, const json& report) {
    if (g.format == "json")
        out << report.dump(2) << "\n";
    else
        out << render_text(report);
}

AuditOptions audit_options(const Globals& g) {
    AuditOptions o;
    o.tolerance = g.tolerance;
    o.capacity = g.capacity;
    if (g.seed_given) o.seed = g.seed;
    return o;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Introduced-unfairness audits for supervised-learning structural causal models", "itv_audit"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--tolerance", g.tolerance, "Absolute tolerance for ties and classifications")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--capacity", g.capacity, "Cap on enumerated states")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", g.seed, "Random seed (experiments; recorded in reports)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "text"}));

    std::string file;
    bool padmissible = false;
    std::vector<std::string> psie_via;
    auto* criteria = app.add_subcommand("criteria", "Check the graphical incentive criteria");
    criteria->add_option("file", file, "Model or graph file")->required();
    criteria->add_flag("--padmissible", padmissible, "Also check the P-admissible criterion");
    criteria->add_option("--psie-via", psie_via, "Check the PSIE criterion via this mediator");

    std::string loss_text;
    bool all_optima = false;
    std::string out_path;
    auto* audit = app.add_subcommand("audit", "Solve the optimal policy and report fairness measures");
    audit->add_option("file", file, "Model file")->required();
    audit->add_option("--loss", loss_text, "zero_one, mse or table")->check(CLI::IsMember({"zero_one", "mse", "table"}));
    audit->add_option("--psie-via", psie_via, "Report the PSIE via this mediator");
    audit->add_flag("--all-optima", all_optima, "Report min and max ITV over all optimal policies");
    audit->add_option("--out", out_path, "Also write the JSON report here");

    ExperimentConfig cfg;
    std::string exp_loss = "zero_one", exp_criterion = "theorem1";
    auto* experiment = app.add_subcommand("experiment", "Incidence of ITV among random criterion-satisfying models");
    experiment->add_option("--samples", cfg.n_samples, "Number of sampled models");
    experiment->add_option("--nodes", cfg.n_nodes, "Nodes per graph, including prediction and utility");
    experiment->add_option("--edge-prob", cfg.edge_prob, "Edge inclusion probability");
    experiment->add_option("--alpha", cfg.dirichlet_alpha, "Symmetric Dirichlet concentration");
    experiment->add_option("--domain-size", cfg.domain_size, "Values per chance node");
    experiment->add_option("--loss", exp_loss, "zero_one or mse")->check(CLI::IsMember({"zero_one", "mse"}));
    experiment->add_option("--criterion", exp_criterion, "Graph filter")
        ->check(CLI::IsMember({"theorem1", "theorem2", "not_theorem1", "not_padmissible", "any"}));
    experiment->add_option("--threshold", cfg.itv_threshold, "ITV threshold");
    experiment->add_option("--max-attempts", cfg.max_attempts, "Rejection budget per sample");
    experiment->add_option("--out", out_path, "Write per-sample records and summary (JSON lines)");

    std::string example_id, emit_path;
    bool run = false;
    auto* example = app.add_subcommand("example", "Emit or audit a worked example");
    example->add_option("id", example_id, "hiring_v1, hiring_v2, music, music_with_a, degrees, degrees_coding")
        ->required();
    auto* emit_opt = example->add_option("--emit-model", emit_path, "Write the model file ('-' for stdout)");
    auto* run_opt = example->add_flag("--run", run, "Run the full audit");
    emit_opt->excludes(run_opt);

    auto* validate = app.add_subcommand("validate", "Parse and validate a model file");
    validate->add_option("file", file, "Model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (criteria->parsed()) {
            const std::string text = read_file(file);
            const SLGraph graph = with_path(file, [&] { return parse_graph(text); });
            emit(out, g, criteria_report(graph, {padmissible, psie_via}));
        } else if (audit->parsed()) {
            const std::string text = read_file(file);
            const ModelDocument doc = with_path(file, [&] { return parse_model(text); });
            if (!doc.groups) throw InputError(file + ": audit needs a sensitive node and groups");
            AuditOptions o = audit_options(g);
            if (!loss_text.empty()) o.loss = parse_loss(loss_text);
            o.psie_via = psie_via;
            o.all_optima = all_optima;
            const json report = audit_report(doc.model, *doc.groups, o);
            if (!out_path.empty()) write_file(out_path, report.dump(2) + "\n");
            emit(out, g, report);
        } else if (experiment->parsed()) {
            cfg.loss = *parse_loss(exp_loss);
            cfg.criterion = *parse_criterion(exp_criterion);
            cfg.seed = g.seed;
            cfg.inference.capacity = g.capacity;
            cfg.threads = threads_from_env(1);
            validate_config(cfg);
            const ExperimentResult result = itv_incidence(cfg);
            const json summary = experiment_summary(result);
            if (!out_path.empty()) {
                std::string lines;
                for (const auto& r : result.records) lines += record_json(r).dump() + "\n";
                lines += json{{"summary", summary}}.dump() + "\n";
                write_file(out_path, lines);
            }
            emit(out, g, summary);
        } else if (example->parsed()) {
            const auto id = parse_example_id(example_id);
            if (!id) {
                std::string known;
                for (auto e : all_examples()) known += std::string(known.empty() ? "" : ", ") + example_name(e);
                throw InputError("unknown example '" + example_id + "' (known: " + known + ")");
            }
            if (emit_opt->count() > 0) {
                const Example ex = load_example(*id);
                const std::string text = emit_model(ex.model, ex.groups);
                if (emit_path == "-")
                    out << text;
                else
                    write_file(emit_path, text);
            } else if (run) {
                emit(out, g, example_report(*id, audit_options(g)));
            } else {
                throw InputError("example needs --emit-model <path> or --run");
            }
        } else if (validate->parsed()) {
            const std::string text = read_file(file);
            const ModelDocument doc = with_path(file, [&] { return parse_model(text); });
            const SLGraph& graph = doc.model.graph();
            if (g.format == "json")
                out << json{{"kind", "validate"}, {"ok", true}, {"nodes", graph.size()}, {"edges", graph.edges().size()}}
                           .dump(2)
                    << "\n";
            else
                out << "ok: " << graph.size() << " nodes, " << graph.edges().size() << " edges\n";
        }
    } catch (const CapacityError& e) {
        err << "capacity exceeded: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return kExitUnexpected;
    }
    return kExitOk;
}

}  // namespace itv
