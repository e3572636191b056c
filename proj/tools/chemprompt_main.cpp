#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chemprompt/chem.hpp"
#include "chemprompt/harness.hpp"

using namespace chemprompt;
using namespace chemprompt::chem;

namespace {

// Flag values layered over the config file; only flags the user passed
// override what the file says.
struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::string> molecule;
    std::optional<std::string> enzyme;
    std::optional<std::string> crystal;
    std::optional<std::string> strategies;
    std::optional<int> panel_size;
    std::optional<int> run_count;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::string> grader_model;
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    std::optional<double> temperature;
    std::optional<std::string> replay;
    std::optional<std::string> cache;
    std::optional<int> window;
    std::optional<int> timeout_ms;
    std::optional<int> retries;
    std::optional<int> backoff_ms;
};

void add_config_flags(CLI::App* cmd, Overrides& overrides) {
    cmd->add_option("--config", overrides.config_path, "config file (key = value sections)");
    cmd->add_option("--molecule", overrides.molecule, "small-molecule records file");
    cmd->add_option("--enzyme", overrides.enzyme, "enzyme records file");
    cmd->add_option("--crystal", overrides.crystal, "crystal records file");
    cmd->add_option("--strategies", overrides.strategies, "comma-separated strategy tokens");
    cmd->add_option("--panel-size", overrides.panel_size, "experts per mixture panel");
    cmd->add_option("--run-count", overrides.run_count, "repeat count per strategy");
    cmd->add_option("--seed", overrides.seed, "run seed for option shuffling");
    cmd->add_option("--output-dir", overrides.output_dir, "where records and reports land");
    cmd->add_option("--grader-model", overrides.grader_model, "model used for rubric grading");
    cmd->add_option("--endpoint", overrides.endpoint, "chat-completions endpoint URL");
    cmd->add_option("--model", overrides.model, "model name sent with every request");
    cmd->add_option("--temperature", overrides.temperature, "sampling temperature");
    cmd->add_option("--replay", overrides.replay, "replay fixture file (offline mode)");
    cmd->add_option("--cache", overrides.cache, "response cache file");
    cmd->add_option("--window", overrides.window, "max in-flight requests");
    cmd->add_option("--timeout-ms", overrides.timeout_ms, "per-request timeout");
    cmd->add_option("--retries", overrides.retries, "retry count for failed requests");
    cmd->add_option("--backoff-ms", overrides.backoff_ms, "initial retry backoff");
}

RunConfig resolve_config(const Overrides& overrides) {
    RunConfig config;
    if (overrides.config_path) config = load_run_config(*overrides.config_path);
    if (overrides.molecule) config.molecule_path = *overrides.molecule;
    if (overrides.enzyme) config.enzyme_path = *overrides.enzyme;
    if (overrides.crystal) config.crystal_path = *overrides.crystal;
    if (overrides.strategies) {
        RunConfig parsed = parse_run_config("[run]\nstrategies = " + *overrides.strategies + "\n",
                                            "--strategies");
        config.strategies = parsed.strategies;
    }
    if (overrides.panel_size) config.panel_size = *overrides.panel_size;
    if (overrides.run_count) config.run_count = *overrides.run_count;
    if (overrides.seed) config.run_seed = *overrides.seed;
    if (overrides.output_dir) config.output_dir = *overrides.output_dir;
    if (overrides.grader_model) config.grader_model = *overrides.grader_model;
    if (overrides.endpoint) config.backend.endpoint = *overrides.endpoint;
    if (overrides.model) config.backend.model = *overrides.model;
    if (overrides.temperature) config.backend.temperature = *overrides.temperature;
    if (overrides.replay) config.backend.replay_path = *overrides.replay;
    if (overrides.cache) config.backend.cache_path = *overrides.cache;
    if (overrides.window) config.backend.window = *overrides.window;
    if (overrides.timeout_ms) config.backend.timeout_ms = *overrides.timeout_ms;
    if (overrides.retries) config.backend.retries = *overrides.retries;
    if (overrides.backoff_ms) config.backend.backoff_ms = *overrides.backoff_ms;
    return config;
}

double parse_number(const std::string& text, const std::string& name) {
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("oracle: " + name + " expects a number, got \"" + text + "\"");
    }
    if (used != text.size())
        throw ConfigError("oracle: " + name + " expects a number, got \"" + text + "\"");
    return value;
}

int run_oracle(const std::string& op, const std::vector<std::string>& args) {
    auto need = [&](std::size_t count, const char* usage) {
        if (args.size() != count) throw ConfigError(std::string("oracle ") + op + " usage: " + usage);
    };
    if (op == "mw") {
        need(1, "oracle mw <smiles>");
        std::printf("%.3f\n", molecular_weight(args[0]));
    } else if (op == "formula") {
        need(1, "oracle formula <smiles>");
        std::printf("%s\n", molecular_formula(args[0]).c_str());
    } else if (op == "acceptors") {
        need(1, "oracle acceptors <smiles>");
        std::printf("%d\n", h_bond_acceptors(args[0]));
    } else if (op == "donors") {
        need(1, "oracle donors <smiles>");
        std::printf("%d\n", h_bond_donors(args[0]));
    } else if (op == "ec") {
        need(1, "oracle ec <ec number>");
        std::printf("%s\n", to_string(ec_category(args[0])));
    } else if (op == "density") {
        if (args.size() != 3 && args.size() != 8)
            throw ConfigError("oracle density usage: oracle density <fw> <z> <a> [b c alpha beta gamma]");
        double fw = parse_number(args[0], "fw");
        int z = static_cast<int>(parse_number(args[1], "z"));
        Lattice cell;
        cell.a = parse_number(args[2], "a");
        cell.b = args.size() == 8 ? parse_number(args[3], "b") : cell.a;
        cell.c = args.size() == 8 ? parse_number(args[4], "c") : cell.a;
        cell.alpha = args.size() == 8 ? parse_number(args[5], "alpha") : 90.0;
        cell.beta = args.size() == 8 ? parse_number(args[6], "beta") : 90.0;
        cell.gamma = args.size() == 8 ? parse_number(args[7], "gamma") : 90.0;
        std::printf("%.2f\n", crystal_density(cell, fw, z));
    } else if (op == "stability") {
        need(1, "oracle stability <e_hull_ev_per_atom>");
        std::printf("%s\n", stable_on_hull(parse_number(args[0], "e_hull")) ? "stable" : "unstable");
    } else if (op == "bandgap") {
        need(1, "oracle bandgap <gap_ev>");
        std::printf("%s\n", metallic(parse_number(args[0], "gap")) ? "metallic" : "non-metallic");
    } else if (op == "ordering") {
        need(1, "oracle ordering <magnetization_mub>");
        MagneticOrdering ordering = magnetic_ordering(parse_number(args[0], "magnetization"));
        std::printf("%s\n", ordering == MagneticOrdering::FerroOrFerri ? "ferro/ferri" : "afm/none");
    } else {
        throw ConfigError("oracle: unknown operation \"" + op + "\"");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"material property benchmark harness"};
    app.require_subcommand(1);

    Overrides ingest_flags;
    CLI::App* ingest = app.add_subcommand("ingest", "load and validate the record files");
    add_config_flags(ingest, ingest_flags);

    Overrides gen_flags;
    CLI::App* gen = app.add_subcommand("gen", "build the question set and write questions.jsonl");
    add_config_flags(gen, gen_flags);

    Overrides run_flags;
    CLI::App* run = app.add_subcommand("run", "answer, grade, and report every strategy");
    add_config_flags(run, run_flags);

    Overrides grade_flags;
    CLI::App* grade = app.add_subcommand("grade", "re-align and re-score existing records");
    add_config_flags(grade, grade_flags);

    Overrides report_flags;
    CLI::App* report = app.add_subcommand("report", "rebuild reports from existing records");
    add_config_flags(report, report_flags);

    std::string oracle_op;
    std::vector<std::string> oracle_args;
    CLI::App* oracle = app.add_subcommand("oracle", "chemistry spot checks (mw, formula, ec, ...)");
    oracle->add_option("op", oracle_op, "operation")->required();
    oracle->add_option("args", oracle_args, "operation arguments");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            auto counts = cmd_ingest(resolve_config(ingest_flags));
            int total = 0;
            for (const auto& [category, count] : counts) {
                std::printf("%s: %d\n", to_string(category), count);
                total += count;
            }
            std::printf("total: %d\n", total);
        } else if (gen->parsed()) {
            RunConfig config = resolve_config(gen_flags);
            auto questions = cmd_gen(config);
            std::printf("questions: %zu\n", questions.size());
            std::printf("wrote %s/questions.jsonl\n", config.output_dir.c_str());
        } else if (run->parsed()) {
            RunConfig config = resolve_config(run_flags);
            RunResult result = cmd_run(config);
            std::printf("questions per run: %d\n", result.question_count);
            std::printf("evaluations: %d\n", result.evaluation_count);
            std::printf("re-asks: %d\n", result.reask_count);
            std::printf("grader failures: %d\n", result.grader_failures);
            std::printf("output: %s\n", result.output_dir.c_str());
        } else if (grade->parsed()) {
            int regraded = cmd_grade(resolve_config(grade_flags));
            std::printf("regraded: %d\n", regraded);
        } else if (report->parsed()) {
            RunConfig config = resolve_config(report_flags);
            cmd_report(config);
            std::printf("reports written to %s/reports\n", config.output_dir.c_str());
        } else if (oracle->parsed()) {
            return run_oracle(oracle_op, oracle_args);
        }
    } catch (const ConfigError& error) {
        std::fprintf(stderr, "config error: %s\n", error.what());
        return 1;
    } catch (const BackendUnavailable& error) {
        std::fprintf(stderr, "backend unavailable: %s\n", error.what());
        return 1;
    } catch (const ChemError& error) {
        std::fprintf(stderr, "oracle error: %s\n", error.what());
        return 1;
    } catch (const std::exception& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 1;
    }
    return 0;
}
