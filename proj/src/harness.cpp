#include "chemprompt/harness.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

#include "chemprompt/alignment.hpp"
#include "chemprompt/grading.hpp"
#include "chemprompt/hash.hpp"
#include "json.hpp"

namespace chemprompt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string trim(const std::string& text) {
    std::size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

int parse_int_field(const std::string& value, const std::string& source,
                    const std::string& field) {
    errno = 0;
    char* end = nullptr;
    long parsed = std::strtol(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE)
        throw ConfigError(source + ": " + field + " expects an integer, got \"" + value + "\"");
    return static_cast<int>(parsed);
}

std::uint64_t parse_u64_field(const std::string& value, const std::string& source,
                              const std::string& field) {
    errno = 0;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(value.c_str(), &end, 10);
    if (value.empty() || value[0] == '-' || end != value.c_str() + value.size() ||
        errno == ERANGE)
        throw ConfigError(source + ": " + field + " expects an unsigned integer, got \"" + value +
                          "\"");
    return parsed;
}

double parse_double_field(const std::string& value, const std::string& source,
                          const std::string& field) {
    errno = 0;
    char* end = nullptr;
    double parsed = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE)
        throw ConfigError(source + ": " + field + " expects a number, got \"" + value + "\"");
    return parsed;
}

std::vector<PromptStrategy> parse_strategies(const std::string& value,
                                             const std::string& source) {
    std::vector<PromptStrategy> strategies;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        std::size_t length = comma == std::string::npos ? std::string::npos : comma - start;
        std::string token = trim(value.substr(start, length));
        if (!token.empty()) {
            try {
                strategies.push_back(strategy_from(token));
            } catch (const std::invalid_argument&) {
                throw ConfigError(source + ": run.strategies has unknown strategy \"" + token +
                                  "\"");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return strategies;
}

void assign_field(RunConfig& config, const std::string& section, const std::string& key,
                  const std::string& value, const std::string& source) {
    const std::string field = section + "." + key;
    if (section == "dataset") {
        if (key == "molecule")
            config.molecule_path = value;
        else if (key == "enzyme")
            config.enzyme_path = value;
        else if (key == "crystal")
            config.crystal_path = value;
        else
            throw ConfigError(source + ": unknown key " + field);
        return;
    }
    if (section == "run") {
        if (key == "strategies")
            config.strategies = parse_strategies(value, source);
        else if (key == "panel_size")
            config.panel_size = parse_int_field(value, source, field);
        else if (key == "run_count")
            config.run_count = parse_int_field(value, source, field);
        else if (key == "seed")
            config.run_seed = parse_u64_field(value, source, field);
        else if (key == "output_dir")
            config.output_dir = value;
        else if (key == "grader_model")
            config.grader_model = value;
        else
            throw ConfigError(source + ": unknown key " + field);
        return;
    }
    if (key == "endpoint")
        config.backend.endpoint = value;
    else if (key == "model")
        config.backend.model = value;
    else if (key == "temperature")
        config.backend.temperature = parse_double_field(value, source, field);
    else if (key == "replay")
        config.backend.replay_path = value;
    else if (key == "cache")
        config.backend.cache_path = value;
    else if (key == "window")
        config.backend.window = parse_int_field(value, source, field);
    else if (key == "timeout_ms")
        config.backend.timeout_ms = parse_int_field(value, source, field);
    else if (key == "retries")
        config.backend.retries = parse_int_field(value, source, field);
    else if (key == "backoff_ms")
        config.backend.backoff_ms = parse_int_field(value, source, field);
    else
        throw ConfigError(source + ": unknown key " + field);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw ConfigError("cannot read file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.flush();
    if (!out.good()) throw std::runtime_error("cannot write " + path);
}

struct DatasetSource {
    MaterialCategory category = MaterialCategory::SmallMolecule;
    std::string path;
    int records = 0;
    std::string digest;
};

struct LoadedDataset {
    std::vector<MaterialRecord> materials;
    std::vector<DatasetSource> sources;
};

LoadedDataset load_datasets(const RunConfig& config, const TaskRegistry& registry) {
    LoadedDataset data;
    auto take = [&](const std::string& path, MaterialCategory category) {
        if (path.empty()) return;
        std::vector<MaterialRecord> records;
        try {
            records = load_records(path, registry);
        } catch (const std::exception& error) {
            throw ConfigError(std::string("dataset ") + to_string(category) + ": " +
                              error.what());
        }
        data.sources.push_back({category, path, static_cast<int>(records.size()),
                                fnv1a128(serialize_records_jsonl(records)).hex()});
        for (MaterialRecord& record : records) data.materials.push_back(std::move(record));
    };
    take(config.molecule_path, MaterialCategory::SmallMolecule);
    take(config.enzyme_path, MaterialCategory::Enzyme);
    take(config.crystal_path, MaterialCategory::Crystal);
    return data;
}

void require_datasets(const RunConfig& config) {
    if (config.molecule_path.empty() && config.enzyme_path.empty() &&
        config.crystal_path.empty())
        throw ConfigError("dataset section must provide at least one records file");
}

std::shared_ptr<Backend> make_backend(const BackendSettings& settings, std::string* mode) {
    std::shared_ptr<Backend> inner;
    if (!settings.replay_path.empty()) {
        try {
            inner = std::make_shared<ReplayBackend>(ReplayBackend::from_file(settings.replay_path));
        } catch (const std::exception& error) {
            throw BackendUnavailable(std::string("replay backend: ") + error.what());
        }
        if (mode) *mode = "replay";
    } else {
        HttpBackendConfig http;
        http.endpoint = settings.endpoint;
        http.api_key = api_key_from_env();
        if (http.api_key.empty())
            throw BackendUnavailable(std::string("http backend: ") + kApiKeyEnvVar +
                                     " is not set");
        http.timeout_ms = settings.timeout_ms;
        http.retries = settings.retries;
        http.backoff_ms = settings.backoff_ms;
        inner = std::make_shared<HttpBackend>(std::move(http));
        if (mode) *mode = "http";
    }
    if (!settings.cache_path.empty())
        inner = std::make_shared<CachingBackend>(
            inner, std::make_shared<ResponseCache>(settings.cache_path));
    return inner;
}

std::string resolved_grader_model(const RunConfig& config) {
    return config.grader_model.empty() ? config.backend.model : config.grader_model;
}

std::string serialize_questions_jsonl(const std::vector<Question>& questions) {
    std::string out;
    for (const Question& question : questions) {
        json entry;
        entry["question_id"] = question.question_id;
        entry["record_id"] = question.record_id;
        entry["task_key"] = question.task_key;
        entry["category"] = to_string(question.category);
        entry["stem"] = question.stem;
        entry["has_options"] = question.has_options;
        entry["options"] = question.options;
        entry["truth_index"] = question.truth_index;
        entry["truth_text"] = question.truth_text;
        out += entry.dump();
        out += '\n';
    }
    return out;
}

std::string audit_line(const Question& question, PromptStrategy strategy, int run_index,
                       const VerbalGrade& grade) {
    json entry;
    entry["question_id"] = question.question_id;
    entry["strategy"] = to_string(strategy);
    entry["run_index"] = run_index;
    entry["grade"] = grade.grade;
    entry["audit_flagged"] = grade.audit_flagged;
    entry["grader_text"] = grade.grader_text;
    return entry.dump();
}

struct RunCounters {
    int reask = 0;
    int grader_failures = 0;
};

// Score one final answer; backend trouble during free-text grading costs
// the accuracy, never the run.
Score score_with_fallback(const AlignedAnswer& final_answer, const TaskSpec& task,
                          const Question& question, Backend& backend,
                          const std::string& grader_model, PromptStrategy strategy,
                          int run_index, RunCounters& counters,
                          std::vector<std::string>& audit_lines) {
    bool graded_free_text = task.answer_kind == AnswerKind::Verbal &&
                            task.verbal_kind == VerbalKind::FreeText && final_answer.capable();
    VerbalGrade grade;
    try {
        Score score = score_question(final_answer, task, question, backend, grader_model,
                                     graded_free_text ? &grade : nullptr);
        if (graded_free_text) audit_lines.push_back(audit_line(question, strategy, run_index, grade));
        return score;
    } catch (const GraderUnavailable&) {
        ++counters.grader_failures;
        return Score{final_answer.capable() ? 1 : 0, 0.0};
    }
}

std::vector<EvaluationRecord> evaluate_run(const std::vector<Question>& questions,
                                           PromptStrategy strategy, int run_index,
                                           const RunConfig& config, const TaskRegistry& registry,
                                           const DemonstrationLibrary& library,
                                           const RefusalLexicon& lexicon, Backend& backend,
                                           const std::string& grader_model,
                                           RunCounters& counters,
                                           std::vector<std::string>& audit_lines) {
    struct Slot {
        std::string prompt;
        std::string text;
        AlignedAnswer aligned;
    };
    std::vector<std::vector<Slot>> panels(questions.size());

    std::vector<CompletionRequest> requests;
    std::vector<std::pair<std::size_t, std::size_t>> owners;
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
        PromptBundle bundle = build_prompt(strategy, questions[qi], library, config.panel_size);
        panels[qi].resize(bundle.prompts.size());
        for (std::size_t slot = 0; slot < bundle.prompts.size(); ++slot) {
            panels[qi][slot].prompt = bundle.prompts[slot];
            requests.push_back(answer_request(bundle.prompts[slot], config.backend));
            owners.emplace_back(qi, slot);
        }
    }
    std::vector<CompletionResponse> responses =
        dispatch_batch(backend, requests, config.backend.window);
    for (std::size_t i = 0; i < responses.size(); ++i) {
        auto [qi, slot] = owners[i];
        const TaskSpec& task = registry.at(questions[qi].task_key);
        panels[qi][slot].text = responses[i].text;
        panels[qi][slot].aligned = align(responses[i].text, task, questions[qi], lexicon);
    }

    // Unparseable answers earn exactly one follow-up with a format reminder;
    // whatever comes back the second time is final.
    std::vector<CompletionRequest> reasks;
    std::vector<std::pair<std::size_t, std::size_t>> reask_owners;
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
        std::string reminder = format_reminder(registry.at(questions[qi].task_key));
        if (reminder.empty()) continue;
        for (std::size_t slot = 0; slot < panels[qi].size(); ++slot) {
            const AlignedAnswer& aligned = panels[qi][slot].aligned;
            if (aligned.kind == AlignedAnswer::Kind::Incapable &&
                aligned.reason == IncapableReason::Unparseable) {
                reasks.push_back(
                    answer_request(panels[qi][slot].prompt + "\n" + reminder, config.backend));
                reask_owners.emplace_back(qi, slot);
            }
        }
    }
    counters.reask += static_cast<int>(reasks.size());
    std::vector<CompletionResponse> reask_responses =
        dispatch_batch(backend, reasks, config.backend.window);
    for (std::size_t i = 0; i < reask_responses.size(); ++i) {
        auto [qi, slot] = reask_owners[i];
        const TaskSpec& task = registry.at(questions[qi].task_key);
        panels[qi][slot].text = reask_responses[i].text;
        panels[qi][slot].aligned = align(reask_responses[i].text, task, questions[qi], lexicon);
    }

    std::vector<EvaluationRecord> records;
    records.reserve(questions.size());
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
        const Question& question = questions[qi];
        const TaskSpec& task = registry.at(question.task_key);
        AlignedAnswer final_answer;
        std::string raw_text;
        if (panels[qi].size() == 1) {
            final_answer = panels[qi][0].aligned;
            raw_text = panels[qi][0].text;
        } else {
            std::vector<AlignedAnswer> votes;
            votes.reserve(panels[qi].size());
            for (const Slot& slot : panels[qi]) votes.push_back(slot.aligned);
            final_answer = majority_vote(votes);
            raw_text = panels[qi][0].text;
            for (const Slot& slot : panels[qi]) {
                if (slot.aligned == final_answer) {
                    raw_text = slot.text;
                    break;
                }
            }
        }

        EvaluationRecord record;
        record.question_id = question.question_id;
        record.record_id = question.record_id;
        record.task_key = question.task_key;
        record.strategy = strategy;
        record.run_index = run_index;
        record.raw_text = raw_text;
        record.aligned = final_answer;
        record.score = score_with_fallback(final_answer, task, question, backend, grader_model,
                                           strategy, run_index, counters, audit_lines);
        if (task.answer_kind == AnswerKind::Mcq)
            record.truth_letter = option_letter(question.truth_index);
        records.push_back(std::move(record));
    }
    return records;
}

void emit_all_reports(const std::vector<EvaluationRecord>& records, const TaskRegistry& registry,
                      const std::vector<MaterialRecord>& materials,
                      const std::string& output_dir) {
    fs::create_directories(fs::path(output_dir) / "reports");
    for (Dimension dimension : kAllDimensions) {
        std::string stem = (fs::path(output_dir) / "reports" / to_string(dimension)).string();
        auto blocks = aggregate(records, dimension, registry, materials);
        emit_report(blocks, ReportFormat::Csv, stem + ".csv");
        emit_report(blocks, ReportFormat::Json, stem + ".json");
        auto summaries = summarize_runs(records, dimension, registry, materials);
        emit_report(summaries, ReportFormat::Csv, stem + "_summary.csv");
        emit_report(summaries, ReportFormat::Json, stem + "_summary.json");
    }
}

std::string records_path(const std::string& output_dir, PromptStrategy strategy) {
    return (fs::path(output_dir) / "records" / (std::string(to_string(strategy)) + ".jsonl"))
        .string();
}

void write_manifest(const RunConfig& config, const LoadedDataset& data,
                    const std::string& backend_mode, int questions_per_run, int evaluations,
                    const RunCounters& counters) {
    json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["run_seed"] = std::to_string(config.run_seed);
    manifest["run_count"] = config.run_count;
    manifest["panel_size"] = config.panel_size;
    json strategies = json::array();
    for (PromptStrategy strategy : config.strategies) strategies.push_back(to_string(strategy));
    manifest["strategies"] = strategies;
    json backend;
    backend["mode"] = backend_mode;
    backend["model"] = config.backend.model;
    backend["temperature"] = config.backend.temperature;
    backend["endpoint"] = config.backend.endpoint;
    backend["replay"] = config.backend.replay_path;
    manifest["backend"] = backend;
    manifest["grader_model"] = resolved_grader_model(config);
    json datasets = json::object();
    for (const DatasetSource& source : data.sources) {
        json entry;
        entry["path"] = source.path;
        entry["records"] = source.records;
        entry["digest"] = source.digest;
        datasets[to_string(source.category)] = entry;
    }
    manifest["datasets"] = datasets;
    manifest["questions_per_run"] = questions_per_run;
    manifest["evaluations"] = evaluations;
    manifest["reask_count"] = counters.reask;
    manifest["grader_failures"] = counters.grader_failures;
    write_file((fs::path(config.output_dir) / "manifest.json").string(),
               manifest.dump(2) + "\n");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source_name) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#') continue;
        if (entry.front() == '[') {
            if (entry.back() != ']')
                throw ConfigError(source_name + ":" + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(entry.substr(1, entry.size() - 2));
            if (section != "dataset" && section != "run" && section != "backend")
                throw ConfigError(source_name + ": unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(line_no) +
                              ": expected key = value");
        std::string key = trim(entry.substr(0, eq));
        std::string value = trim(entry.substr(eq + 1));
        if (section.empty())
            throw ConfigError(source_name + ": key \"" + key +
                              "\" appears before any section header");
        assign_field(config, section, key, value, source_name);
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path);
}

void validate_run_config(const RunConfig& config) {
    if (config.run_count < 1) throw ConfigError("run.run_count must be at least 1");
    if (config.panel_size < 1) throw ConfigError("run.panel_size must be at least 1");
    if (config.strategies.empty())
        throw ConfigError("run.strategies must list at least one strategy");
    require_datasets(config);
    if (config.backend.replay_path.empty() && config.backend.endpoint.empty())
        throw ConfigError("backend.replay or backend.endpoint must be set");
    if (config.backend.window < 1) throw ConfigError("backend.window must be at least 1");
}

std::string config_hash(const RunConfig& config) {
    json fields;
    fields["molecule"] = config.molecule_path;
    fields["enzyme"] = config.enzyme_path;
    fields["crystal"] = config.crystal_path;
    json strategies = json::array();
    for (PromptStrategy strategy : config.strategies) strategies.push_back(to_string(strategy));
    fields["strategies"] = strategies;
    fields["panel_size"] = config.panel_size;
    fields["run_count"] = config.run_count;
    fields["run_seed"] = std::to_string(config.run_seed);
    fields["grader_model"] = config.grader_model;
    fields["model"] = config.backend.model;
    fields["temperature"] = config.backend.temperature;
    fields["endpoint"] = config.backend.endpoint;
    fields["replay"] = config.backend.replay_path;
    return fnv1a128(fields.dump()).hex();
}

CompletionRequest answer_request(const std::string& prompt, const BackendSettings& backend) {
    CompletionRequest request;
    request.model = backend.model;
    request.messages = {{"user", prompt}};
    request.temperature = backend.temperature;
    return request;
}

std::string format_reminder(const TaskSpec& task) {
    if (task.answer_kind == AnswerKind::Mcq)
        return "Answer with a single option letter among A, B, C, D, and E.";
    if (task.verbal_kind == VerbalKind::YesNo) return "Answer Yes or No.";
    if (task.verbal_kind == VerbalKind::Categorical)
        return "Answer with exactly one label from the question.";
    return "";
}

RunResult cmd_run(const RunConfig& config) {
    validate_run_config(config);
    const TaskRegistry& registry = TaskRegistry::builtin();
    LoadedDataset data = load_datasets(config, registry);
    std::vector<Question> questions = build_questions(data.materials, registry, config.run_seed);
    if (questions.empty()) throw ConfigError("dataset files yield no questions");
    std::string backend_mode;
    std::shared_ptr<Backend> backend = make_backend(config.backend, &backend_mode);
    const DemonstrationLibrary& library = DemonstrationLibrary::builtin();
    const RefusalLexicon& lexicon = RefusalLexicon::builtin();
    std::string grader_model = resolved_grader_model(config);

    fs::create_directories(fs::path(config.output_dir) / "records");

    RunResult result;
    result.output_dir = config.output_dir;
    result.question_count = static_cast<int>(questions.size());
    RunCounters counters;
    std::vector<std::string> audit_lines;
    for (PromptStrategy strategy : config.strategies) {
        std::vector<EvaluationRecord> strategy_records;
        for (int run = 0; run < config.run_count; ++run) {
            std::vector<EvaluationRecord> run_records =
                evaluate_run(questions, strategy, run, config, registry, library, lexicon,
                             *backend, grader_model, counters, audit_lines);
            for (EvaluationRecord& record : run_records)
                strategy_records.push_back(std::move(record));
        }
        write_file(records_path(config.output_dir, strategy),
                   serialize_evaluations_jsonl(strategy_records));
        for (EvaluationRecord& record : strategy_records)
            result.records.push_back(std::move(record));
    }
    result.evaluation_count = static_cast<int>(result.records.size());
    result.reask_count = counters.reask;
    result.grader_failures = counters.grader_failures;

    write_file((fs::path(config.output_dir) / "questions.jsonl").string(),
               serialize_questions_jsonl(questions));
    std::string audit_text;
    for (const std::string& line : audit_lines) {
        audit_text += line;
        audit_text += '\n';
    }
    write_file((fs::path(config.output_dir) / "records" / "grader_audit.jsonl").string(),
               audit_text);
    emit_all_reports(result.records, registry, data.materials, config.output_dir);
    write_manifest(config, data, backend_mode, result.question_count, result.evaluation_count,
                   counters);
    return result;
}

std::map<MaterialCategory, int> cmd_ingest(const RunConfig& config) {
    require_datasets(config);
    LoadedDataset data = load_datasets(config, TaskRegistry::builtin());
    std::map<MaterialCategory, int> counts;
    for (const MaterialRecord& record : data.materials) ++counts[record.category];
    return counts;
}

std::vector<Question> cmd_gen(const RunConfig& config) {
    require_datasets(config);
    const TaskRegistry& registry = TaskRegistry::builtin();
    LoadedDataset data = load_datasets(config, registry);
    std::vector<Question> questions = build_questions(data.materials, registry, config.run_seed);
    fs::create_directories(config.output_dir);
    write_file((fs::path(config.output_dir) / "questions.jsonl").string(),
               serialize_questions_jsonl(questions));
    return questions;
}

int cmd_grade(const RunConfig& config) {
    validate_run_config(config);
    const TaskRegistry& registry = TaskRegistry::builtin();
    LoadedDataset data = load_datasets(config, registry);
    std::vector<Question> questions = build_questions(data.materials, registry, config.run_seed);
    std::map<std::string, const Question*> by_id;
    for (const Question& question : questions) by_id[question.question_id] = &question;
    std::shared_ptr<Backend> backend = make_backend(config.backend, nullptr);
    const RefusalLexicon& lexicon = RefusalLexicon::builtin();
    std::string grader_model = resolved_grader_model(config);

    RunCounters counters;
    std::vector<std::string> audit_lines;
    std::vector<EvaluationRecord> pooled;
    int regraded = 0;
    for (PromptStrategy strategy : config.strategies) {
        std::string path = records_path(config.output_dir, strategy);
        if (!fs::exists(path))
            throw ConfigError(std::string("no records for ") + to_string(strategy) + ": " + path);
        std::vector<EvaluationRecord> records = parse_evaluations_jsonl(read_file(path));
        for (EvaluationRecord& record : records) {
            auto found = by_id.find(record.question_id);
            if (found == by_id.end())
                throw ConfigError("records mention unknown question " + record.question_id);
            const Question& question = *found->second;
            const TaskSpec& task = registry.at(question.task_key);
            record.aligned = align(record.raw_text, task, question, lexicon);
            record.score =
                score_with_fallback(record.aligned, task, question, *backend, grader_model,
                                    strategy, record.run_index, counters, audit_lines);
            if (task.answer_kind == AnswerKind::Mcq)
                record.truth_letter = option_letter(question.truth_index);
            else
                record.truth_letter.reset();
            ++regraded;
        }
        write_file(path, serialize_evaluations_jsonl(records));
        for (EvaluationRecord& record : records) pooled.push_back(std::move(record));
    }
    std::string audit_text;
    for (const std::string& line : audit_lines) {
        audit_text += line;
        audit_text += '\n';
    }
    write_file((fs::path(config.output_dir) / "records" / "grader_audit.jsonl").string(),
               audit_text);
    emit_all_reports(pooled, registry, data.materials, config.output_dir);
    return regraded;
}

void cmd_report(const RunConfig& config) {
    require_datasets(config);
    if (config.strategies.empty())
        throw ConfigError("run.strategies must list at least one strategy");
    const TaskRegistry& registry = TaskRegistry::builtin();
    LoadedDataset data = load_datasets(config, registry);
    std::vector<EvaluationRecord> pooled;
    for (PromptStrategy strategy : config.strategies) {
        std::string path = records_path(config.output_dir, strategy);
        if (!fs::exists(path))
            throw ConfigError(std::string("no records for ") + to_string(strategy) + ": " + path);
        std::vector<EvaluationRecord> records = parse_evaluations_jsonl(read_file(path));
        for (EvaluationRecord& record : records) pooled.push_back(std::move(record));
    }
    emit_all_reports(pooled, registry, data.materials, config.output_dir);
}

}  // namespace chemprompt
