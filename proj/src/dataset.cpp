#include "chemprompt/dataset.hpp"

#include <fstream>
#include <sstream>

#include "chemprompt/chem.hpp"
#include "chemprompt/embedded.hpp"
#include "chemprompt/strings.hpp"
#include "json.hpp"

namespace chemprompt {

using nlohmann::json;

const char* to_string(MaterialCategory c) {
    switch (c) {
        case MaterialCategory::SmallMolecule: return "small_molecule";
        case MaterialCategory::Enzyme: return "enzyme";
        case MaterialCategory::Crystal: return "crystal";
    }
    return "?";
}

const char* to_string(OutputType t) {
    switch (t) {
        case OutputType::NumericByLogic: return "numeric_by_logic";
        case OutputType::NumericByExperiment: return "numeric_by_experiment";
        case OutputType::VerbalByLogic: return "verbal_by_logic";
        case OutputType::VerbalByExperiment: return "verbal_by_experiment";
    }
    return "?";
}

const char* to_string(ReasoningParadigm p) {
    switch (p) {
        case ReasoningParadigm::Arithmetic: return "arithmetic";
        case ReasoningParadigm::Spatial: return "spatial";
        case ReasoningParadigm::DomainLiteral: return "domain_literal";
        case ReasoningParadigm::CommonRetrieval: return "common_retrieval";
        case ReasoningParadigm::UncommonRetrieval: return "uncommon_retrieval";
    }
    return "?";
}

const char* to_string(CotComplexity c) {
    switch (c) {
        case CotComplexity::NoExtra: return "no_extra";
        case CotComplexity::OneExtra: return "one_extra";
        case CotComplexity::MultiExtra: return "multi_extra";
    }
    return "?";
}

namespace {

template <typename Enum>
Enum enum_from(const std::string& token, std::initializer_list<std::pair<const char*, Enum>> table,
               const char* what) {
    for (const auto& [name, value] : table)
        if (token == name) return value;
    throw RegistryError(std::string("unknown ") + what + " '" + token + "'");
}

MaterialCategory category_from(const std::string& s) {
    return enum_from<MaterialCategory>(s,
                                       {{"small_molecule", MaterialCategory::SmallMolecule},
                                        {"enzyme", MaterialCategory::Enzyme},
                                        {"crystal", MaterialCategory::Crystal}},
                                       "category");
}

TaskSpec task_from_json(const json& j) {
    TaskSpec task;
    task.key = j.at("key").get<std::string>();
    task.category = category_from(j.at("category").get<std::string>());
    task.output_type = enum_from<OutputType>(
        j.at("output_type").get<std::string>(),
        {{"numeric_by_logic", OutputType::NumericByLogic},
         {"numeric_by_experiment", OutputType::NumericByExperiment},
         {"verbal_by_logic", OutputType::VerbalByLogic},
         {"verbal_by_experiment", OutputType::VerbalByExperiment}},
        "output type");
    task.reasoning = enum_from<ReasoningParadigm>(
        j.at("reasoning").get<std::string>(),
        {{"arithmetic", ReasoningParadigm::Arithmetic},
         {"spatial", ReasoningParadigm::Spatial},
         {"domain_literal", ReasoningParadigm::DomainLiteral},
         {"common_retrieval", ReasoningParadigm::CommonRetrieval},
         {"uncommon_retrieval", ReasoningParadigm::UncommonRetrieval}},
        "reasoning paradigm");
    task.cot = enum_from<CotComplexity>(j.at("cot").get<std::string>(),
                                        {{"no_extra", CotComplexity::NoExtra},
                                         {"one_extra", CotComplexity::OneExtra},
                                         {"multi_extra", CotComplexity::MultiExtra}},
                                        "cot complexity");

    const json& answer = j.at("answer");
    std::string kind = answer.at("kind").get<std::string>();
    if (kind == "mcq") {
        task.answer_kind = AnswerKind::Mcq;
        McqPolicy policy;
        std::string pk = answer.at("policy").get<std::string>();
        if (pk == "fixed") policy.kind = McqPolicyKind::FixedOptions;
        else if (pk == "single") policy.kind = McqPolicyKind::SingleValued;
        else if (pk == "interval") policy.kind = McqPolicyKind::IntervalValued;
        else throw RegistryError("unknown mcq policy '" + pk + "' for task '" + task.key + "'");
        policy.unit = answer.value("unit", std::string());
        if (policy.kind == McqPolicyKind::FixedOptions) {
            policy.fixed_options = answer.at("options").get<std::vector<std::string>>();
        } else {
            policy.step = answer.at("step").get<double>();
            if (answer.contains("min")) policy.min_value = answer.at("min").get<double>();
        }
        task.policy = std::move(policy);
    } else if (kind == "verbal") {
        task.answer_kind = AnswerKind::Verbal;
        std::string vk = answer.at("verbal").get<std::string>();
        if (vk == "yes_no") {
            task.verbal_kind = VerbalKind::YesNo;
            task.labels = {"Yes", "No"};
        } else if (vk == "categorical") {
            task.verbal_kind = VerbalKind::Categorical;
            task.labels = answer.at("labels").get<std::vector<std::string>>();
        } else if (vk == "free_text") {
            task.verbal_kind = VerbalKind::FreeText;
        } else {
            throw RegistryError("unknown verbal kind '" + vk + "' for task '" + task.key + "'");
        }
    } else {
        throw RegistryError("unknown answer kind '" + kind + "' for task '" + task.key + "'");
    }
    task.extra_properties = j.value("extras", std::vector<std::string>());
    return task;
}

void validate_task(const TaskSpec& task, const TaskRegistry& registry) {
    const std::string& key = task.key;
    if (key.empty()) throw RegistryError("task with empty key");
    if (task.answer_kind == AnswerKind::Mcq) {
        const McqPolicy& p = *task.policy;
        if (p.kind == McqPolicyKind::FixedOptions) {
            if (p.fixed_options.size() != 5)
                throw RegistryError("task '" + key + "' needs exactly five fixed options");
        } else if (!(p.step > 0)) {
            throw RegistryError("task '" + key + "' needs a positive step");
        }
    } else if (task.verbal_kind == VerbalKind::Categorical && task.labels.size() < 2) {
        throw RegistryError("task '" + key + "' needs at least two labels");
    }

    std::size_t expected_min = task.cot == CotComplexity::NoExtra  ? 0
                               : task.cot == CotComplexity::OneExtra ? 1
                                                                     : 2;
    std::size_t expected_max = task.cot == CotComplexity::NoExtra  ? 0
                               : task.cot == CotComplexity::OneExtra ? 1
                                                                     : SIZE_MAX;
    if (task.extra_properties.size() < expected_min || task.extra_properties.size() > expected_max)
        throw RegistryError("task '" + key + "' extra property count does not match " +
                            to_string(task.cot));
    for (const std::string& extra : task.extra_properties) {
        const TaskSpec* other = registry.find(extra);
        if (!other || other->key != extra)
            throw RegistryError("task '" + key + "' references unknown extra '" + extra + "'");
        if (other->category != task.category)
            throw RegistryError("task '" + key + "' extra '" + extra + "' crosses categories");
        if (extra == key)
            throw RegistryError("task '" + key + "' lists itself as an extra");
    }
}

}  // namespace

TaskRegistry TaskRegistry::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw RegistryError(std::string("registry is not valid JSON: ") + e.what());
    }
    TaskRegistry registry;
    try {
        for (const json& tj : j.at("tasks")) {
            TaskSpec task = task_from_json(tj);
            if (registry.by_key_.count(task.key))
                throw RegistryError("duplicate task key '" + task.key + "'");
            registry.by_key_[task.key] = registry.tasks_.size();
            registry.tasks_.push_back(std::move(task));
        }
    } catch (const json::exception& e) {
        throw RegistryError(std::string("registry shape error: ") + e.what());
    }
    for (const TaskSpec& task : registry.tasks_) validate_task(task, registry);
    return registry;
}

const TaskRegistry& TaskRegistry::builtin() {
    static const TaskRegistry registry = from_json(embedded::kTaskRegistryJson);
    return registry;
}

std::vector<const TaskSpec*> TaskRegistry::tasks_for(MaterialCategory c) const {
    std::vector<const TaskSpec*> out;
    for (const TaskSpec& task : tasks_)
        if (task.category == c) out.push_back(&task);
    return out;
}

const TaskSpec& TaskRegistry::at(const std::string& key) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) throw RegistryError("no task named '" + key + "'");
    return tasks_[it->second];
}

const TaskSpec* TaskRegistry::find(const std::string& key_or_prefix) const {
    auto it = by_key_.find(key_or_prefix);
    if (it != by_key_.end()) return &tasks_[it->second];
    const TaskSpec* match = nullptr;
    for (const TaskSpec& task : tasks_) {
        if (starts_with(task.key, key_or_prefix)) {
            if (match) return nullptr;  // ambiguous prefix
            match = &task;
        }
    }
    return match;
}

GroundTruthValue GroundTruthValue::numeric(double v, std::string unit) {
    GroundTruthValue g;
    g.kind = Kind::Numeric;
    g.number = v;
    g.unit = std::move(unit);
    return g;
}

GroundTruthValue GroundTruthValue::categorical(std::string label) {
    GroundTruthValue g;
    g.kind = Kind::Categorical;
    g.text = std::move(label);
    return g;
}

GroundTruthValue GroundTruthValue::free_text(std::string text) {
    GroundTruthValue g;
    g.kind = Kind::FreeText;
    g.text = std::move(text);
    return g;
}

IngestError::IngestError(IngestErrorKind kind, std::string source, std::size_t row,
                         std::string field, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(row) +
                         (field.empty() ? "" : " [" + field + "]") + ": " + what),
      kind_(kind),
      source_(std::move(source)),
      row_(row),
      field_(std::move(field)) {}

namespace {

[[noreturn]] void ingest_fail(IngestErrorKind kind, const std::string& source, std::size_t row,
                              const std::string& field, const std::string& what) {
    throw IngestError(kind, source, row, field, what);
}

GroundTruthValue value_from_json(const json& j, const std::string& source, std::size_t row,
                                 const std::string& field) {
    if (!j.is_object())
        ingest_fail(IngestErrorKind::BadValue, source, row, field, "ground truth must be an object");
    int shapes = int(j.contains("value")) + int(j.contains("label")) + int(j.contains("text"));
    if (shapes != 1)
        ingest_fail(IngestErrorKind::BadValue, source, row, field,
                    "ground truth needs exactly one of value/label/text");
    if (j.contains("value")) {
        if (!j.at("value").is_number())
            ingest_fail(IngestErrorKind::BadValue, source, row, field, "'value' must be a number");
        return GroundTruthValue::numeric(j.at("value").get<double>(),
                                         j.value("unit", std::string()));
    }
    if (j.contains("label")) return GroundTruthValue::categorical(j.at("label").get<std::string>());
    return GroundTruthValue::free_text(j.at("text").get<std::string>());
}

void check_identifier(const MaterialRecord& record, const char* name, const std::string& source,
                      std::size_t row) {
    auto it = record.identifiers.find(name);
    if (it == record.identifiers.end() || trim(it->second).empty())
        ingest_fail(IngestErrorKind::MissingIdentifier, source, row,
                    std::string("identifiers.") + name,
                    std::string(to_string(record.category)) + " record '" + record.id +
                        "' lacks identifier '" + name + "'");
}

void validate_record(const MaterialRecord& record, const TaskRegistry& registry,
                     const std::string& source, std::size_t row) {
    switch (record.category) {
        case MaterialCategory::SmallMolecule:
            check_identifier(record, "smiles", source, row);
            break;
        case MaterialCategory::Enzyme:
            check_identifier(record, "ec", source, row);
            break;
        case MaterialCategory::Crystal:
            check_identifier(record, "mp_id", source, row);
            check_identifier(record, "formula", source, row);
            break;
    }

    for (const auto& [key, value] : record.ground_truth) {
        const TaskSpec* task = nullptr;
        try {
            task = &registry.at(key);
        } catch (const RegistryError&) {
            ingest_fail(IngestErrorKind::UnknownTaskKey, source, row, "ground_truth." + key,
                        "no task named '" + key + "'");
        }
        if (task->category != record.category)
            ingest_fail(IngestErrorKind::UnknownTaskKey, source, row, "ground_truth." + key,
                        "task '" + key + "' belongs to " + to_string(task->category));
        if (task->answer_kind == AnswerKind::Mcq) {
            if (value.kind != GroundTruthValue::Kind::Numeric)
                ingest_fail(IngestErrorKind::BadValue, source, row, "ground_truth." + key,
                            "task '" + key + "' needs a numeric value");
            if (value.unit != task->policy->unit)
                ingest_fail(IngestErrorKind::UnitMismatch, source, row, "ground_truth." + key,
                            "unit '" + value.unit + "' does not match policy unit '" +
                                task->policy->unit + "'");
        } else if (task->verbal_kind == VerbalKind::FreeText) {
            if (value.kind != GroundTruthValue::Kind::FreeText || trim(value.text).empty())
                ingest_fail(IngestErrorKind::BadValue, source, row, "ground_truth." + key,
                            "task '" + key + "' needs non-empty text");
        } else {
            if (value.kind != GroundTruthValue::Kind::Categorical)
                ingest_fail(IngestErrorKind::BadValue, source, row, "ground_truth." + key,
                            "task '" + key + "' needs a label");
            bool known = false;
            for (const std::string& label : task->labels) known = known || label == value.text;
            if (!known)
                ingest_fail(IngestErrorKind::BadValue, source, row, "ground_truth." + key,
                            "label '" + value.text + "' is not among the task labels");
        }
    }

    // the question grid is complete by construction: a record missing any
    // applicable ground truth is an error, not a skip
    for (const TaskSpec* task : registry.tasks_for(record.category)) {
        if (!record.ground_truth.count(task->key))
            ingest_fail(IngestErrorKind::MissingGroundTruth, source, row,
                        "ground_truth." + task->key,
                        "record '" + record.id + "' lacks ground truth for '" + task->key + "'");
    }

    // recomputable complexity indicators must agree with the identifiers
    auto indicator = [&](const char* name) -> std::optional<double> {
        auto it = record.complexity.find(name);
        if (it == record.complexity.end()) return std::nullopt;
        return it->second;
    };
    try {
        if (record.category == MaterialCategory::SmallMolecule) {
            if (auto expected = indicator("distinct_element_count")) {
                int actual = chem::distinct_element_count(
                    chem::atom_counts(record.identifiers.at("smiles")));
                if (actual != static_cast<int>(*expected))
                    ingest_fail(IngestErrorKind::IndicatorMismatch, source, row,
                                "complexity.distinct_element_count",
                                "recomputed " + std::to_string(actual) + " from the SMILES");
            }
        } else if (record.category == MaterialCategory::Crystal) {
            if (auto expected = indicator("formula_atom_count")) {
                int actual = chem::formula_atom_count(
                    chem::parse_composition(record.identifiers.at("formula")));
                if (actual != static_cast<int>(*expected))
                    ingest_fail(IngestErrorKind::IndicatorMismatch, source, row,
                                "complexity.formula_atom_count",
                                "recomputed " + std::to_string(actual) + " from the formula");
            }
        }
    } catch (const chem::ChemError& e) {
        ingest_fail(IngestErrorKind::BadValue, source, row, "identifiers",
                    std::string("identifier does not parse: ") + e.what());
    }
}

}  // namespace

std::vector<MaterialRecord> parse_records_jsonl(const std::string& text,
                                                const TaskRegistry& registry,
                                                const std::string& source_name) {
    std::vector<MaterialRecord> records;
    std::map<std::string, std::size_t> seen_ids;
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            ingest_fail(IngestErrorKind::Malformed, source_name, row, "",
                        std::string("not valid JSON: ") + e.what());
        }
        MaterialRecord record;
        try {
            record.id = j.at("id").get<std::string>();
            record.category = category_from(j.at("category").get<std::string>());
            record.name = j.value("name", std::string());
            if (j.contains("identifiers"))
                record.identifiers =
                    j.at("identifiers").get<std::map<std::string, std::string>>();
            if (j.contains("ground_truth"))
                for (const auto& [key, value] : j.at("ground_truth").items())
                    record.ground_truth[key] =
                        value_from_json(value, source_name, row, "ground_truth." + key);
            if (j.contains("complexity"))
                record.complexity = j.at("complexity").get<std::map<std::string, double>>();
        } catch (const json::exception& e) {
            ingest_fail(IngestErrorKind::Malformed, source_name, row, "",
                        std::string("record shape error: ") + e.what());
        } catch (const RegistryError& e) {
            ingest_fail(IngestErrorKind::Malformed, source_name, row, "category", e.what());
        }
        if (record.id.empty())
            ingest_fail(IngestErrorKind::Malformed, source_name, row, "id", "empty record id");
        if (auto it = seen_ids.find(record.id); it != seen_ids.end())
            ingest_fail(IngestErrorKind::DuplicateId, source_name, row, "id",
                        "id '" + record.id + "' already used on line " +
                            std::to_string(it->second));
        seen_ids[record.id] = row;
        validate_record(record, registry, source_name, row);
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<MaterialRecord> load_records(const std::string& path, const TaskRegistry& registry) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError(IngestErrorKind::Malformed, path, 0, "", "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_records_jsonl(buffer.str(), registry, path);
}

std::string serialize_records_jsonl(const std::vector<MaterialRecord>& records) {
    std::string out;
    for (const MaterialRecord& record : records) {
        json j;
        j["id"] = record.id;
        j["category"] = to_string(record.category);
        if (!record.name.empty()) j["name"] = record.name;
        if (!record.identifiers.empty()) j["identifiers"] = record.identifiers;
        json gt = json::object();
        for (const auto& [key, value] : record.ground_truth) {
            json vj;
            switch (value.kind) {
                case GroundTruthValue::Kind::Numeric:
                    vj["value"] = value.number;
                    if (!value.unit.empty()) vj["unit"] = value.unit;
                    break;
                case GroundTruthValue::Kind::Categorical: vj["label"] = value.text; break;
                case GroundTruthValue::Kind::FreeText: vj["text"] = value.text; break;
            }
            gt[key] = std::move(vj);
        }
        j["ground_truth"] = std::move(gt);
        if (!record.complexity.empty()) j["complexity"] = record.complexity;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<QuestionInstance> expand_questions(const std::vector<MaterialRecord>& records,
                                               const TaskRegistry& registry) {
    std::vector<QuestionInstance> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const TaskSpec* task : registry.tasks_for(records[i].category)) {
            QuestionInstance q;
            q.record_index = i;
            q.task_key = task->key;
            q.question_id = records[i].id + "::" + task->key;
            out.push_back(std::move(q));
        }
    }
    return out;
}

}  // namespace chemprompt
