#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemprompt {

enum class MaterialCategory { SmallMolecule, Enzyme, Crystal };

// Output-type taxonomy: what kind of answer a task expects and where it
// comes from (closed-form derivation vs reported measurement).
enum class OutputType { NumericByLogic, NumericByExperiment, VerbalByLogic, VerbalByExperiment };

enum class ReasoningParadigm { Arithmetic, Spatial, DomainLiteral, CommonRetrieval, UncommonRetrieval };

// How many auxiliary property values the task's reasoning chain leans on;
// extra_properties in the TaskSpec lists exactly those keys.
enum class CotComplexity { NoExtra, OneExtra, MultiExtra };

enum class AnswerKind { Mcq, Verbal };
enum class VerbalKind { YesNo, Categorical, FreeText };
enum class McqPolicyKind { FixedOptions, SingleValued, IntervalValued };

const char* to_string(MaterialCategory c);
const char* to_string(OutputType t);
const char* to_string(ReasoningParadigm p);
const char* to_string(CotComplexity c);

struct McqPolicy {
    McqPolicyKind kind = McqPolicyKind::SingleValued;
    double step = 0;                          // SingleValued / IntervalValued
    std::vector<std::string> fixed_options;   // FixedOptions: exactly five, adjacency-ordered
    std::string unit;                         // "(unit: g/mol)" or ""
    std::optional<double> min_value;          // floor for generated option grids

    bool operator==(const McqPolicy&) const = default;
};

struct TaskSpec {
    std::string key;
    MaterialCategory category = MaterialCategory::SmallMolecule;
    OutputType output_type = OutputType::NumericByExperiment;
    ReasoningParadigm reasoning = ReasoningParadigm::CommonRetrieval;
    CotComplexity cot = CotComplexity::NoExtra;
    AnswerKind answer_kind = AnswerKind::Verbal;
    VerbalKind verbal_kind = VerbalKind::FreeText;
    std::vector<std::string> labels;          // YesNo / Categorical label set
    std::optional<McqPolicy> policy;          // present iff answer_kind == Mcq
    std::vector<std::string> extra_properties;  // keys whose values the stem provides

    bool operator==(const TaskSpec&) const = default;
};

class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TaskRegistry {
public:
    // Parses and structurally validates a registry: five options on fixed
    // policies, positive steps, extra keys resolving to tasks of the same
    // category, and |extra_properties| consistent with cot.
    static TaskRegistry from_json(const std::string& json_text);

    // The compiled-in registry of all 32 tasks.
    static const TaskRegistry& builtin();

    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    std::vector<const TaskSpec*> tasks_for(MaterialCategory c) const;

    const TaskSpec& at(const std::string& key) const;  // exact key, RegistryError if absent
    // exact match first, then unique prefix; nullptr when nothing or several match
    const TaskSpec* find(const std::string& key_or_prefix) const;

private:
    std::vector<TaskSpec> tasks_;
    std::map<std::string, std::size_t> by_key_;
};

struct GroundTruthValue {
    enum class Kind { Numeric, Categorical, FreeText };
    Kind kind = Kind::FreeText;
    double number = 0;
    std::string unit;  // Numeric only; must match the task policy unit
    std::string text;  // Categorical label or free text

    static GroundTruthValue numeric(double v, std::string unit = "");
    static GroundTruthValue categorical(std::string label);
    static GroundTruthValue free_text(std::string text);

    bool operator==(const GroundTruthValue&) const = default;
};

struct MaterialRecord {
    std::string id;
    MaterialCategory category = MaterialCategory::SmallMolecule;
    std::string name;
    std::map<std::string, std::string> identifiers;          // smiles / ec / mp_id / formula
    std::map<std::string, GroundTruthValue> ground_truth;    // task key -> value
    std::map<std::string, double> complexity;                // indicator name -> value

    bool operator==(const MaterialRecord&) const = default;
};

enum class IngestErrorKind {
    Malformed,
    MissingIdentifier,
    UnknownTaskKey,
    UnitMismatch,
    MissingGroundTruth,
    BadValue,
    DuplicateId,
    IndicatorMismatch,
};

class IngestError : public std::runtime_error {
public:
    IngestError(IngestErrorKind kind, std::string source, std::size_t row, std::string field,
                const std::string& what);
    IngestErrorKind kind() const { return kind_; }
    const std::string& source() const { return source_; }
    std::size_t row() const { return row_; }          // 1-based line in the source
    const std::string& field() const { return field_; }

private:
    IngestErrorKind kind_;
    std::string source_;
    std::size_t row_;
    std::string field_;
};

// One JSON object per line. Every record must carry a ground truth for every
// registry task of its category; absences are ingestion errors, not skips.
std::vector<MaterialRecord> parse_records_jsonl(const std::string& text,
                                                const TaskRegistry& registry,
                                                const std::string& source_name);
std::vector<MaterialRecord> load_records(const std::string& path, const TaskRegistry& registry);
std::string serialize_records_jsonl(const std::vector<MaterialRecord>& records);

struct QuestionInstance {
    std::size_t record_index = 0;
    std::string task_key;
    std::string question_id;  // "<record id>::<task key>"
};

// Cartesian product of records with their category's tasks, records in input
// order, tasks in registry order.
std::vector<QuestionInstance> expand_questions(const std::vector<MaterialRecord>& records,
                                               const TaskRegistry& registry);

}  // namespace chemprompt
