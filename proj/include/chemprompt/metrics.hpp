#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemprompt/alignment.hpp"
#include "chemprompt/dataset.hpp"
#include "chemprompt/grading.hpp"
#include "chemprompt/prompts.hpp"

namespace chemprompt {

// One answered question after alignment and scoring; the unit all
// metrics aggregate over.
struct EvaluationRecord {
    std::string question_id;
    std::string record_id;
    std::string task_key;
    PromptStrategy strategy = PromptStrategy::ZeroShot;
    int run_index = 0;
    std::string raw_text;
    AlignedAnswer aligned;
    Score score;
    std::optional<char> truth_letter;  // present iff the task is multiple-choice

    bool operator==(const EvaluationRecord&) const = default;
};

struct MetricBlock {
    double capability = 0;
    double accuracy = 0;
    std::optional<double> f1;                  // from the multiple-choice subset
    std::optional<double> hallucination_drop;  // absent when capability is 0
    int n = 0;

    bool operator==(const MetricBlock&) const = default;
};

class EmptySet : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Share of records bearing any effective answer.
double capability_rate(const std::vector<EvaluationRecord>& records);

// Mean per-question score; incapable answers count as 0.
double accuracy_mean(const std::vector<EvaluationRecord>& records);

// Macro F1 over the five letters, one-vs-rest. An incapable record
// predicts no letter; a letter with an empty prediction or truth count
// contributes 0. Records must carry a truth letter.
double f1_macro(const std::vector<EvaluationRecord>& records);

// 1 - accuracy / capability. Throws std::domain_error when capability is 0.
double hallucination_drop(double capability, double accuracy);

// All four metrics for one record set.
MetricBlock metric_block(const std::vector<EvaluationRecord>& records);

enum class Dimension {
    Strategy,
    TaskKey,
    OutputType,
    ReasoningParadigm,
    CotComplexity,
    MaterialCategory,
    ComplexityBucket,
};

inline constexpr Dimension kAllDimensions[] = {
    Dimension::Strategy,         Dimension::TaskKey,
    Dimension::OutputType,       Dimension::ReasoningParadigm,
    Dimension::CotComplexity,    Dimension::MaterialCategory,
    Dimension::ComplexityBucket,
};

const char* to_string(Dimension d);
Dimension dimension_from(const std::string& token);

// Partitions records along one dimension and computes a block per group.
// Taxonomy dimensions resolve task_key through the registry; the
// ComplexityBucket dimension bins each record's material indicators and
// needs the material records.
std::map<std::string, MetricBlock> aggregate(
    const std::vector<EvaluationRecord>& records, Dimension dimension,
    const TaskRegistry& registry = TaskRegistry::builtin(),
    const std::vector<MaterialRecord>& materials = {});

struct MetricTriple {
    double mean = 0;
    double min = 0;
    double max = 0;

    bool operator==(const MetricTriple&) const = default;
};

// Per-run metrics folded to mean and spread, the default presentation
// for repeated runs. Optional metrics summarize the runs where defined.
struct RunSummary {
    int runs = 0;
    int n_total = 0;
    MetricTriple capability;
    MetricTriple accuracy;
    std::optional<MetricTriple> f1;
    std::optional<MetricTriple> hallucination_drop;

    bool operator==(const RunSummary&) const = default;
};

std::map<std::string, RunSummary> summarize_runs(
    const std::vector<EvaluationRecord>& records, Dimension dimension,
    const TaskRegistry& registry = TaskRegistry::builtin(),
    const std::vector<MaterialRecord>& materials = {});

enum class ReportFormat { Csv, Json };

// Columns group, n, capability, accuracy, f1, hallucination_drop. CSV
// rounds to 4 decimals and leaves absent metrics blank; JSON keeps full
// precision and reparses to equal blocks.
std::string render_report(const std::map<std::string, MetricBlock>& blocks,
                          ReportFormat format);
std::string render_report(const std::map<std::string, RunSummary>& summaries,
                          ReportFormat format);
void emit_report(const std::map<std::string, MetricBlock>& blocks, ReportFormat format,
                 const std::string& path);
void emit_report(const std::map<std::string, RunSummary>& summaries, ReportFormat format,
                 const std::string& path);
std::map<std::string, MetricBlock> parse_report_json(const std::string& json_text);

// Flat per-question persistence, one JSON object per line; the parse
// inverts the serialize exactly.
std::string serialize_evaluations_jsonl(const std::vector<EvaluationRecord>& records);
std::vector<EvaluationRecord> parse_evaluations_jsonl(const std::string& text);

}  // namespace chemprompt
