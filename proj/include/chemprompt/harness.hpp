#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemprompt/backend.hpp"
#include "chemprompt/dataset.hpp"
#include "chemprompt/mcq.hpp"
#include "chemprompt/metrics.hpp"
#include "chemprompt/prompts.hpp"

namespace chemprompt {

// A config or data problem the operator must fix; the message names the
// offending field or file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The answering/grading backend cannot be constructed at all (missing replay
// fixture, no endpoint configured). Per-request failures degrade per question
// instead and never raise this.
class BackendUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BackendSettings {
    std::string endpoint;    // live HTTP endpoint; ignored when replay is set
    std::string model = "gpt-3.5-turbo-1106";
    double temperature = 0.0;
    std::string replay_path;  // offline fixture file; takes precedence
    std::string cache_path;   // optional response store shared across runs
    int window = 4;           // bounded in-flight request count
    int timeout_ms = 30000;
    int retries = 3;
    int backoff_ms = 1000;
};

struct RunConfig {
    std::string molecule_path;
    std::string enzyme_path;
    std::string crystal_path;
    std::vector<PromptStrategy> strategies{kAllStrategies.begin(), kAllStrategies.end()};
    int panel_size = 3;
    int run_count = 3;
    std::uint64_t run_seed = 0;
    std::string output_dir = "out";
    std::string grader_model;  // empty: use backend.model
    BackendSettings backend;
};

// Plain-text sections of "key = value" lines; '#' starts a comment. Unknown
// sections or keys raise ConfigError naming them.
RunConfig parse_run_config(const std::string& text, const std::string& source_name);
RunConfig load_run_config(const std::string& path);

// Range/consistency checks shared by every command (run_count >= 1,
// panel_size >= 1, at least one dataset, a backend source, ...).
void validate_run_config(const RunConfig& config);

// Stable 128-bit digest over every config field that affects outputs,
// recorded in the manifest so reruns can prove they used the same setup.
std::string config_hash(const RunConfig& config);

// The completion request the run loop issues for one prompt; exposed so
// fixture writers key replay entries exactly the way the harness does.
CompletionRequest answer_request(const std::string& prompt, const BackendSettings& backend);

// Suffix appended for the single automatic re-ask after an unparseable
// answer; empty for free-text tasks, which are never unparseable.
std::string format_reminder(const TaskSpec& task);

struct RunResult {
    std::string output_dir;
    int question_count = 0;    // questions per run
    int evaluation_count = 0;  // records written across strategies and runs
    int reask_count = 0;       // follow-up requests issued for unparseable answers
    int grader_failures = 0;   // free-text gradings lost to backend errors
    std::vector<EvaluationRecord> records;
};

// Full pipeline: load -> generate -> answer (with one re-ask) -> vote ->
// grade -> records/<strategy>.jsonl, reports for every dimension, manifest.
RunResult cmd_run(const RunConfig& config);

// Load and validate the configured datasets; per-category record counts.
std::map<MaterialCategory, int> cmd_ingest(const RunConfig& config);

// Build the question set and write <output_dir>/questions.jsonl.
std::vector<Question> cmd_gen(const RunConfig& config);

// Re-align and re-score records/<strategy>.jsonl from their raw texts, then
// rebuild the reports; returns the number of records regraded.
int cmd_grade(const RunConfig& config);

// Rebuild every report from the record files alone.
void cmd_report(const RunConfig& config);

}  // namespace chemprompt
