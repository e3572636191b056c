#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chemprompt/dataset.hpp"

namespace chemprompt {

// One fully rendered benchmark question. Multiple-choice tasks carry five
// ascending options with the truth at a seed-chosen letter; verbal tasks
// carry only the stem. Records are assumed to have passed ingestion.
struct Question {
    std::string question_id;  // "<record id>::<task key>"
    std::string record_id;
    std::string task_key;
    MaterialCategory category = MaterialCategory::SmallMolecule;
    std::string stem;  // "Question: ..." text shared by every strategy
    bool has_options = false;
    std::array<std::string, 5> options{};  // payloads exactly as shown in the stem
    int truth_index = -1;                  // 0..4 when has_options
    std::string truth_text;                // truth payload (mcq) or expected answer (verbal)
};

inline char option_letter(int index) { return static_cast<char>('A' + index); }

// "small molecule" / "enzyme" / "crystal material", as the stems phrase it.
const char* category_phrase(MaterialCategory category);

// Per-question draw-stream seed. Depends only on the run seed and the
// question identity, never on record order; fixtures pin it, never change it.
std::uint64_t question_seed(std::uint64_t run_seed, const std::string& record_id,
                            const std::string& task_key);

// "(unit: g/mol)" -> "g/mol"; "" when the tag names no unit.
std::string compact_unit(const std::string& unit_tag);

// Rendered decimal places for a step width: whole steps print whole numbers,
// fractional steps print one place past the step's own precision.
int step_decimals(double step);

Question build_question(const MaterialRecord& record, const TaskSpec& task,
                        std::uint64_t run_seed);

// All questions for all records, record order then registry task order.
std::vector<Question> build_questions(const std::vector<MaterialRecord>& records,
                                      const TaskRegistry& registry, std::uint64_t run_seed);

}  // namespace chemprompt
