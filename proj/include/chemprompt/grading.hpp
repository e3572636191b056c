#pragma once

#include <stdexcept>
#include <string>

#include "chemprompt/alignment.hpp"
#include "chemprompt/backend.hpp"
#include "chemprompt/dataset.hpp"
#include "chemprompt/mcq.hpp"

namespace chemprompt {

struct Score {
    int capability = 0;   // 1 iff the answer counted as effective
    double accuracy = 0;  // always 0 when capability is 0

    bool operator==(const Score&) const = default;
};

class GraderUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Full credit on a hit, partial credit one option away, nothing further out.
double grade_mcq(char chosen, char truth);

struct VerbalGrade {
    int grade = 0;             // raw rubric grade 0..5
    double accuracy = 0;       // grade / 5
    bool audit_flagged = false;  // grader text unparseable twice; scored 0
    std::string grader_text;   // last raw grader response, for the audit log
};

// Rubric examples followed by a same-shaped open entry for this answer;
// the grader completes the bracket with its integer.
std::string render_grading_prompt(const std::string& answer, const std::string& truth,
                                  const TaskSpec& task);
std::string render_grading_prompt(const std::string& answer, const std::string& truth,
                                  const TaskSpec& task, const std::string& rubric);

// One grading conversation, temperature 0, independent of the answering
// run. An unhelpful grader reply earns one format-reminder re-ask, then a
// conservative 0 with the audit flag set.
VerbalGrade grade_verbal(const std::string& answer, const std::string& truth,
                         const TaskSpec& task, Backend& backend, const std::string& model);

// Total scoring entry point. The backend is consulted only for free-text
// grading; audit (when given) receives the grader interaction for those.
Score score_question(const AlignedAnswer& aligned, const TaskSpec& task,
                     const Question& question, Backend& backend, const std::string& model,
                     VerbalGrade* audit = nullptr);

}  // namespace chemprompt
