#include "chemprompt/grading.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "chemprompt/embedded.hpp"

namespace chemprompt {
namespace {

// Last bounded integer token whose value is a legal rubric grade. The
// grader is asked for the integer alone, so the final number in the reply
// is the grade even when wrapped in prose or the rubric's bracket.
std::optional<int> parse_grade(const std::string& text) {
    std::optional<int> result;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        bool bounded =
            (start == 0 || !std::isalnum(static_cast<unsigned char>(text[start - 1]))) &&
            (i == text.size() || !std::isalnum(static_cast<unsigned char>(text[i])));
        if (!bounded) continue;
        long value = std::strtol(text.substr(start, i - start).c_str(), nullptr, 10);
        if (value >= 0 && value <= 5) result = static_cast<int>(value);
    }
    return result;
}

CompletionRequest grading_request(const std::string& prompt, const std::string& model) {
    CompletionRequest request;
    request.model = model;
    request.messages = {{"user", prompt}};
    request.temperature = 0.0;
    request.max_tokens = 16;
    return request;
}

}  // namespace

double grade_mcq(char chosen, char truth) {
    int gap = std::abs(chosen - truth);
    if (gap == 0) return 1.0;
    if (gap == 1) return 0.4;
    return 0.0;
}

std::string render_grading_prompt(const std::string& answer, const std::string& truth,
                                  const TaskSpec& task) {
    return render_grading_prompt(answer, truth, task, embedded::kGradingRubricText);
}

std::string render_grading_prompt(const std::string& answer, const std::string& truth,
                                  const TaskSpec& task, const std::string& rubric) {
    return rubric + "\n\n[For " + category_phrase(task.category) + " " + task.key +
           ", one person gave an answer " + answer + ". The ground truth is " + truth +
           ". LLM:";
}

VerbalGrade grade_verbal(const std::string& answer, const std::string& truth,
                         const TaskSpec& task, Backend& backend, const std::string& model) {
    const std::string prompt = render_grading_prompt(answer, truth, task);
    VerbalGrade out;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string ask =
            attempt == 0 ? prompt
                         : prompt + "\nRespond with a single integer between 0 and 5.";
        CompletionResponse response;
        try {
            response = backend.complete(grading_request(ask, model));
        } catch (const BackendError& e) {
            throw GraderUnavailable(std::string("grader backend failed: ") + e.what());
        }
        if (response.finish_reason == FinishReason::Error)
            throw GraderUnavailable("grader returned an error response");
        out.grader_text = response.text;
        if (auto grade = parse_grade(response.text)) {
            out.grade = *grade;
            out.accuracy = *grade / 5.0;
            return out;
        }
    }
    out.grade = 0;
    out.accuracy = 0;
    out.audit_flagged = true;
    return out;
}

Score score_question(const AlignedAnswer& aligned, const TaskSpec& task,
                     const Question& question, Backend& backend, const std::string& model,
                     VerbalGrade* audit) {
    if (!aligned.capable()) return Score{0, 0.0};

    if (task.answer_kind == AnswerKind::Mcq)
        return Score{1, grade_mcq(aligned.letter, option_letter(question.truth_index))};

    if (task.verbal_kind == VerbalKind::YesNo || task.verbal_kind == VerbalKind::Categorical)
        return Score{1, aligned.text == question.truth_text ? 1.0 : 0.0};

    VerbalGrade grade = grade_verbal(aligned.text, question.truth_text, task, backend, model);
    if (audit) *audit = grade;
    return Score{1, grade.accuracy};
}

}  // namespace chemprompt
