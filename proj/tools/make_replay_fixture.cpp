// Regenerates the bundled offline replay fixture: scripted answers for every
// strategy over the six-record dataset, plus grader verdicts. Run from the
// repository root:
//
//   make_replay_fixture fixtures fixtures/replay/replay_full.jsonl
//
// The script is fixed so the fixture is reproducible: zero_shot picks the
// option one step from the truth on multiple-choice questions, the domain
// panel splits two right against one adjacent, and every other strategy
// answers correctly. Free-text answers match the ground truth and the grader
// awards a 5.
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "chemprompt/alignment.hpp"
#include "chemprompt/grading.hpp"
#include "chemprompt/harness.hpp"

using namespace chemprompt;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr int kPanelSize = 3;

std::string mcq_reply(const Question& question, bool adjacent, bool with_reasoning) {
    int index = question.truth_index;
    if (adjacent) index += (index == 0) ? 1 : -1;
    char letter = option_letter(index);
    std::string sentence = std::string("The answer is ") + letter + ".";
    if (with_reasoning)
        return "Working through the given values one step at a time, the closest of the listed "
               "options is " +
               std::string(1, letter) + ". " + sentence;
    return sentence;
}

std::string verbal_reply(const Question& question, const TaskSpec& task, bool wrong,
                         bool with_reasoning) {
    if (task.verbal_kind == VerbalKind::YesNo) {
        bool yes = question.truth_text == "Yes";
        if (wrong) yes = !yes;
        std::string sentence = std::string("The answer is ") + (yes ? "Yes" : "No") + ".";
        if (with_reasoning) return "Considering the criteria involved, the verdict follows. " + sentence;
        return sentence;
    }
    if (task.verbal_kind == VerbalKind::Categorical) {
        std::string label = question.truth_text;
        if (wrong) {
            for (const std::string& candidate : task.labels) {
                if (candidate != question.truth_text) {
                    label = candidate;
                    break;
                }
            }
        }
        if (with_reasoning) return "Given the classification rules, the answer is " + label + ".";
        return label;
    }
    if (wrong) return "A different compound entirely.";
    return question.truth_text;
}

std::string scripted_reply(const Question& question, const TaskSpec& task, bool off_target,
                           bool with_reasoning) {
    if (task.answer_kind == AnswerKind::Mcq)
        return mcq_reply(question, off_target, with_reasoning);
    return verbal_reply(question, task, off_target, with_reasoning);
}

struct FixtureWriter {
    std::string text;
    std::set<std::string> seen;

    void add(const CompletionRequest& request, const std::string& reply) {
        std::string key = request.request_key();
        if (!seen.insert(key).second) return;
        text += encode_replay_entry(key, reply, FinishReason::Stop);
    }
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <fixtures_dir> <output_file>\n", argv[0]);
        return 1;
    }
    const std::string fixtures_dir = argv[1];
    const std::string output_path = argv[2];

    RunConfig config;
    config.molecule_path = fixtures_dir + "/records_molecule.jsonl";
    config.enzyme_path = fixtures_dir + "/records_enzyme.jsonl";
    config.crystal_path = fixtures_dir + "/records_crystal.jsonl";
    config.run_seed = kSeed;
    config.panel_size = kPanelSize;

    const TaskRegistry& registry = TaskRegistry::builtin();
    const DemonstrationLibrary& library = DemonstrationLibrary::builtin();
    const RefusalLexicon& lexicon = RefusalLexicon::builtin();
    std::vector<MaterialRecord> materials;
    for (const std::string& path :
         {config.molecule_path, config.enzyme_path, config.crystal_path})
        for (MaterialRecord& record : load_records(path, registry))
            materials.push_back(std::move(record));
    std::vector<Question> questions = build_questions(materials, registry, config.run_seed);

    FixtureWriter fixture;
    for (const Question& question : questions) {
        const TaskSpec& task = registry.at(question.task_key);
        for (PromptStrategy strategy : kAllStrategies) {
            PromptBundle bundle = build_prompt(strategy, question, library, config.panel_size);
            bool with_reasoning = strategy == PromptStrategy::ZeroShotCot ||
                                  strategy == PromptStrategy::FewShotCot;
            for (std::size_t expert = 0; expert < bundle.prompts.size(); ++expert) {
                bool off_target =
                    strategy == PromptStrategy::ZeroShot
                        ? task.answer_kind == AnswerKind::Mcq
                        : bundle.prompts.size() > 1 && expert + 1 == bundle.prompts.size();
                fixture.add(answer_request(bundle.prompts[expert], config.backend),
                            scripted_reply(question, task, off_target, with_reasoning));
            }
        }
        if (task.answer_kind == AnswerKind::Verbal && task.verbal_kind == VerbalKind::FreeText) {
            AlignedAnswer aligned =
                align(scripted_reply(question, task, false, false), task, question, lexicon);
            CompletionRequest request;
            request.model = config.backend.model;
            request.messages = {{"user", render_grading_prompt(aligned.text, question.truth_text,
                                                               task)}};
            request.temperature = 0.0;
            fixture.add(request, "5");
        }
    }

    std::ofstream out(output_path, std::ios::binary);
    if (!out.good()) {
        std::fprintf(stderr, "cannot write %s\n", output_path.c_str());
        return 1;
    }
    out << fixture.text;
    out.flush();
    if (!out.good()) {
        std::fprintf(stderr, "cannot write %s\n", output_path.c_str());
        return 1;
    }
    std::printf("questions: %zu\n", questions.size());
    std::printf("entries: %zu\n", fixture.seen.size());
    std::printf("wrote %s\n", output_path.c_str());
    return 0;
}
