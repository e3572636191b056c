#include "chemprompt/prompts.hpp"

#include <map>

#include "json.hpp"

#include "chemprompt/embedded.hpp"
#include "chemprompt/strings.hpp"

namespace chemprompt {
namespace {

using nlohmann::json;

std::size_t pack_index(MaterialCategory category) {
    switch (category) {
        case MaterialCategory::SmallMolecule: return 0;
        case MaterialCategory::Enzyme: return 1;
        case MaterialCategory::Crystal: return 2;
    }
    return 0;
}

MaterialCategory category_from_token(const std::string& token) {
    for (MaterialCategory c : {MaterialCategory::SmallMolecule, MaterialCategory::Enzyme,
                               MaterialCategory::Crystal})
        if (token == to_string(c)) return c;
    throw std::invalid_argument("unknown material category: " + token);
}

Demonstration demo_from_json(const json& j, bool with_chain) {
    Demonstration demo;
    demo.question = j.at("question").get<std::string>();
    if (with_chain) demo.chain = j.at("chain").get<std::string>();
    demo.answer = j.at("answer").get<std::string>();
    return demo;
}

}  // namespace

const char* to_string(PromptStrategy strategy) {
    switch (strategy) {
        case PromptStrategy::ZeroShot: return "zero_shot";
        case PromptStrategy::FewShot: return "few_shot";
        case PromptStrategy::Expert: return "expert";
        case PromptStrategy::ZeroShotCot: return "zero_shot_cot";
        case PromptStrategy::FewShotCot: return "few_shot_cot";
        case PromptStrategy::DomainKnowledge: return "domain_knowledge";
    }
    return "?";
}

PromptStrategy strategy_from(const std::string& token) {
    for (PromptStrategy strategy : kAllStrategies)
        if (token == to_string(strategy)) return strategy;
    throw std::invalid_argument("unknown prompt strategy: " + token);
}

DemonstrationLibrary::CategoryPack& DemonstrationLibrary::pack(MaterialCategory category) {
    return packs_[pack_index(category)];
}

const DemonstrationLibrary::CategoryPack& DemonstrationLibrary::pack(
    MaterialCategory category) const {
    return packs_[pack_index(category)];
}

DemonstrationLibrary DemonstrationLibrary::from_json(const std::string& text) {
    DemonstrationLibrary library;
    json j = json::parse(text);
    for (const auto& [token, body] : j.at("categories").items()) {
        CategoryPack& pack = library.pack(category_from_token(token));
        pack.expert_preamble = body.at("expert_preamble").get<std::string>();
        for (const auto& persona : body.at("personas"))
            pack.personas.push_back(persona.get<std::string>());
        for (const auto& demo : body.at("generic_demos"))
            pack.plain.push_back(demo_from_json(demo, false));
        for (const auto& demo : body.at("generic_cot_demos"))
            pack.cot.push_back(demo_from_json(demo, true));
    }
    for (const auto& entry : j.at("domain_demos")) {
        Demonstration demo = demo_from_json(entry, true);
        library.domain_[entry.at("task").get<std::string>()] = std::move(demo);
    }
    return library;
}

const DemonstrationLibrary& DemonstrationLibrary::builtin() {
    static const DemonstrationLibrary library = from_json(embedded::kPromptLibraryJson);
    return library;
}

const Demonstration& DemonstrationLibrary::domain_demo(const std::string& task_key) const {
    auto it = domain_.find(task_key);
    if (it == domain_.end())
        throw MissingDemonstration("no demonstration for task: " + task_key);
    return it->second;
}

const std::vector<Demonstration>& DemonstrationLibrary::generic_demos(
    MaterialCategory category, bool with_chain) const {
    return with_chain ? pack(category).cot : pack(category).plain;
}

const std::string& DemonstrationLibrary::expert_preamble(MaterialCategory category) const {
    return pack(category).expert_preamble;
}

const std::vector<std::string>& DemonstrationLibrary::personas(
    MaterialCategory category) const {
    return pack(category).personas;
}

std::string render_demonstration(const Demonstration& demo, bool with_chain) {
    return "Question: " + demo.question + "\nAnswer: " +
           (with_chain ? demo.chain : demo.answer);
}

PromptBundle build_prompt(PromptStrategy strategy, const Question& question,
                          const DemonstrationLibrary& library, int panel_size) {
    PromptBundle bundle;
    bundle.strategy = strategy;
    bundle.question_id = question.question_id;

    switch (strategy) {
        case PromptStrategy::ZeroShot:
            bundle.prompts.push_back(question.stem);
            break;
        case PromptStrategy::ZeroShotCot:
            bundle.prompts.push_back(question.stem + "\n" + kCotTrigger);
            break;
        case PromptStrategy::Expert:
            bundle.prompts.push_back(library.expert_preamble(question.category) + "\n\n" +
                                     question.stem);
            break;
        case PromptStrategy::FewShot:
        case PromptStrategy::FewShotCot: {
            bool with_chain = strategy == PromptStrategy::FewShotCot;
            std::string prompt;
            for (const Demonstration& demo :
                 library.generic_demos(question.category, with_chain))
                prompt += render_demonstration(demo, with_chain) + "\n\n";
            prompt += question.stem;
            if (with_chain) prompt += std::string("\n") + kCotTrigger;
            bundle.prompts.push_back(std::move(prompt));
            break;
        }
        case PromptStrategy::DomainKnowledge: {
            const std::string demo_block =
                render_demonstration(library.domain_demo(question.task_key), true);
            const std::vector<std::string>& personas = library.personas(question.category);
            if (panel_size < 1) panel_size = 1;
            for (int i = 0; i < panel_size; ++i)
                bundle.prompts.push_back(personas[i % personas.size()] + "\n\n" +
                                         demo_block + "\n\n" + question.stem);
            break;
        }
    }
    return bundle;
}

AlignedAnswer majority_vote(const std::vector<AlignedAnswer>& answers) {
    std::vector<std::size_t> capable;
    for (std::size_t i = 0; i < answers.size(); ++i)
        if (answers[i].capable()) capable.push_back(i);
    if (capable.empty()) return answers.front();

    std::map<std::string, int> tally;
    std::map<std::string, std::size_t> first_seen;
    for (std::size_t i : capable) {
        std::string key = answers[i].vote_key();
        if (tally.find(key) == tally.end()) first_seen[key] = i;
        ++tally[key];
    }
    std::size_t winner = capable.front();
    int winner_count = 0;
    for (std::size_t i : capable) {
        std::string key = answers[i].vote_key();
        int count = tally[key];
        std::size_t seen = first_seen[key];
        if (count > winner_count ||
            (count == winner_count && seen < first_seen[answers[winner].vote_key()])) {
            winner = seen;
            winner_count = count;
        }
    }
    return answers[winner];
}

}  // namespace chemprompt
