#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemprompt/alignment.hpp"
#include "chemprompt/dataset.hpp"
#include "chemprompt/mcq.hpp"

namespace chemprompt {

enum class PromptStrategy { ZeroShot, FewShot, Expert, ZeroShotCot, FewShotCot, DomainKnowledge };

inline constexpr std::array<PromptStrategy, 6> kAllStrategies{
    PromptStrategy::ZeroShot,   PromptStrategy::FewShot,    PromptStrategy::Expert,
    PromptStrategy::ZeroShotCot, PromptStrategy::FewShotCot, PromptStrategy::DomainKnowledge};

const char* to_string(PromptStrategy strategy);
PromptStrategy strategy_from(const std::string& token);  // throws std::invalid_argument

inline constexpr const char* kCotTrigger = "Let's think step by step";

// A worked example shown before the question. Plain demonstrations answer
// directly (empty chain); chain demonstrations walk through the reasoning.
struct Demonstration {
    std::string question;
    std::string chain;
    std::string answer;
};

class MissingDemonstration : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixture-backed demonstration store: one domain chain demonstration per
// task, generic per-category demonstrations, expert preambles, and the
// expert-panel personas.
class DemonstrationLibrary {
public:
    static DemonstrationLibrary from_json(const std::string& text);
    static const DemonstrationLibrary& builtin();

    const Demonstration& domain_demo(const std::string& task_key) const;  // MissingDemonstration
    const std::vector<Demonstration>& generic_demos(MaterialCategory category,
                                                    bool with_chain) const;
    const std::string& expert_preamble(MaterialCategory category) const;
    const std::vector<std::string>& personas(MaterialCategory category) const;
    std::size_t domain_demo_count() const { return domain_.size(); }

private:
    struct CategoryPack {
        std::string expert_preamble;
        std::vector<std::string> personas;
        std::vector<Demonstration> plain;
        std::vector<Demonstration> cot;
    };
    std::map<std::string, Demonstration> domain_;
    std::array<CategoryPack, 3> packs_;
    CategoryPack& pack(MaterialCategory category);
    const CategoryPack& pack(MaterialCategory category) const;
};

struct PromptBundle {
    PromptStrategy strategy = PromptStrategy::ZeroShot;
    std::vector<std::string> prompts;  // one entry, or one per panel expert
    std::string question_id;
};

// "Question: <q>\nAnswer: <chain or answer>"
std::string render_demonstration(const Demonstration& demo, bool with_chain);

PromptBundle build_prompt(PromptStrategy strategy, const Question& question,
                          const DemonstrationLibrary& library, int panel_size = 3);

// Modal capable answer; incapable entries are excluded unless every entry
// is incapable. Ties keep the earliest entry among the tied payloads.
AlignedAnswer majority_vote(const std::vector<AlignedAnswer>& answers);

}  // namespace chemprompt
