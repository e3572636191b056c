#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chemprompt/dataset.hpp"
#include "chemprompt/mcq.hpp"

namespace chemprompt {

enum class IncapableReason { Refusal, Unparseable, EmptyResponse };
const char* to_string(IncapableReason reason);

// A model response after alignment: either a structured answer or a
// reason the response yields none. Total over arbitrary text.
struct AlignedAnswer {
    enum class Kind { Choice, YesNo, Categorical, FreeText, Incapable };

    Kind kind = Kind::Incapable;
    IncapableReason reason = IncapableReason::EmptyResponse;
    char letter = 0;   // Choice only, 'A'..'E'
    std::string text;  // YesNo "Yes"/"No", category label, or free text

    bool capable() const { return kind != Kind::Incapable; }

    // canonical payload for vote equality: letter, or case-folded
    // whitespace-collapsed text
    std::string vote_key() const;

    static AlignedAnswer choice(char letter);
    static AlignedAnswer yes_no(bool yes);
    static AlignedAnswer categorical(std::string label);
    static AlignedAnswer free_text(std::string text);
    static AlignedAnswer incapable(IncapableReason reason);

    bool operator==(const AlignedAnswer&) const = default;
};

// Phrase list for refusal detection, one lowercase phrase per line.
class RefusalLexicon {
public:
    static RefusalLexicon from_text(const std::string& text);
    static const RefusalLexicon& builtin();
    bool matches(const std::string& text) const;
    std::size_t size() const { return phrases_.size(); }

private:
    std::vector<std::string> phrases_;
};

// Last unambiguous answer designation in the text, if any: a terminal
// "Answer: X", a standalone letter, or an option payload match.
std::optional<char> extract_choice(const std::string& text,
                                   const std::array<std::string, 5>* options = nullptr);

// True iff the text matches the refusal lexicon and designates no answer.
bool detect_refusal(const std::string& text, const RefusalLexicon& lexicon,
                    const std::array<std::string, 5>* options = nullptr);

AlignedAnswer align(const std::string& raw, const TaskSpec& task, const Question& question,
                    const RefusalLexicon& lexicon);

}  // namespace chemprompt
