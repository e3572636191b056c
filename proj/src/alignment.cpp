#include "chemprompt/alignment.hpp"

#include <cctype>

#include "chemprompt/embedded.hpp"
#include "chemprompt/strings.hpp"

namespace chemprompt {
namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

char as_option_letter(char c) {
    if (c >= 'A' && c <= 'E') return c;
    if (c >= 'a' && c <= 'e') return static_cast<char>(c - 'a' + 'A');
    return 0;
}

// A candidate answer designation. Later text wins; at the same end position
// a longer match wins, then the more explicit pattern.
struct Designation {
    std::size_t end = 0;
    std::size_t length = 0;
    int rank = 0;  // 2 answer cue, 1 standalone letter, 0 option payload
    char letter = 0;
};

void consider(std::optional<Designation>& best, const Designation& cand) {
    if (!best || cand.end > best->end ||
        (cand.end == best->end && cand.length > best->length) ||
        (cand.end == best->end && cand.length == best->length && cand.rank > best->rank))
        best = cand;
}

void skip_spaces(const std::string& text, std::size_t& i) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
}

// "Answer: X", "answer is x", "answer = (X)".
void scan_answer_cues(const std::string& text, const std::string& lower,
                      std::optional<Designation>& best) {
    std::size_t pos = 0;
    while ((pos = lower.find("answer", pos)) != std::string::npos) {
        std::size_t start = pos;
        ++pos;
        if (start > 0 && word_char(text[start - 1])) continue;
        std::size_t i = start + 6;
        if (i < text.size() && word_char(text[i])) continue;
        skip_spaces(text, i);
        if (i < text.size() && (text[i] == ':' || text[i] == '=')) {
            ++i;
            skip_spaces(text, i);
        } else if (lower.compare(i, 2, "is") == 0 &&
                   (i + 2 == text.size() || !word_char(text[i + 2]))) {
            i += 2;
            skip_spaces(text, i);
        }
        if (i < text.size() && text[i] == '(') {
            ++i;
            skip_spaces(text, i);
        }
        if (i >= text.size()) continue;
        char letter = as_option_letter(text[i]);
        if (!letter) continue;
        if (i + 1 < text.size() && word_char(text[i + 1])) continue;
        consider(best, {i + 1, 1, 2, letter});
    }
}

// A lone uppercase option letter. Slash-joined letters ("N/A") are part of
// a token, not an answer.
void scan_standalone_letters(const std::string& text, std::optional<Designation>& best) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] < 'A' || text[i] > 'E') continue;
        if (i > 0 && (word_char(text[i - 1]) || text[i - 1] == '/')) continue;
        if (i + 1 < text.size() && (word_char(text[i + 1]) || text[i + 1] == '/')) continue;
        consider(best, {i + 1, 1, 1, text[i]});
    }
}

void scan_option_payloads(const std::string& text, const std::array<std::string, 5>& options,
                          std::optional<Designation>& best) {
    for (int idx = 0; idx < 5; ++idx) {
        const std::string& payload = options[idx];
        if (payload.empty()) continue;
        std::size_t pos = 0;
        while ((pos = text.find(payload, pos)) != std::string::npos) {
            bool ok = true;
            if (word_char(payload.front()) && pos > 0 && word_char(text[pos - 1]))
                ok = false;
            std::size_t after = pos + payload.size();
            if (word_char(payload.back()) && after < text.size() && word_char(text[after]))
                ok = false;
            if (ok) consider(best, {after, payload.size(), 0, option_letter(idx)});
            ++pos;
        }
    }
}

// Blanks every case-insensitive occurrence of the task key so an echoed
// question is never mistaken for the answer.
std::string blank_key_echoes(const std::string& text, const std::string& key) {
    if (key.empty()) return text;
    std::string out = text;
    std::string lower = to_lower(text);
    std::string lower_key = to_lower(key);
    std::size_t pos = 0;
    while ((pos = lower.find(lower_key, pos)) != std::string::npos) {
        for (std::size_t i = 0; i < lower_key.size(); ++i) out[pos + i] = ' ';
        pos += lower_key.size();
    }
    return out;
}

// Last bounded case-insensitive occurrence of any candidate; longer matches
// win at the same end position. Returns an index into candidates.
std::optional<std::size_t> last_token(const std::string& text,
                                      const std::vector<std::string>& candidates) {
    std::string lower = to_lower(text);
    std::optional<std::size_t> winner;
    std::size_t best_end = 0, best_len = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        std::string token = to_lower(candidates[c]);
        if (token.empty()) continue;
        std::size_t pos = 0;
        while ((pos = lower.find(token, pos)) != std::string::npos) {
            std::size_t after = pos + token.size();
            bool ok = !(pos > 0 && word_char(lower[pos - 1])) &&
                      !(after < lower.size() && word_char(lower[after]));
            if (ok && (after > best_end || (after == best_end && token.size() > best_len))) {
                winner = c;
                best_end = after;
                best_len = token.size();
            }
            ++pos;
        }
    }
    return winner;
}

}  // namespace

const char* to_string(IncapableReason reason) {
    switch (reason) {
        case IncapableReason::Refusal: return "refusal";
        case IncapableReason::Unparseable: return "unparseable";
        case IncapableReason::EmptyResponse: return "empty_response";
    }
    return "unparseable";
}

std::string AlignedAnswer::vote_key() const {
    if (kind == Kind::Choice) return std::string(1, letter);
    return to_lower(normalize_ws(text));
}

AlignedAnswer AlignedAnswer::choice(char letter) {
    AlignedAnswer a;
    a.kind = Kind::Choice;
    a.letter = letter;
    return a;
}

AlignedAnswer AlignedAnswer::yes_no(bool yes) {
    AlignedAnswer a;
    a.kind = Kind::YesNo;
    a.text = yes ? "Yes" : "No";
    return a;
}

AlignedAnswer AlignedAnswer::categorical(std::string label) {
    AlignedAnswer a;
    a.kind = Kind::Categorical;
    a.text = std::move(label);
    return a;
}

AlignedAnswer AlignedAnswer::free_text(std::string text) {
    AlignedAnswer a;
    a.kind = Kind::FreeText;
    a.text = std::move(text);
    return a;
}

AlignedAnswer AlignedAnswer::incapable(IncapableReason reason) {
    AlignedAnswer a;
    a.kind = Kind::Incapable;
    a.reason = reason;
    return a;
}

RefusalLexicon RefusalLexicon::from_text(const std::string& text) {
    RefusalLexicon lexicon;
    for (const std::string& line : split(text, '\n')) {
        std::string phrase = to_lower(trim(line));
        if (!phrase.empty()) lexicon.phrases_.push_back(phrase);
    }
    return lexicon;
}

const RefusalLexicon& RefusalLexicon::builtin() {
    static const RefusalLexicon lexicon = from_text(embedded::kRefusalLexiconText);
    return lexicon;
}

bool RefusalLexicon::matches(const std::string& text) const {
    std::string lower = to_lower(text);
    for (const std::string& phrase : phrases_)
        if (lower.find(phrase) != std::string::npos) return true;
    return false;
}

std::optional<char> extract_choice(const std::string& text,
                                   const std::array<std::string, 5>* options) {
    std::optional<Designation> best;
    std::string lower = to_lower(text);
    scan_answer_cues(text, lower, best);
    scan_standalone_letters(text, best);
    if (options) scan_option_payloads(text, *options, best);
    if (!best) return std::nullopt;
    return best->letter;
}

bool detect_refusal(const std::string& text, const RefusalLexicon& lexicon,
                    const std::array<std::string, 5>* options) {
    return lexicon.matches(text) && !extract_choice(text, options);
}

AlignedAnswer align(const std::string& raw, const TaskSpec& task, const Question& question,
                    const RefusalLexicon& lexicon) {
    if (trim(raw).empty()) return AlignedAnswer::incapable(IncapableReason::EmptyResponse);

    if (task.answer_kind == AnswerKind::Mcq) {
        if (auto letter = extract_choice(raw, &question.options))
            return AlignedAnswer::choice(*letter);
        if (lexicon.matches(raw)) return AlignedAnswer::incapable(IncapableReason::Refusal);
        return AlignedAnswer::incapable(IncapableReason::Unparseable);
    }

    if (task.verbal_kind == VerbalKind::YesNo || task.verbal_kind == VerbalKind::Categorical) {
        std::string body = blank_key_echoes(raw, task.key);
        const std::vector<std::string> yes_no_tokens = {"Yes", "No"};
        const std::vector<std::string>& tokens =
            task.verbal_kind == VerbalKind::YesNo ? yes_no_tokens : task.labels;
        if (auto index = last_token(body, tokens)) {
            if (task.verbal_kind == VerbalKind::YesNo)
                return AlignedAnswer::yes_no(*index == 0);
            return AlignedAnswer::categorical(task.labels[*index]);
        }
        if (lexicon.matches(raw)) return AlignedAnswer::incapable(IncapableReason::Refusal);
        return AlignedAnswer::incapable(IncapableReason::Unparseable);
    }

    if (detect_refusal(raw, lexicon))
        return AlignedAnswer::incapable(IncapableReason::Refusal);
    return AlignedAnswer::free_text(trim(raw));
}

}  // namespace chemprompt
