#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <optional>
#include <string>
#include <vector>

#include "chemprompt/alignment.hpp"
#include "chemprompt/mcq.hpp"

using namespace chemprompt;

namespace {

const TaskSpec& task_of(const std::string& key_or_prefix) {
    const TaskSpec* task = TaskRegistry::builtin().find(key_or_prefix);
    REQUIRE(task != nullptr);
    return *task;
}

const MaterialRecord& record_of(const std::string& id) {
    static std::map<std::string, MaterialRecord> all = [] {
        std::map<std::string, MaterialRecord> out;
        for (const char* path :
             {"fixtures/records_molecule.jsonl", "fixtures/records_enzyme.jsonl",
              "fixtures/records_crystal.jsonl"}) {
            for (auto& r : load_records(path, TaskRegistry::builtin())) out[r.id] = r;
        }
        return out;
    }();
    REQUIRE(all.count(id) == 1);
    return all.at(id);
}

Question question_for(const std::string& record_id, const std::string& key_prefix,
                      std::uint64_t seed = 1) {
    return build_question(record_of(record_id), task_of(key_prefix), seed);
}

char letter_of_payload(const Question& q, const std::string& payload) {
    for (int i = 0; i < 5; ++i)
        if (q.options[i] == payload) return option_letter(i);
    REQUIRE(false);
    return 0;
}

}  // namespace

TEST_CASE("refusal lexicon loads and matches case-insensitively") {
    const RefusalLexicon& lex = RefusalLexicon::builtin();
    CHECK(lex.size() == 14);
    CHECK(lex.matches("I CANNOT answer that"));
    CHECK(lex.matches("n/a"));
    CHECK(lex.matches("I'm Unable To say"));
    CHECK(!lex.matches("the density is 2.17 g/cm3"));

    RefusalLexicon tiny = RefusalLexicon::from_text("no idea\n\n  out of scope  \n");
    CHECK(tiny.size() == 2);
    CHECK(tiny.matches("That is OUT OF SCOPE here."));
    CHECK(!tiny.matches("cannot"));
}

TEST_CASE("extract choice reads answer designations") {
    CHECK(extract_choice("The value lands in the last band, so the answer is E.") == 'E');
    CHECK(extract_choice("The answer is B. No wait, considering units, D.") == 'D');
    CHECK(extract_choice("Answer: C") == 'C');
    CHECK(extract_choice("answer: b") == 'B');
    CHECK(extract_choice("Answer = (a)") == 'A');
    CHECK(extract_choice("I pick C because the step is 15.") == 'C');
    CHECK(extract_choice("first A, then B, settling on C") == 'C');
    CHECK(extract_choice("I cannot determine this.") == std::nullopt);
    CHECK(extract_choice("Answer: F") == std::nullopt);
    CHECK(extract_choice("") == std::nullopt);
    CHECK(extract_choice("a small step, e.g. nothing standalone") == std::nullopt);
    CHECK(extract_choice("the answers are unclear") == std::nullopt);
}

TEST_CASE("extract choice matches option payloads at word boundaries") {
    std::array<std::string, 5> ladder = {"91", "141", "191", "241", "291"};
    CHECK(extract_choice("91", &ladder) == 'A');
    CHECK(extract_choice("191", &ladder) == 'C');
    CHECK(extract_choice("roughly 241 residues", &ladder) == 'D');
    CHECK(extract_choice("not 141 but 191", &ladder) == 'C');
    CHECK(extract_choice("the year 2910 is irrelevant", &ladder) == std::nullopt);
    CHECK(extract_choice("1910", &ladder) == std::nullopt);

    std::array<std::string, 5> bands = {"0.000~0.050", "0.050~0.100", "0.100~0.150",
                                        "0.150~0.200", "0.200~0.250"};
    CHECK(extract_choice("the hull energy falls in 0.000~0.050 here", &bands) == 'A');
    CHECK(extract_choice("between 0.100~0.150, say", &bands) == 'C');

    SUBCASE("an explicit letter outranks an earlier payload") {
        CHECK(extract_choice("141 seems close, but Answer: E", &ladder) == 'E');
    }
}

TEST_CASE("extract choice recovers every rendered option") {
    const auto& registry = TaskRegistry::builtin();
    for (const char* id : {"mol-acetaminophen", "mol-isopropanol", "enz-g6pd",
                           "enz-lysozyme", "mp-248", "mp-22862"}) {
        const MaterialRecord& record = record_of(id);
        for (const TaskSpec* task : registry.tasks_for(record.category)) {
            if (task->answer_kind != AnswerKind::Mcq) continue;
            for (std::uint64_t seed : {1, 17, 400}) {
                Question q = build_question(record, *task, seed);
                for (int i = 0; i < 5; ++i) {
                    CAPTURE(q.question_id);
                    CAPTURE(q.options[i]);
                    CHECK(extract_choice(q.options[i], &q.options) == option_letter(i));
                    CHECK(extract_choice(std::string("Answer: ") + option_letter(i),
                                         &q.options) == option_letter(i));
                }
            }
        }
    }
}

TEST_CASE("refusal detection requires silence") {
    const RefusalLexicon& lex = RefusalLexicon::builtin();
    CHECK(detect_refusal("I cannot determine this.", lex));
    CHECK(detect_refusal("N/A", lex));
    CHECK(detect_refusal("Sorry, I do not know.", lex));
    CHECK(!detect_refusal("Answer: C", lex));
    CHECK(!detect_refusal("I am unable to answer, but if forced: B", lex));
    CHECK(!detect_refusal("the option is D", lex));
    CHECK(!detect_refusal("totally confident text", lex));
}

TEST_CASE("mcq alignment covers every failure mode") {
    const RefusalLexicon& lex = RefusalLexicon::builtin();
    const TaskSpec& task = task_of("Space Group Number");
    Question q = question_for("mp-248", "Space Group Number");

    AlignedAnswer picked = align("Answer: B", task, q, lex);
    CHECK(picked.kind == AlignedAnswer::Kind::Choice);
    CHECK(picked.letter == 'B');
    CHECK(picked == AlignedAnswer::choice('B'));

    AlignedAnswer by_value = align("The space group is likely 162.", task, q, lex);
    CHECK(by_value.kind == AlignedAnswer::Kind::Choice);
    CHECK(by_value.letter == letter_of_payload(q, "162"));

    AlignedAnswer near_miss = align("The space group is likely 163.", task, q, lex);
    CHECK(near_miss.kind == AlignedAnswer::Kind::Incapable);
    CHECK(near_miss.reason == IncapableReason::Unparseable);

    AlignedAnswer bad_letter = align("Answer: F", task, q, lex);
    CHECK(bad_letter.kind == AlignedAnswer::Kind::Incapable);
    CHECK(bad_letter.reason == IncapableReason::Unparseable);

    AlignedAnswer refusal = align("I cannot tell from the given data.", task, q, lex);
    CHECK(refusal.kind == AlignedAnswer::Kind::Incapable);
    CHECK(refusal.reason == IncapableReason::Refusal);

    for (const char* blank : {"", "   ", "\n\t"}) {
        AlignedAnswer empty = align(blank, task, q, lex);
        CHECK(empty.kind == AlignedAnswer::Kind::Incapable);
        CHECK(empty.reason == IncapableReason::EmptyResponse);
    }
}

TEST_CASE("yes no alignment parses case-insensitively") {
    const RefusalLexicon& lex = RefusalLexicon::builtin();
    const TaskSpec& task = task_of("Stability");
    Question q = question_for("mp-22862", "Stability");

    CHECK(align("So the Stability (Yes or No) = No.", task, q, lex) ==
          AlignedAnswer::yes_no(false));
    CHECK(align("yes", task, q, lex) == AlignedAnswer::yes_no(true));
    CHECK(align("The material is stable. YES.", task, q, lex) ==
          AlignedAnswer::yes_no(true));
    CHECK(align("Likely no, the hull energy is high.", task, q, lex) ==
          AlignedAnswer::yes_no(false));

    SUBCASE("an echoed task key is not an answer") {
        AlignedAnswer echoed = align("Stability (Yes or No)? I cannot tell.", task, q, lex);
        CHECK(echoed.kind == AlignedAnswer::Kind::Incapable);
        CHECK(echoed.reason == IncapableReason::Refusal);
    }
    SUBCASE("embedded words do not count") {
        AlignedAnswer nope = align("Nope, unknowable.", task, q, lex);
        CHECK(nope.kind == AlignedAnswer::Kind::Incapable);
        CHECK(nope.reason == IncapableReason::Unparseable);
    }
}

TEST_CASE("categorical alignment returns the canonical label") {
    const RefusalLexicon& lex = RefusalLexicon::builtin();
    const TaskSpec& category = task_of("Category");
    Question cat_q = question_for("enz-lysozyme", "Category");

    AlignedAnswer hydro =
        align("The EC starts with 3, so the enzyme class is hydrolases.", category,
              cat_q, lex);
    CHECK(hydro.kind == AlignedAnswer::Kind::Categorical);
    CHECK(hydro.text == "Hydrolases");

    AlignedAnswer last_wins =
        align("Not Ligases. The Category = Transferases.", category, cat_q, lex);
    CHECK(last_wins.text == "Transferases");

    AlignedAnswer unmatched = align("some unrelated enzyme talk", category, cat_q, lex);
    CHECK(unmatched.kind == AlignedAnswer::Kind::Incapable);
    CHECK(unmatched.reason == IncapableReason::Unparseable);

    SUBCASE("label list echoed from the key is ignored") {
        const TaskSpec& ordering = task_of("Ordering");
        Question ord_q = question_for("mp-248", "Ordering");
        AlignedAnswer ferro = align(
            "Given the Ordering (Ferromagnetic/Ferrimagnetic/Antiferromagnetic/"
            "Non-magnetic) question, the moment suggests Ferromagnetic.",
            ordering, ord_q, lex);
        CHECK(ferro.kind == AlignedAnswer::Kind::Categorical);
        CHECK(ferro.text == "Ferromagnetic");

        AlignedAnswer anti =
            align("So the Ordering = Antiferromagnetic.", ordering, ord_q, lex);
        CHECK(anti.text == "Antiferromagnetic");
    }
}

TEST_CASE("free text alignment keeps the response body") {
    const RefusalLexicon& lex = RefusalLexicon::builtin();
    const TaskSpec& task = task_of("Substrate");
    Question q = question_for("enz-lysozyme", "Substrate");

    AlignedAnswer kept =
        align("  Peptidoglycan in bacterial cell walls.  ", task, q, lex);
    CHECK(kept.kind == AlignedAnswer::Kind::FreeText);
    CHECK(kept.text == "Peptidoglycan in bacterial cell walls.");

    AlignedAnswer refusal = align("I do not have access to that data.", task, q, lex);
    CHECK(refusal.kind == AlignedAnswer::Kind::Incapable);
    CHECK(refusal.reason == IncapableReason::Refusal);

    AlignedAnswer forced =
        align("I am unable to answer, but if forced: B", task, q, lex);
    CHECK(forced.kind == AlignedAnswer::Kind::FreeText);

    AlignedAnswer empty = align("\n", task, q, lex);
    CHECK(empty.reason == IncapableReason::EmptyResponse);
}

TEST_CASE("alignment is total over arbitrary noise") {
    const RefusalLexicon& lex = RefusalLexicon::builtin();
    const std::vector<std::string> noise = {
        "\x01\x02\x7f binary-ish",
        "µB/f.u. Å ℃ unicode soup µµµ",
        std::string(5000, 'x'),
        "Answer: Answer: Answer:",
        "A B C D E A B C D E",
        ")(*&^%$#@!~",
        "yes no yes no maybe",
    };
    const std::vector<std::pair<std::string, std::string>> targets = {
        {"mp-248", "Space Group Number"},
        {"mp-22862", "Stability"},
        {"enz-g6pd", "Category"},
        {"enz-lysozyme", "Substrate"},
    };
    for (const auto& [record_id, key] : targets) {
        const TaskSpec& task = task_of(key);
        Question q = question_for(record_id, key);
        for (const std::string& raw : noise) {
            AlignedAnswer out;
            CHECK_NOTHROW(out = align(raw, task, q, lex));
            if (out.kind == AlignedAnswer::Kind::Choice) {
                CHECK(out.letter >= 'A');
                CHECK(out.letter <= 'E');
            }
        }
    }
}

TEST_CASE("incapable reasons have stable names") {
    CHECK(std::string(to_string(IncapableReason::Refusal)) == "refusal");
    CHECK(std::string(to_string(IncapableReason::Unparseable)) == "unparseable");
    CHECK(std::string(to_string(IncapableReason::EmptyResponse)) == "empty_response");
}
