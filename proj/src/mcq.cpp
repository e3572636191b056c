#include "chemprompt/mcq.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "chemprompt/hash.hpp"
#include "chemprompt/strings.hpp"

namespace chemprompt {

std::uint64_t question_seed(std::uint64_t run_seed, const std::string& record_id,
                            const std::string& task_key) {
    std::uint64_t h = fnv1a64_u64(run_seed);
    h = fnv1a64(record_id, h);
    h = fnv1a64("\x1f", h);
    return fnv1a64(task_key, h);
}

std::string compact_unit(const std::string& unit_tag) {
    std::size_t pos = unit_tag.find("unit: ");
    if (pos == std::string::npos) return "";
    pos += 6;
    std::size_t end = unit_tag.find(')', pos);
    std::string inner =
        end == std::string::npos ? unit_tag.substr(pos) : unit_tag.substr(pos, end - pos);
    return std::string(trim(inner));
}

int step_decimals(double step) {
    double scaled = step;
    for (int d = 0; d <= 6; ++d) {
        if (std::fabs(scaled - std::llround(scaled)) < 1e-6) return d == 0 ? 0 : d + 1;
        scaled *= 10.0;
    }
    return 7;
}

namespace {

// first parseable number in a fixed option; options B..E open at that bound
double first_number(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (!std::isdigit(c) && c != '-') continue;
        char* end = nullptr;
        double v = std::strtod(text.c_str() + i, &end);
        if (end != text.c_str() + i) return v;
    }
    return 0.0;
}

// boundary values belong to the option they open
int fixed_truth_index(const std::vector<std::string>& options, double truth) {
    int index = 0;
    for (int i = 1; i < 5; ++i)
        if (truth >= first_number(options[std::size_t(i)])) index = i;
    return index;
}

std::string format_scaled(long long value, long long scale, int d) {
    return format_decimals(double(value) / double(scale), d);
}

void fill_fixed(Question& q, const McqPolicy& policy, double truth) {
    std::string suffix = compact_unit(policy.unit);
    for (int i = 0; i < 5; ++i) q.options[std::size_t(i)] = policy.fixed_options[std::size_t(i)] + suffix;
    q.truth_index = fixed_truth_index(policy.fixed_options, truth);
}

void fill_single(Question& q, const McqPolicy& policy, double truth, SplitMix64& stream) {
    int d = step_decimals(policy.step);
    int t = int(stream.below(5));
    double w0 = truth - t * policy.step;
    if (policy.min_value && w0 < *policy.min_value - 1e-9) {
        int k = int(std::ceil((*policy.min_value - w0) / policy.step - 1e-9));
        w0 += k * policy.step;
        t -= k;
    }
    for (int i = 0; i < 5; ++i) q.options[std::size_t(i)] = format_decimals(w0 + i * policy.step, d);
    q.truth_index = t;
}

// interval ladders live on a whole-number grid d places fine, so the
// arithmetic is integral and boundaries are exact
void fill_interval(Question& q, const McqPolicy& policy, double truth, SplitMix64& stream) {
    int d = step_decimals(policy.step);
    long long scale = std::llround(std::pow(10.0, d));
    long long step = std::llround(policy.step * double(scale));
    long long anchor = (long long)std::floor(truth * double(scale) + 1e-6);
    int t = int(stream.below(5));
    long long delta = (long long)stream.below(std::uint64_t(step));
    if (policy.min_value) {
        long long floor_units = std::llround(*policy.min_value * double(scale));
        if (anchor - delta < floor_units) delta = anchor - floor_units;
        long long w0 = (anchor - delta) - t * step;
        if (w0 < floor_units) {
            long long k = (floor_units - w0 + step - 1) / step;
            t -= int(k);
        }
    }
    long long lo = (anchor - delta) - t * step;
    for (int i = 0; i < 5; ++i)
        q.options[std::size_t(i)] = format_scaled(lo + i * step, scale, d) + "~" +
                                    format_scaled(lo + (i + 1) * step, scale, d);
    q.truth_index = t;
}

std::string and_join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += items[i];
        if (i + 2 < items.size()) out += ", ";
        else if (i + 1 < items.size()) out += " and ";
    }
    return out;
}

std::vector<std::string> identity_items(const MaterialRecord& record) {
    std::vector<std::string> items;
    auto identifier = [&](const char* name) { return record.identifiers.at(name); };
    switch (record.category) {
        case MaterialCategory::SmallMolecule:
            if (!record.name.empty()) items.push_back("Name: " + record.name);
            items.push_back("Smiles: " + identifier("smiles"));
            break;
        case MaterialCategory::Enzyme:
            if (!record.name.empty()) items.push_back("Enzyme: " + record.name);
            items.push_back("EC (Enzyme Commission number): " + identifier("ec"));
            break;
        case MaterialCategory::Crystal:
            items.push_back("MP-id: " + identifier("mp_id"));
            items.push_back("Formula: " + identifier("formula"));
            break;
    }
    return items;
}

std::string extra_item(const std::string& key, const GroundTruthValue& value) {
    std::string item = key + ": ";
    if (value.kind == GroundTruthValue::Kind::Numeric) {
        item += format_value(value.number);
        std::string unit = compact_unit(value.unit);
        if (!unit.empty()) item += " " + unit;
    } else {
        item += value.text;
    }
    return item;
}

}  // namespace

const char* category_phrase(MaterialCategory category) {
    switch (category) {
        case MaterialCategory::SmallMolecule: return "small molecule";
        case MaterialCategory::Enzyme: return "enzyme";
        case MaterialCategory::Crystal: return "crystal material";
    }
    return "";
}

Question build_question(const MaterialRecord& record, const TaskSpec& task,
                        std::uint64_t run_seed) {
    Question q;
    q.record_id = record.id;
    q.task_key = task.key;
    q.question_id = record.id + "::" + task.key;
    q.category = record.category;

    const GroundTruthValue& truth = record.ground_truth.at(task.key);
    if (task.answer_kind == AnswerKind::Mcq) {
        q.has_options = true;
        SplitMix64 stream(question_seed(run_seed, record.id, task.key));
        const McqPolicy& policy = *task.policy;
        switch (policy.kind) {
            case McqPolicyKind::FixedOptions: fill_fixed(q, policy, truth.number); break;
            case McqPolicyKind::SingleValued: fill_single(q, policy, truth.number, stream); break;
            case McqPolicyKind::IntervalValued:
                fill_interval(q, policy, truth.number, stream);
                break;
        }
        q.truth_text = q.options[std::size_t(q.truth_index)];
    } else {
        q.truth_text = truth.text;
    }

    std::vector<std::string> items = identity_items(record);
    for (const std::string& extra : task.extra_properties)
        items.push_back(extra_item(extra, record.ground_truth.at(extra)));

    q.stem = std::string("Question: For ") + category_phrase(record.category) + ", given the " +
             and_join(items) + ", what is the " + task.key;
    if (q.has_options) {
        q.stem += " (";
        for (int i = 0; i < 5; ++i) {
            q.stem += std::string(1, option_letter(i)) + ":" + q.options[std::size_t(i)];
            if (i < 4) q.stem += ", ";
        }
        q.stem += ")";
    }
    q.stem += "?";
    return q;
}

std::vector<Question> build_questions(const std::vector<MaterialRecord>& records,
                                      const TaskRegistry& registry, std::uint64_t run_seed) {
    std::vector<Question> questions;
    for (const MaterialRecord& record : records)
        for (const TaskSpec* task : registry.tasks_for(record.category))
            questions.push_back(build_question(record, *task, run_seed));
    return questions;
}

}  // namespace chemprompt
