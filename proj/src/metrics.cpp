#include "chemprompt/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "chemprompt/strings.hpp"
#include "json.hpp"

namespace chemprompt {
namespace {

using nlohmann::json;

void require_nonempty(const std::vector<EvaluationRecord>& records) {
    if (records.empty()) throw EmptySet("metric over an empty record set");
}

// One-vs-rest tallies per letter; incapable records predict nothing and
// miss their truth letter.
struct LetterCounts {
    int tp[5] = {};
    int fp[5] = {};
    int fn[5] = {};
};

void tally(const EvaluationRecord& r, LetterCounts& counts) {
    if (!r.truth_letter)
        throw std::invalid_argument("record without a truth letter: " + r.question_id);
    int truth = *r.truth_letter - 'A';
    if (truth < 0 || truth > 4)
        throw std::invalid_argument("truth letter out of range: " + r.question_id);
    if (r.aligned.kind == AlignedAnswer::Kind::Incapable) {
        ++counts.fn[truth];
        return;
    }
    if (r.aligned.kind != AlignedAnswer::Kind::Choice)
        throw std::invalid_argument("record is neither a choice nor incapable: " +
                                    r.question_id);
    int predicted = r.aligned.letter - 'A';
    if (predicted < 0 || predicted > 4)
        throw std::invalid_argument("chosen letter out of range: " + r.question_id);
    if (predicted == truth) {
        ++counts.tp[truth];
    } else {
        ++counts.fp[predicted];
        ++counts.fn[truth];
    }
}

double macro_from(const LetterCounts& counts) {
    double sum = 0;
    for (int letter = 0; letter < 5; ++letter) {
        int tp = counts.tp[letter], fp = counts.fp[letter], fn = counts.fn[letter];
        if (tp + fp == 0 || tp + fn == 0) continue;
        double precision = static_cast<double>(tp) / (tp + fp);
        double recall = static_cast<double>(tp) / (tp + fn);
        if (precision + recall == 0) continue;
        sum += 2 * precision * recall / (precision + recall);
    }
    return sum / 5;
}

MetricBlock block_of(const std::vector<const EvaluationRecord*>& part) {
    MetricBlock block;
    block.n = static_cast<int>(part.size());
    double capable = 0, total = 0;
    LetterCounts counts;
    bool any_mcq = false;
    for (const EvaluationRecord* r : part) {
        capable += r->score.capability;
        total += r->score.accuracy;
        if (r->truth_letter) {
            any_mcq = true;
            tally(*r, counts);
        }
    }
    block.capability = capable / block.n;
    block.accuracy = total / block.n;
    if (any_mcq) block.f1 = macro_from(counts);
    if (block.capability > 0)
        block.hallucination_drop = hallucination_drop(block.capability, block.accuracy);
    return block;
}

std::string bucket_label(const MaterialRecord& material) {
    const char* indicator = "";
    int threshold = 0;
    switch (material.category) {
        case MaterialCategory::SmallMolecule:
            indicator = "molecular_weight";
            threshold = 300;
            break;
        case MaterialCategory::Enzyme:
            indicator = "reviewed_publication_count";
            threshold = 20;
            break;
        case MaterialCategory::Crystal:
            indicator = "formula_atom_count";
            threshold = 10;
            break;
    }
    auto it = material.complexity.find(indicator);
    if (it == material.complexity.end())
        throw std::invalid_argument(material.id + " lacks the " + indicator + " indicator");
    char label[64];
    std::snprintf(label, sizeof label, "%s%s%d", indicator,
                  it->second <= threshold ? "<=" : ">", threshold);
    return label;
}

std::string group_label(const EvaluationRecord& r, Dimension dimension,
                        const TaskRegistry& registry,
                        const std::map<std::string, const MaterialRecord*>& by_id) {
    switch (dimension) {
        case Dimension::Strategy: return to_string(r.strategy);
        case Dimension::TaskKey: return r.task_key;
        case Dimension::OutputType: return to_string(registry.at(r.task_key).output_type);
        case Dimension::ReasoningParadigm: return to_string(registry.at(r.task_key).reasoning);
        case Dimension::CotComplexity: return to_string(registry.at(r.task_key).cot);
        case Dimension::MaterialCategory: return to_string(registry.at(r.task_key).category);
        case Dimension::ComplexityBucket: {
            auto it = by_id.find(r.record_id);
            if (it == by_id.end())
                throw std::invalid_argument("unknown record id: " + r.record_id);
            return bucket_label(*it->second);
        }
    }
    throw std::invalid_argument("unhandled dimension");
}

std::string csv_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

json optional_json(const std::optional<double>& value) {
    return value ? json(*value) : json(nullptr);
}

json triple_json(const std::optional<MetricTriple>& triple) {
    if (!triple) return json(nullptr);
    return json{{"mean", triple->mean}, {"min", triple->min}, {"max", triple->max}};
}

void append_triple_csv(std::string& out, const std::optional<MetricTriple>& triple) {
    if (triple) {
        out += ',' + csv_value(triple->mean) + ',' + csv_value(triple->min) + ',' +
               csv_value(triple->max);
    } else {
        out += ",,,";
    }
}

MetricTriple fold(const std::vector<double>& values) {
    MetricTriple t;
    t.min = *std::min_element(values.begin(), values.end());
    t.max = *std::max_element(values.begin(), values.end());
    double sum = 0;
    for (double v : values) sum += v;
    t.mean = sum / static_cast<double>(values.size());
    return t;
}

void write_file(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write report: " + path);
}

const char* kind_token(AlignedAnswer::Kind kind) {
    switch (kind) {
        case AlignedAnswer::Kind::Choice: return "choice";
        case AlignedAnswer::Kind::YesNo: return "yes_no";
        case AlignedAnswer::Kind::Categorical: return "categorical";
        case AlignedAnswer::Kind::FreeText: return "free_text";
        case AlignedAnswer::Kind::Incapable: return "incapable";
    }
    return "?";
}

AlignedAnswer::Kind kind_from_token(const std::string& token) {
    for (AlignedAnswer::Kind kind :
         {AlignedAnswer::Kind::Choice, AlignedAnswer::Kind::YesNo,
          AlignedAnswer::Kind::Categorical, AlignedAnswer::Kind::FreeText,
          AlignedAnswer::Kind::Incapable})
        if (token == kind_token(kind)) return kind;
    throw std::invalid_argument("unknown answer kind: " + token);
}

IncapableReason reason_from_token(const std::string& token) {
    for (IncapableReason reason :
         {IncapableReason::Refusal, IncapableReason::Unparseable,
          IncapableReason::EmptyResponse})
        if (token == to_string(reason)) return reason;
    throw std::invalid_argument("unknown incapable reason: " + token);
}

}  // namespace

double capability_rate(const std::vector<EvaluationRecord>& records) {
    require_nonempty(records);
    double capable = 0;
    for (const EvaluationRecord& r : records) capable += r.score.capability;
    return capable / static_cast<double>(records.size());
}

double accuracy_mean(const std::vector<EvaluationRecord>& records) {
    require_nonempty(records);
    double total = 0;
    for (const EvaluationRecord& r : records) total += r.score.accuracy;
    return total / static_cast<double>(records.size());
}

double f1_macro(const std::vector<EvaluationRecord>& records) {
    require_nonempty(records);
    LetterCounts counts;
    for (const EvaluationRecord& r : records) tally(r, counts);
    return macro_from(counts);
}

double hallucination_drop(double capability, double accuracy) {
    if (capability <= 0)
        throw std::domain_error("hallucination drop undefined at zero capability");
    return 1.0 - accuracy / capability;
}

MetricBlock metric_block(const std::vector<EvaluationRecord>& records) {
    require_nonempty(records);
    std::vector<const EvaluationRecord*> part;
    part.reserve(records.size());
    for (const EvaluationRecord& r : records) part.push_back(&r);
    return block_of(part);
}

const char* to_string(Dimension d) {
    switch (d) {
        case Dimension::Strategy: return "strategy";
        case Dimension::TaskKey: return "task_key";
        case Dimension::OutputType: return "output_type";
        case Dimension::ReasoningParadigm: return "reasoning_paradigm";
        case Dimension::CotComplexity: return "cot_complexity";
        case Dimension::MaterialCategory: return "material_category";
        case Dimension::ComplexityBucket: return "complexity_bucket";
    }
    return "?";
}

Dimension dimension_from(const std::string& token) {
    for (Dimension d : kAllDimensions)
        if (token == to_string(d)) return d;
    throw std::invalid_argument("unknown dimension: " + token);
}

std::map<std::string, MetricBlock> aggregate(const std::vector<EvaluationRecord>& records,
                                             Dimension dimension,
                                             const TaskRegistry& registry,
                                             const std::vector<MaterialRecord>& materials) {
    require_nonempty(records);
    std::map<std::string, const MaterialRecord*> by_id;
    if (dimension == Dimension::ComplexityBucket)
        for (const MaterialRecord& m : materials) by_id[m.id] = &m;

    std::map<std::string, std::vector<const EvaluationRecord*>> parts;
    for (const EvaluationRecord& r : records)
        parts[group_label(r, dimension, registry, by_id)].push_back(&r);

    std::map<std::string, MetricBlock> out;
    for (const auto& [name, part] : parts) out[name] = block_of(part);
    return out;
}

std::map<std::string, RunSummary> summarize_runs(const std::vector<EvaluationRecord>& records,
                                                 Dimension dimension,
                                                 const TaskRegistry& registry,
                                                 const std::vector<MaterialRecord>& materials) {
    require_nonempty(records);
    std::set<int> runs;
    for (const EvaluationRecord& r : records) runs.insert(r.run_index);

    std::map<std::string, std::vector<MetricBlock>> per_group;
    for (int run : runs) {
        std::vector<EvaluationRecord> subset;
        for (const EvaluationRecord& r : records)
            if (r.run_index == run) subset.push_back(r);
        for (const auto& [name, block] : aggregate(subset, dimension, registry, materials))
            per_group[name].push_back(block);
    }

    std::map<std::string, RunSummary> out;
    for (const auto& [name, blocks] : per_group) {
        RunSummary s;
        s.runs = static_cast<int>(blocks.size());
        std::vector<double> capability, accuracy, f1, drop;
        for (const MetricBlock& b : blocks) {
            s.n_total += b.n;
            capability.push_back(b.capability);
            accuracy.push_back(b.accuracy);
            if (b.f1) f1.push_back(*b.f1);
            if (b.hallucination_drop) drop.push_back(*b.hallucination_drop);
        }
        s.capability = fold(capability);
        s.accuracy = fold(accuracy);
        if (!f1.empty()) s.f1 = fold(f1);
        if (!drop.empty()) s.hallucination_drop = fold(drop);
        out[name] = s;
    }
    return out;
}

std::string render_report(const std::map<std::string, MetricBlock>& blocks,
                          ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out = "group,n,capability,accuracy,f1,hallucination_drop\n";
        for (const auto& [name, b] : blocks) {
            out += csv_field(name) + ',' + std::to_string(b.n) + ',' +
                   csv_value(b.capability) + ',' + csv_value(b.accuracy) + ',';
            if (b.f1) out += csv_value(*b.f1);
            out += ',';
            if (b.hallucination_drop) out += csv_value(*b.hallucination_drop);
            out += '\n';
        }
        return out;
    }
    json root = json::object();
    for (const auto& [name, b] : blocks) {
        root[name] = json{{"n", b.n},
                          {"capability", b.capability},
                          {"accuracy", b.accuracy},
                          {"f1", optional_json(b.f1)},
                          {"hallucination_drop", optional_json(b.hallucination_drop)}};
    }
    return root.dump(2) + "\n";
}

std::string render_report(const std::map<std::string, RunSummary>& summaries,
                          ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out =
            "group,runs,n_total,capability_mean,capability_min,capability_max,"
            "accuracy_mean,accuracy_min,accuracy_max,f1_mean,f1_min,f1_max,"
            "hallucination_drop_mean,hallucination_drop_min,hallucination_drop_max\n";
        for (const auto& [name, s] : summaries) {
            out += csv_field(name) + ',' + std::to_string(s.runs) + ',' +
                   std::to_string(s.n_total);
            append_triple_csv(out, s.capability);
            append_triple_csv(out, s.accuracy);
            append_triple_csv(out, s.f1);
            append_triple_csv(out, s.hallucination_drop);
            out += '\n';
        }
        return out;
    }
    json root = json::object();
    for (const auto& [name, s] : summaries) {
        root[name] = json{{"runs", s.runs},
                          {"n_total", s.n_total},
                          {"capability", triple_json(s.capability)},
                          {"accuracy", triple_json(s.accuracy)},
                          {"f1", triple_json(s.f1)},
                          {"hallucination_drop", triple_json(s.hallucination_drop)}};
    }
    return root.dump(2) + "\n";
}

void emit_report(const std::map<std::string, MetricBlock>& blocks, ReportFormat format,
                 const std::string& path) {
    write_file(render_report(blocks, format), path);
}

void emit_report(const std::map<std::string, RunSummary>& summaries, ReportFormat format,
                 const std::string& path) {
    write_file(render_report(summaries, format), path);
}

std::map<std::string, MetricBlock> parse_report_json(const std::string& json_text) {
    json root = json::parse(json_text);
    std::map<std::string, MetricBlock> blocks;
    for (const auto& [name, j] : root.items()) {
        MetricBlock b;
        b.n = j.at("n").get<int>();
        b.capability = j.at("capability").get<double>();
        b.accuracy = j.at("accuracy").get<double>();
        if (!j.at("f1").is_null()) b.f1 = j.at("f1").get<double>();
        if (!j.at("hallucination_drop").is_null())
            b.hallucination_drop = j.at("hallucination_drop").get<double>();
        blocks[name] = b;
    }
    return blocks;
}

std::string serialize_evaluations_jsonl(const std::vector<EvaluationRecord>& records) {
    std::string out;
    for (const EvaluationRecord& r : records) {
        json aligned{{"kind", kind_token(r.aligned.kind)},
                     {"reason", to_string(r.aligned.reason)},
                     {"letter", r.aligned.letter
                                    ? json(std::string(1, r.aligned.letter))
                                    : json(nullptr)},
                     {"text", r.aligned.text}};
        json j{{"question_id", r.question_id},
               {"record_id", r.record_id},
               {"task_key", r.task_key},
               {"strategy", to_string(r.strategy)},
               {"run_index", r.run_index},
               {"raw_text", r.raw_text},
               {"aligned", aligned},
               {"score",
                json{{"capability", r.score.capability}, {"accuracy", r.score.accuracy}}},
               {"truth_letter", r.truth_letter ? json(std::string(1, *r.truth_letter))
                                               : json(nullptr)}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<EvaluationRecord> parse_evaluations_jsonl(const std::string& text) {
    std::vector<EvaluationRecord> out;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            EvaluationRecord r;
            r.question_id = j.at("question_id").get<std::string>();
            r.record_id = j.at("record_id").get<std::string>();
            r.task_key = j.at("task_key").get<std::string>();
            r.strategy = strategy_from(j.at("strategy").get<std::string>());
            r.run_index = j.at("run_index").get<int>();
            r.raw_text = j.at("raw_text").get<std::string>();
            const json& a = j.at("aligned");
            r.aligned.kind = kind_from_token(a.at("kind").get<std::string>());
            r.aligned.reason = reason_from_token(a.at("reason").get<std::string>());
            if (!a.at("letter").is_null()) {
                std::string letter = a.at("letter").get<std::string>();
                if (letter.size() != 1)
                    throw std::invalid_argument("letter must be one character");
                r.aligned.letter = letter[0];
            }
            r.aligned.text = a.at("text").get<std::string>();
            r.score.capability = j.at("score").at("capability").get<int>();
            r.score.accuracy = j.at("score").at("accuracy").get<double>();
            if (!j.at("truth_letter").is_null()) {
                std::string letter = j.at("truth_letter").get<std::string>();
                if (letter.size() != 1)
                    throw std::invalid_argument("truth letter must be one character");
                r.truth_letter = letter[0];
            }
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw std::runtime_error("evaluations:" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return out;
}

}  // namespace chemprompt
