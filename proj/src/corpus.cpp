#include "sarcbench/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "sarcbench/errors.hpp"
#include "sarcbench/rng.hpp"
#include "sarcbench/utf8.hpp"

namespace sarc {

json to_json(const LabeledSentence& s) {
    return json{{"id", s.id}, {"text", s.text}, {"label", to_string(s.label)}, {"lang", to_string(s.lang)}};
}

LabeledSentence sentence_from_json(const json& obj, Task task) {
    const auto field = [&](const char* key) -> std::string {
        const auto it = obj.find(key);
        if (it == obj.end() || !it->is_string()) {
            throw DataError(std::string("missing or non-string field '") + key + "'");
        }
        return it->get<std::string>();
    };
    LabeledSentence s;
    s.id = field("id");
    s.text = field("text");
    s.task = task;
    const std::string label = field("label");
    const auto parsed = parse_task_label(label);
    if (!parsed) {
        throw DataError("unknown label '" + label + "'");
    }
    if (task_of(*parsed) != task) {
        throw DataError("label '" + label + "' does not belong to the " + std::string(to_string(task)) + " task");
    }
    s.label = *parsed;
    const std::string lang = field("lang");
    const auto parsed_lang = parse_language(lang);
    if (!parsed_lang) {
        throw DataError("unknown lang '" + lang + "'");
    }
    s.lang = *parsed_lang;
    if (s.id.empty()) {
        throw DataError("empty id");
    }
    if (utf8::trim(s.text).empty()) {
        throw DataError("empty text for id '" + s.id + "'");
    }
    return s;
}

std::string_view to_string(SplitName name) {
    switch (name) {
    case SplitName::Train: return "Train";
    case SplitName::FineTuneEnglish: return "FineTuneEnglish";
    case SplitName::FineTuneHinglish: return "FineTuneHinglish";
    case SplitName::Test: return "Test";
    }
    throw std::logic_error("bad SplitName");
}

SplitName parse_split_name(std::string_view text) {
    for (auto name : {SplitName::Train, SplitName::FineTuneEnglish, SplitName::FineTuneHinglish,
                      SplitName::Test}) {
        if (text == to_string(name)) {
            return name;
        }
    }
    throw UsageError("unknown split name '" + std::string(text) + "'");
}

ClassCounts count_labels(std::span<const LabeledSentence> records) {
    ClassCounts counts;
    for (const auto& r : records) {
        ++counts[r.label];
    }
    return counts;
}

DatasetSplit DatasetSplit::make(SplitName name, std::vector<LabeledSentence> records) {
    if (records.empty()) {
        throw DataError("cannot infer the task of an empty split; pass it explicitly");
    }
    const Task task = records.front().task;
    return make(name, task, std::move(records));
}

DatasetSplit DatasetSplit::make(SplitName name, Task task, std::vector<LabeledSentence> records) {
    for (const auto& r : records) {
        if (r.task != task) {
            throw DataError("split " + std::string(to_string(name)) + " mixes tasks (record '" + r.id + "')");
        }
    }
    DatasetSplit split;
    split.name = name;
    split.task = task;
    split.class_counts = count_labels(records);
    split.records = std::move(records);
    return split;
}

std::vector<LabeledSentence> load_dataset(const std::filesystem::path& path, Task task) {
    std::vector<LabeledSentence> out;
    std::unordered_map<std::string, std::size_t> seen;
    for_each_jsonl(path, [&](std::size_t line, const json& obj) {
        LabeledSentence s;
        try {
            s = sentence_from_json(obj, task);
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
        const auto [it, inserted] = seen.emplace(s.id, line);
        if (!inserted) {
            throw DataError(path.string() + ": duplicate id '" + s.id + "' on lines " +
                            std::to_string(it->second) + " and " + std::to_string(line));
        }
        out.push_back(std::move(s));
    });
    return out;
}

std::vector<LabeledSentence> load_sarcasm_headlines(const std::filesystem::path& path) {
    return load_dataset(path, Task::Sarcasm);
}

std::vector<LabeledSentence> load_sentiment_tweets(const std::filesystem::path& path) {
    return load_dataset(path, Task::Sentiment);
}

void save_dataset(const std::filesystem::path& path, std::span<const LabeledSentence> records) {
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        rows.push_back(to_json(r));
    }
    write_text_file(path, to_jsonl(rows));
}

namespace {

std::map<TaskLabel, std::vector<std::size_t>> indices_by_label(std::span<const LabeledSentence> records) {
    std::map<TaskLabel, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < records.size(); ++i) {
        by_label[records[i].label].push_back(i);
    }
    return by_label;
}

// One independent stream per label so adding a label never reshuffles another.
std::uint64_t label_stream(std::uint64_t seed, TaskLabel label) {
    return mix_seed(seed, static_cast<std::uint64_t>(label));
}

}  // namespace

std::vector<LabeledSentence> balanced_undersample(std::span<const LabeledSentence> records,
                                                  std::uint64_t seed) {
    if (records.empty()) {
        throw DataError("balanced_undersample: empty input");
    }
    auto by_label = indices_by_label(records);
    if (by_label.size() < 2) {
        throw DataError("balanced_undersample: only one class present, balancing is undefined");
    }
    std::size_t min_count = records.size();
    for (const auto& [label, idx] : by_label) {
        min_count = std::min(min_count, idx.size());
    }
    std::vector<std::size_t> kept;
    for (auto& [label, idx] : by_label) {
        Rng rng(label_stream(seed, label));
        shuffle(std::span(idx), rng);
        kept.insert(kept.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(min_count));
    }
    std::sort(kept.begin(), kept.end());
    std::vector<LabeledSentence> out;
    out.reserve(kept.size());
    for (auto i : kept) {
        out.push_back(records[i]);
    }
    return out;
}

SplitPlan default_sarcasm_plan() {
    return {
        {SplitName::Train, {{TaskLabel::Sarcastic, 9380}, {TaskLabel::NonSarcastic, 9380}}},
        {SplitName::FineTuneEnglish, {{TaskLabel::Sarcastic, 1171}, {TaskLabel::NonSarcastic, 1171}}},
        {SplitName::Test, {{TaskLabel::Sarcastic, 1172}, {TaskLabel::NonSarcastic, 1172}}},
    };
}

SplitPlan default_sentiment_plan() {
    return {
        {SplitName::FineTuneEnglish,
         {{TaskLabel::Positive, 644}, {TaskLabel::Negative, 646}, {TaskLabel::Neutral, 645}}},
    };
}

std::map<SplitName, DatasetSplit> make_splits(std::span<const LabeledSentence> records,
                                              const SplitPlan& plan, std::uint64_t seed) {
    if (plan.empty()) {
        throw UsageError("make_splits: empty split plan");
    }
    std::set<SplitName> names;
    for (const auto& target : plan) {
        if (!names.insert(target.name).second) {
            throw UsageError("make_splits: split " + std::string(to_string(target.name)) + " listed twice");
        }
    }
    std::set<std::string> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.id).second) {
            throw DataError("make_splits: duplicate id '" + r.id + "'");
        }
    }
    const Task task = records.empty() ? task_of(plan.front().per_class.begin()->first) : records.front().task;

    auto by_label = indices_by_label(records);
    ClassCounts required;
    for (const auto& target : plan) {
        for (const auto& [label, n] : target.per_class) {
            if (task_of(label) != task) {
                throw UsageError("make_splits: plan label '" + std::string(to_string(label)) +
                                 "' does not match the corpus task");
            }
            required[label] += n;
        }
    }
    std::string shortfall;
    for (const auto& [label, need] : required) {
        const std::size_t have = by_label.count(label) ? by_label[label].size() : 0;
        if (have < need) {
            shortfall += " " + std::string(to_string(label)) + ": need " + std::to_string(need) + ", have " +
                         std::to_string(have) + " (short " + std::to_string(need - have) + ");";
        }
    }
    if (!shortfall.empty()) {
        throw DataError("insufficient records for requested split counts:" + shortfall);
    }

    std::map<SplitName, std::vector<std::size_t>> chosen;
    for (auto& [label, idx] : by_label) {
        Rng rng(label_stream(seed, label));
        shuffle(std::span(idx), rng);
        std::size_t cursor = 0;
        for (const auto& target : plan) {
            const auto it = target.per_class.find(label);
            const std::size_t n = it == target.per_class.end() ? 0 : it->second;
            auto& dst = chosen[target.name];
            dst.insert(dst.end(), idx.begin() + static_cast<std::ptrdiff_t>(cursor),
                       idx.begin() + static_cast<std::ptrdiff_t>(cursor + n));
            cursor += n;
        }
    }

    std::map<SplitName, DatasetSplit> out;
    for (const auto& target : plan) {
        auto& idx = chosen[target.name];
        std::sort(idx.begin(), idx.end());
        std::vector<LabeledSentence> recs;
        recs.reserve(idx.size());
        for (auto i : idx) {
            recs.push_back(records[i]);
        }
        out.emplace(target.name, DatasetSplit::make(target.name, task, std::move(recs)));
    }
    return out;
}

std::map<SplitName, DatasetSplit> make_sarcasm_splits(std::span<const LabeledSentence> records,
                                                      std::uint64_t seed, const SplitPlan& plan) {
    for (const auto& r : records) {
        if (r.task != Task::Sarcasm) {
            throw DataError("make_sarcasm_splits: record '" + r.id + "' is not a sarcasm record");
        }
    }
    return make_splits(records, plan, seed);
}

DatasetSplit parallel_split(const DatasetSplit& split, SplitName name,
                            std::span<const LabeledSentence> corpus) {
    std::unordered_map<std::string_view, const LabeledSentence*> by_id;
    for (const auto& r : corpus) {
        by_id.emplace(r.id, &r);
    }
    std::vector<LabeledSentence> recs;
    std::vector<std::string> missing;
    recs.reserve(split.records.size());
    for (const auto& r : split.records) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end()) {
            missing.push_back(r.id);
            continue;
        }
        if (it->second->label != r.label) {
            throw DataError("parallel corpus disagrees on the label of '" + r.id + "'");
        }
        recs.push_back(*it->second);
    }
    if (!missing.empty()) {
        std::string msg = "parallel corpus lacks " + std::to_string(missing.size()) + " id(s):";
        for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) {
            msg += " " + missing[i];
        }
        throw DataError(msg);
    }
    return DatasetSplit::make(name, split.task, std::move(recs));
}

json split_manifest(const std::map<SplitName, DatasetSplit>& splits) {
    json manifest;
    json ids = json::object();
    json counts = json::object();
    for (const auto& [name, split] : splits) {
        json list = json::array();
        for (const auto& r : split.records) {
            list.push_back(r.id);
        }
        ids[std::string(to_string(name))] = std::move(list);
        json c = json::object();
        for (const auto& [label, n] : split.class_counts) {
            c[std::string(to_string(label))] = n;
        }
        counts[std::string(to_string(name))] = std::move(c);
        manifest["task"] = to_string(split.task);
    }
    manifest["splits"] = std::move(ids);
    manifest["counts"] = std::move(counts);
    return manifest;
}

std::map<SplitName, std::vector<std::string>> manifest_ids(const json& manifest) {
    std::map<SplitName, std::vector<std::string>> out;
    if (!manifest.contains("splits") || !manifest["splits"].is_object()) {
        throw DataError("split manifest lacks a 'splits' object");
    }
    for (const auto& [key, list] : manifest["splits"].items()) {
        out[parse_split_name(key)] = list.get<std::vector<std::string>>();
    }
    return out;
}

ScriptProfile script_profile(std::string_view text) {
    ScriptProfile profile;
    const std::u32string cps = utf8::decode(text);
    bool in_token = false;
    bool has_devanagari = false;
    bool has_latin = false;
    const auto flush = [&] {
        if (!in_token) {
            return;
        }
        if (has_devanagari) {
            ++profile.devanagari_tokens;
        } else if (has_latin) {
            ++profile.latin_tokens;
        } else {
            ++profile.other_tokens;
        }
        in_token = has_devanagari = has_latin = false;
    };
    for (char32_t cp : cps) {
        if (utf8::is_whitespace(cp)) {
            flush();
            continue;
        }
        in_token = true;
        has_devanagari = has_devanagari || utf8::is_devanagari(cp);
        has_latin = has_latin || (cp < 0x80 && ((cp | 0x20) >= U'a' && (cp | 0x20) <= U'z'));
    }
    flush();
    return profile;
}

}  // namespace sarc
