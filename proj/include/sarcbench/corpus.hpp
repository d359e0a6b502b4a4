#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sarcbench/io.hpp"
#include "sarcbench/labels.hpp"

namespace sarc {

struct LabeledSentence {
    std::string id;
    std::string text;
    Task task = Task::Sarcasm;
    Language lang = Language::English;
    TaskLabel label = TaskLabel::NonSarcastic;

    bool operator==(const LabeledSentence&) const = default;
};

json to_json(const LabeledSentence& s);
LabeledSentence sentence_from_json(const json& obj, Task task);

enum class SplitName { Train, FineTuneEnglish, FineTuneHinglish, Test };

std::string_view to_string(SplitName name);
SplitName parse_split_name(std::string_view text);

using ClassCounts = std::map<TaskLabel, std::size_t>;

ClassCounts count_labels(std::span<const LabeledSentence> records);

struct DatasetSplit {
    SplitName name = SplitName::Train;
    Task task = Task::Sarcasm;
    std::vector<LabeledSentence> records;
    ClassCounts class_counts;

    // Validates the single-task invariant and fills class_counts.
    static DatasetSplit make(SplitName name, std::vector<LabeledSentence> records);
    static DatasetSplit make(SplitName name, Task task, std::vector<LabeledSentence> records);

    std::size_t size() const { return records.size(); }
    // Label cardinality of the task, not of the labels observed.
    std::size_t num_labels() const { return labels_for(task).size(); }
};

// Loaders for the dataset JSONL schema. Errors carry the file and line number;
// unknown labels name the offending value; duplicate ids name both lines.
std::vector<LabeledSentence> load_dataset(const std::filesystem::path& path, Task task);
std::vector<LabeledSentence> load_sarcasm_headlines(const std::filesystem::path& path);
std::vector<LabeledSentence> load_sentiment_tweets(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, std::span<const LabeledSentence> records);

// Keeps min-class-count records per label, chosen uniformly under the seed;
// kept records stay in their original relative order.
std::vector<LabeledSentence> balanced_undersample(std::span<const LabeledSentence> records,
                                                  std::uint64_t seed);

struct SplitTarget {
    SplitName name;
    ClassCounts per_class;
};
using SplitPlan = std::vector<SplitTarget>;

// Train 9380/9380, FineTuneEnglish 1171/1171, Test 1172/1172.
SplitPlan default_sarcasm_plan();
// FineTuneEnglish: positive 644, negative 646, neutral 645.
SplitPlan default_sentiment_plan();

// Shuffles each class under the seed, then slices targets in plan order.
// Records inside each split keep corpus order.
std::map<SplitName, DatasetSplit> make_splits(std::span<const LabeledSentence> records,
                                              const SplitPlan& plan, std::uint64_t seed);

std::map<SplitName, DatasetSplit> make_sarcasm_splits(std::span<const LabeledSentence> records,
                                                      std::uint64_t seed,
                                                      const SplitPlan& plan = default_sarcasm_plan());

// The same ids as `split`, taken from a parallel corpus (e.g. the Hinglish translations).
DatasetSplit parallel_split(const DatasetSplit& split, SplitName name,
                            std::span<const LabeledSentence> corpus);

// Manifest JSON: {"splits": {name: [ids]}, "counts": {name: {label: n}}, "task": ...}.
json split_manifest(const std::map<SplitName, DatasetSplit>& splits);
std::map<SplitName, std::vector<std::string>> manifest_ids(const json& manifest);

struct ScriptProfile {
    std::size_t latin_tokens = 0;
    std::size_t devanagari_tokens = 0;
    std::size_t other_tokens = 0;

    std::size_t total() const { return latin_tokens + devanagari_tokens + other_tokens; }
    bool operator==(const ScriptProfile&) const = default;
};

ScriptProfile script_profile(std::string_view text);

}  // namespace sarc
