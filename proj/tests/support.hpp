#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include <unistd.h>

#include "sarcbench/corpus.hpp"
#include "sarcbench/generation.hpp"
#include "sarcbench/metrics.hpp"
#include "sarcbench/predictions.hpp"
#include "sarcbench/rng.hpp"

namespace sarc::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("sarcbench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Client driven by a callback; thread-safe call counting.
class FakeClient final : public TextGenerationClient {
public:
    using Fn = std::function<GenerationResult(const std::string& model, const std::string& prompt)>;
    explicit FakeClient(Fn fn) : fn_(std::move(fn)) {}

    GenerationResult generate(const std::string& model, const std::string& prompt) override {
        ++calls_;
        std::lock_guard lock(mutex_);
        return fn_(model, prompt);
    }
    std::size_t calls() const { return calls_.load(); }

private:
    Fn fn_;
    std::mutex mutex_;
    std::atomic<std::size_t> calls_{0};
};

inline GenerationResult ok_text(std::string text) { return {true, std::move(text), {}, 1}; }
inline GenerationResult transport_error(std::string message = "connection refused") {
    return {false, {}, std::move(message), 0};
}

inline LabeledSentence sarcasm_record(std::string id, std::string text, bool sarcastic,
                                      Language lang = Language::English) {
    return {std::move(id), std::move(text), Task::Sarcasm, lang,
            sarcastic ? TaskLabel::Sarcastic : TaskLabel::NonSarcastic};
}

// Separable toy sarcasm corpus: sarcastic texts use one cue vocabulary, the
// others a disjoint one.
inline std::vector<LabeledSentence> toy_sarcasm_corpus(std::size_t per_class, std::uint64_t seed,
                                                       Language lang = Language::English,
                                                       const std::string& id_prefix = "h") {
    static const std::vector<std::string> cues_pos{"oh great", "just perfect", "wonderful news", "totally thrilled"};
    static const std::vector<std::string> cues_neg{"council votes", "report finds", "officials say", "study shows"};
    static const std::vector<std::string> nouns{"budget", "traffic", "weather", "election", "market", "school"};
    Rng rng(seed);
    std::vector<LabeledSentence> out;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool s = i % 2 == 0;
        const auto& cues = s ? cues_pos : cues_neg;
        std::string text = cues[rng.below(cues.size())] + " " + nouns[rng.below(nouns.size())];
        if (lang == Language::Hinglish) {
            text = "यह " + text + " है";
        }
        out.push_back(sarcasm_record(id_prefix + std::to_string(i), std::move(text), s, lang));
    }
    return out;
}

inline std::vector<LabeledSentence> toy_sentiment_corpus(std::size_t per_class, const std::string& id_prefix = "t",
                                                         Language lang = Language::English) {
    static const std::vector<std::pair<TaskLabel, std::string>> classes{
        {TaskLabel::Positive, "love this happy day"},
        {TaskLabel::Negative, "hate this awful day"},
        {TaskLabel::Neutral, "the day is tuesday"}};
    std::vector<LabeledSentence> out;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (const auto& [label, text] : classes) {
            out.push_back({id_prefix + std::to_string(out.size()), text + " " + std::to_string(i), Task::Sentiment,
                           lang, label});
        }
    }
    return out;
}

// Gold split and label-only predictions realising a confusion matrix. Gold
// order interleaves the four cells so no block structure leaks into tests.
struct ConfusionFixture {
    DatasetSplit golds;
    PredictionSet preds;
};

inline ConfusionFixture confusion_fixture(const ConfusionMatrix2x2& cm, const std::string& prefix = "c") {
    struct Cell {
        std::size_t left;
        bool gold_sarcastic;
        bool pred_sarcastic;
    };
    std::vector<Cell> cells{{cm.tp, true, true}, {cm.fn, true, false}, {cm.fp, false, true}, {cm.tn, false, false}};
    std::vector<LabeledSentence> records;
    ConfusionFixture f;
    f.preds.model_id = "fixture";
    for (std::size_t i = 0; records.size() < cm.total(); ++i) {
        auto& cell = cells[i % 4];
        if (cell.left == 0) {
            continue;
        }
        --cell.left;
        const std::string id = prefix + std::to_string(records.size());
        records.push_back(sarcasm_record(id, "sentence " + id, cell.gold_sarcastic));
        f.preds.entries.push_back({id, cell.pred_sarcastic ? TaskLabel::Sarcastic : TaskLabel::NonSarcastic,
                                   std::nullopt, PredictionStatus::Ok});
    }
    f.golds = DatasetSplit::make(SplitName::Test, Task::Sarcasm, std::move(records));
    return f;
}

}  // namespace sarc::test
