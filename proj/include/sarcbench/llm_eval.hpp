#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sarcbench/corpus.hpp"
#include "sarcbench/generation.hpp"
#include "sarcbench/predictions.hpp"

namespace sarc {

inline constexpr std::string_view kSentencePlaceholder = "{sentence}";

enum class PromptMode { ZeroShot, FewShot };

std::string_view to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view text);

struct Exemplar {
    std::string text;
    TaskLabel label = TaskLabel::NonSarcastic;

    bool operator==(const Exemplar&) const = default;
};

struct PromptTemplate {
    PromptMode mode = PromptMode::ZeroShot;
    std::string body;
    std::vector<Exemplar> exemplars;

    // Exactly one placeholder; few-shot needs a non-empty, class-balanced exemplar list.
    void validate() const;

    static PromptTemplate zero_shot(std::string body = std::string(default_classification_body()));
    static PromptTemplate few_shot(std::vector<Exemplar> exemplars,
                                   std::string body = std::string(default_classification_body()));

    static std::string_view default_classification_body();
};

// Single-pass substitution; a sentence that itself contains the placeholder is
// inserted literally. Few-shot exemplars become "Example: <text> → <label>"
// lines placed just before the line holding the placeholder.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view sentence);

enum class ParsedLabel { Sarcastic, NonSarcastic, Unparseable };

std::string_view to_string(ParsedLabel label);

// Total: never throws. Non-sarcastic spellings are matched before the bare word.
ParsedLabel parse_label(std::string_view raw);

struct RawLLMResponse {
    std::string model_id;
    std::string sentence_id;
    std::string prompt_sha256;
    std::string text;
    std::int64_t latency_ms = 0;
};

// Append-only JSONL cache keyed by (model_id, rendered-prompt hash, sentence_id).
// Later lines override earlier ones on load. Writes are serialized.
class PredictionCache {
public:
    PredictionCache() = default;  // in-memory only
    explicit PredictionCache(std::filesystem::path path);

    std::optional<RawLLMResponse> lookup(const std::string& model_id, const std::string& prompt_sha256,
                                         const std::string& sentence_id) const;
    void store(const RawLLMResponse& response);
    std::size_t size() const;

private:
    using Key = std::tuple<std::string, std::string, std::string>;
    std::filesystem::path path_;
    std::map<Key, RawLLMResponse> entries_;
    mutable std::mutex mutex_;
};

struct ClassifyOptions {
    int max_transport_retries = 2;
    int max_unparseable_retries = 2;
    int parallelism = 1;  // in-flight requests; output order always follows the split
};

struct ClassifyReport {
    std::size_t ok = 0;
    std::size_t unparseable = 0;
    std::size_t error = 0;
    std::size_t client_calls = 0;
    std::size_t cache_hits = 0;
    std::vector<std::string> error_ids;

    json to_json() const;
};

struct ClassifyOutcome {
    PredictionSet predictions;
    ClassifyReport report;
};

// One request per sentence. Predictions carry labels only (no scores).
ClassifyOutcome classify_dataset(TextGenerationClient& client, const std::string& model_id,
                                 const PromptTemplate& tmpl, const DatasetSplit& split,
                                 PredictionCache& cache, const ClassifyOptions& options = {});

// Balanced sample of k_per_class per sarcasm label, alternating Sarcastic /
// Non-Sarcastic. The pool must share no id with `test`.
std::vector<Exemplar> build_fewshot_exemplars(const DatasetSplit& pool, std::size_t k_per_class,
                                              std::uint64_t seed, const DatasetSplit& test);

}  // namespace sarc
