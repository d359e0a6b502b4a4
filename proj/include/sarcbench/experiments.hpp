#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sarcbench/classifier.hpp"
#include "sarcbench/corpus.hpp"
#include "sarcbench/generation.hpp"
#include "sarcbench/io.hpp"
#include "sarcbench/llm_eval.hpp"
#include "sarcbench/metrics.hpp"

namespace sarc {

// Named splits, e.g. "en-sarcasm-train", "cm-sarcasm-test".
using SplitRegistry = std::map<std::string, DatasetSplit>;

namespace split_names {
inline constexpr const char* kEnSarcasmTrain = "en-sarcasm-train";
inline constexpr const char* kEnSarcasmFineTune = "en-sarcasm-finetune";
inline constexpr const char* kEnSarcasmTest = "en-sarcasm-test";
inline constexpr const char* kCmSarcasmFineTune = "cm-sarcasm-finetune";
inline constexpr const char* kCmSarcasmTest = "cm-sarcasm-test";
inline constexpr const char* kEnSentimentFineTune = "en-sentiment-finetune";
inline constexpr const char* kCmSentimentFineTune = "cm-sentiment-finetune";
}  // namespace split_names

void save_split_registry(const std::filesystem::path& dir, const SplitRegistry& splits);
// Loads every <name>.jsonl listed in dir/registry.json.
SplitRegistry load_split_registry(const std::filesystem::path& dir);
const DatasetSplit& require_split(const SplitRegistry& splits, const std::string& name);

enum class StrategyId { NoFt, FtEnSarc, FtCmSarc, FtEnSent, FtCmSent };
std::string_view to_string(StrategyId id);
StrategyId parse_strategy_id(std::string_view text);

struct StrategySpec {
    StrategyId id = StrategyId::NoFt;
    std::string train_split;
    std::optional<std::string> finetune_split;
    std::string test_split;
    json train_overrides = json::object();
    json finetune_overrides = json::object();

    void validate(const SplitRegistry& splits) const;
    static StrategySpec defaults(StrategyId id);
};

struct MetricsSummary {
    ConfusionMatrix2x2 confusion;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::optional<double> auprc;
    std::size_t invalid = 0;  // Unparseable or Error entries

    json to_json() const;
    static MetricsSummary from_json(const json& j);
};

MetricsSummary compute_metrics(const PredictionSet& preds, const DatasetSplit& golds, InvalidPolicy policy);

struct ExperimentResult {
    std::string cell_id;
    std::string kind;  // "strategy", "llm" or "ablation"
    json coordinates = json::object();
    bool ok = false;
    std::string error;
    std::optional<MetricsSummary> metrics;
    std::map<std::string, std::string> artifacts;
    std::uint64_t seed = 0;
    std::string test_split;
    InvalidPolicy invalid_policy = InvalidPolicy::CountIncorrect;
    std::optional<PredictionSet> predictions;
    std::optional<PRCurve> pr;

    json to_json() const;
};

// Writes predictions.json, metrics.json and cell.json under the cell directory
// and records their paths in result.artifacts.
void persist_cell(const std::filesystem::path& cell_dir, ExperimentResult& result);

// Reloads a persisted cell and recomputes its metrics from the stored
// predictions; throws DataError if they disagree with metrics.json.
ExperimentResult reload_cell(const std::filesystem::path& cell_dir, const SplitRegistry& splits);

struct StrategyContext {
    const SplitRegistry* splits = nullptr;
    ClassifierConfig base_config;
    std::filesystem::path runs_dir;  // cells go to runs_dir/<cell id>
    bool save_checkpoints = true;
    InvalidPolicy invalid_policy = InvalidPolicy::CountIncorrect;
};

// train -> optional sequential fine-tune -> predict -> metrics, persisted.
// Sentiment strategies put the stage-1 sarcasm classifier layer back on the
// sentiment-tuned network before scoring the sarcasm test set.
ExperimentResult run_strategy(const StrategySpec& spec, std::uint64_t seed, const StrategyContext& ctx,
                              const std::optional<DatasetSplit>& train_override = std::nullopt,
                              std::string cell_id = {});

struct LlmModel {
    std::string id;
    std::string label;
};

struct LlmGridContext {
    const SplitRegistry* splits = nullptr;
    TextGenerationClient* client = nullptr;
    PredictionCache* cache = nullptr;
    std::filesystem::path runs_dir;
    ClassifyOptions options;
    InvalidPolicy invalid_policy = InvalidPolicy::CountIncorrect;
    std::string prompt_body;  // empty = default classification prompt
    std::size_t fewshot_k_per_class = 2;
    std::uint64_t seed = 42;
    // Exemplar pool per test-set language ("en", "hinglish"); both default to
    // the Hinglish fine-tune split.
    std::map<std::string, std::string> fewshot_pools{{"en", split_names::kCmSarcasmFineTune},
                                                     {"hinglish", split_names::kCmSarcasmFineTune}};
};

std::string llm_cell_id(const std::string& model, PromptMode mode, Language lang);

// One cell per (model, mode, split), in that nesting order. A cell whose every
// request failed, or that throws, is recorded with ok=false.
std::vector<ExperimentResult> run_llm_grid(const std::vector<LlmModel>& models, const std::vector<PromptMode>& modes,
                                           const std::vector<std::string>& test_splits, const LlmGridContext& ctx);

struct AblationPoint {
    std::size_t train_size = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::string strategy;

    json to_json() const;
};

std::vector<std::size_t> default_ablation_sizes();

// Class-balanced nested subsets: each class is shuffled once under the seed and
// the size-k subset takes the first k/|classes| of every class (remainder to the
// earliest classes in label order). Records keep corpus order.
std::vector<DatasetSplit> nested_balanced_subsets(const DatasetSplit& split, const std::vector<std::size_t>& sizes,
                                                  std::uint64_t seed);

std::vector<AblationPoint> run_size_ablation(const StrategySpec& spec, const std::vector<std::size_t>& sizes,
                                             std::uint64_t seed, const StrategyContext& ctx);

struct ReportInputs {
    std::vector<ExperimentResult> strategies;  // may hold several seeds per strategy
    std::vector<ExperimentResult> llm_cells;
    std::vector<AblationPoint> ablations;
    std::vector<LlmModel> models;
    std::vector<json> comparisons;  // bootstrap results to include verbatim
    const SplitRegistry* splits = nullptr;
    std::optional<json> reference_targets;
};

// Writes table4_llm.txt, table5_classifier.txt, metrics.json, pr_curves.csv/.svg,
// ablation.csv/.svg and misclassified.csv. Output bytes depend only on inputs.
std::vector<std::filesystem::path> emit_report(const ReportInputs& inputs, const std::filesystem::path& out_dir);

std::string format_fixed(double value, int decimals);

}  // namespace sarc
