#include "sarcbench/experiments.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "sarcbench/errors.hpp"
#include "sarcbench/rng.hpp"

namespace sarc {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kAblationStream = 0x61626c6174;  // "ablat"

template <class F>
auto annotate(const std::string& tag, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const UsageError& e) {
        throw UsageError(tag + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(tag + ": " + e.what());
    } catch (const ServiceError& e) {
        throw ServiceError(tag + ": " + e.what());
    }
}

bool is_sentiment(StrategyId id) { return id == StrategyId::FtEnSent || id == StrategyId::FtCmSent; }

std::string sanitize(std::string_view text) {
    std::string out;
    for (char c : text) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '_' || c == '-';
        out += keep ? c : '_';
    }
    return out;
}

}  // namespace

void save_split_registry(const fs::path& dir, const SplitRegistry& splits) {
    fs::create_directories(dir);
    json index = json::object();
    for (const auto& [name, split] : splits) {
        save_dataset(dir / (name + ".jsonl"), split.records);
        json counts = json::object();
        for (const auto& [label, n] : split.class_counts) {
            counts[std::string(to_string(label))] = n;
        }
        index[name] = {{"file", name + ".jsonl"},
                       {"split", to_string(split.name)},
                       {"task", to_string(split.task)},
                       {"counts", counts}};
    }
    write_text_file(dir / "registry.json", index.dump(2) + "\n");
}

SplitRegistry load_split_registry(const fs::path& dir) {
    const auto index_path = dir / "registry.json";
    if (!fs::exists(index_path)) {
        throw DataError("no split registry at " + index_path.string() + " (run prepare-data first)");
    }
    SplitRegistry out;
    try {
        const auto index = json::parse(read_text_file(index_path));
        for (const auto& [name, entry] : index.items()) {
            const auto task = parse_task(entry.at("task").get<std::string>());
            if (!task) {
                throw DataError("registry entry '" + name + "' has an unknown task");
            }
            auto records = load_dataset(dir / entry.at("file").get<std::string>(), *task);
            out.emplace(name, DatasetSplit::make(parse_split_name(entry.at("split").get<std::string>()), *task,
                                                 std::move(records)));
        }
    } catch (const json::exception& e) {
        throw DataError("malformed split registry " + index_path.string() + ": " + e.what());
    }
    return out;
}

const DatasetSplit& require_split(const SplitRegistry& splits, const std::string& name) {
    const auto it = splits.find(name);
    if (it == splits.end()) {
        throw DataError("split '" + name + "' is not available");
    }
    return it->second;
}

std::string_view to_string(StrategyId id) {
    switch (id) {
        case StrategyId::NoFt: return "NO_FT";
        case StrategyId::FtEnSarc: return "FT_EN_SARC";
        case StrategyId::FtCmSarc: return "FT_CM_SARC";
        case StrategyId::FtEnSent: return "FT_EN_SENT";
        case StrategyId::FtCmSent: return "FT_CM_SENT";
    }
    return "?";
}

StrategyId parse_strategy_id(std::string_view text) {
    for (auto id : {StrategyId::NoFt, StrategyId::FtEnSarc, StrategyId::FtCmSarc, StrategyId::FtEnSent,
                    StrategyId::FtCmSent}) {
        if (to_string(id) == text) {
            return id;
        }
    }
    throw UsageError("unknown strategy '" + std::string(text) + "'");
}

StrategySpec StrategySpec::defaults(StrategyId id) {
    StrategySpec s;
    s.id = id;
    s.train_split = split_names::kEnSarcasmTrain;
    s.test_split = split_names::kCmSarcasmTest;
    switch (id) {
        case StrategyId::NoFt: break;
        case StrategyId::FtEnSarc: s.finetune_split = split_names::kEnSarcasmFineTune; break;
        case StrategyId::FtCmSarc: s.finetune_split = split_names::kCmSarcasmFineTune; break;
        case StrategyId::FtEnSent: s.finetune_split = split_names::kEnSentimentFineTune; break;
        case StrategyId::FtCmSent: s.finetune_split = split_names::kCmSentimentFineTune; break;
    }
    return s;
}

void StrategySpec::validate(const SplitRegistry& splits) const {
    const std::string tag(to_string(id));
    if (id == StrategyId::NoFt && finetune_split) {
        throw UsageError(tag + " must not name a fine-tune split");
    }
    if (id != StrategyId::NoFt && !finetune_split) {
        throw UsageError(tag + " needs a fine-tune split");
    }
    if (require_split(splits, train_split).task != Task::Sarcasm ||
        require_split(splits, test_split).task != Task::Sarcasm) {
        throw UsageError(tag + ": train and test splits must be sarcasm splits");
    }
    if (finetune_split) {
        const auto& ft = require_split(splits, *finetune_split);
        const Task expected = is_sentiment(id) ? Task::Sentiment : Task::Sarcasm;
        if (ft.task != expected) {
            throw UsageError(tag + ": fine-tune split '" + *finetune_split + "' has the wrong task");
        }
    }
}

json MetricsSummary::to_json() const {
    json j{{"confusion", sarc::to_json(confusion)}, {"accuracy", accuracy}, {"macro_f1", macro_f1},
           {"invalid", invalid}};
    if (auprc) {
        j["auprc"] = *auprc;
    }
    return j;
}

MetricsSummary MetricsSummary::from_json(const json& j) {
    MetricsSummary m;
    try {
        m.confusion = confusion_from_json(j.at("confusion"));
        m.accuracy = j.at("accuracy").get<double>();
        m.macro_f1 = j.at("macro_f1").get<double>();
        m.invalid = j.value("invalid", std::size_t{0});
        if (j.contains("auprc")) {
            m.auprc = j.at("auprc").get<double>();
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed metrics: ") + e.what());
    }
    return m;
}

MetricsSummary compute_metrics(const PredictionSet& preds, const DatasetSplit& golds, InvalidPolicy policy) {
    MetricsSummary m;
    m.confusion = confusion(preds, golds, policy);
    m.accuracy = accuracy(m.confusion);
    m.macro_f1 = macro_f1(m.confusion);
    bool scored = !preds.entries.empty();
    for (const auto& e : preds.entries) {
        m.invalid += e.status != PredictionStatus::Ok ? 1 : 0;
        scored = scored && e.score.has_value();
    }
    if (scored) {
        const auto sg = scored_golds(preds, golds);
        if (std::any_of(sg.begin(), sg.end(), [](const ScoredGold& s) { return s.positive; })) {
            m.auprc = pr_curve(sg).auprc;
        }
    }
    return m;
}

json ExperimentResult::to_json() const {
    json j{{"cell_id", cell_id},
           {"kind", kind},
           {"coordinates", coordinates},
           {"ok", ok},
           {"seed", seed},
           {"test_split", test_split},
           {"invalid_policy", to_string(invalid_policy)},
           {"artifacts", artifacts}};
    if (!error.empty()) {
        j["error"] = error;
    }
    if (metrics) {
        j["metrics"] = metrics->to_json();
    }
    return j;
}

void persist_cell(const fs::path& cell_dir, ExperimentResult& result) {
    fs::create_directories(cell_dir);
    if (result.predictions) {
        save_predictions(cell_dir / "predictions.json", *result.predictions);
        result.artifacts["predictions"] = (cell_dir / "predictions.json").string();
    }
    if (result.metrics) {
        write_text_file(cell_dir / "metrics.json", result.metrics->to_json().dump(2) + "\n");
        result.artifacts["metrics"] = (cell_dir / "metrics.json").string();
    }
    if (result.pr) {
        std::string csv = "threshold,recall,precision\n";
        for (const auto& p : result.pr->points) {
            csv += fmt::format("{:.9g},{:.9g},{:.9g}\n", p.threshold, p.recall, p.precision);
        }
        write_text_file(cell_dir / "pr_curve.csv", csv);
        result.artifacts["pr_curve"] = (cell_dir / "pr_curve.csv").string();
    }
    write_text_file(cell_dir / "cell.json", result.to_json().dump(2) + "\n");
}

ExperimentResult reload_cell(const fs::path& cell_dir, const SplitRegistry& splits) {
    ExperimentResult r;
    try {
        const auto cell = json::parse(read_text_file(cell_dir / "cell.json"));
        r.cell_id = cell.at("cell_id").get<std::string>();
        r.kind = cell.at("kind").get<std::string>();
        r.coordinates = cell.at("coordinates");
        r.ok = cell.at("ok").get<bool>();
        r.seed = cell.at("seed").get<std::uint64_t>();
        r.test_split = cell.at("test_split").get<std::string>();
        r.invalid_policy = parse_invalid_policy(cell.value("invalid_policy", std::string("incorrect")));
        r.error = cell.value("error", std::string());
        r.artifacts = cell.at("artifacts").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw DataError("malformed cell.json in " + cell_dir.string() + ": " + e.what());
    }
    if (!fs::exists(cell_dir / "predictions.json")) {
        return r;
    }
    r.predictions = load_predictions(cell_dir / "predictions.json");
    if (!r.ok) {
        return r;
    }
    const auto& golds = require_split(splits, r.test_split);
    r.metrics = compute_metrics(*r.predictions, golds, r.invalid_policy);
    if (r.metrics->auprc) {
        r.pr = pr_curve(scored_golds(*r.predictions, golds));
    }
    if (fs::exists(cell_dir / "metrics.json")) {
        const auto stored = json::parse(read_text_file(cell_dir / "metrics.json"));
        if (stored != r.metrics->to_json()) {
            throw DataError("metrics recomputed from " + (cell_dir / "predictions.json").string() +
                            " differ from the stored metrics.json");
        }
    }
    return r;
}

ExperimentResult run_strategy(const StrategySpec& spec, std::uint64_t seed, const StrategyContext& ctx,
                              const std::optional<DatasetSplit>& train_override, std::string cell_id) {
    const std::string tag(to_string(spec.id));
    return annotate(tag, [&] {
        if (ctx.splits == nullptr) {
            throw UsageError("no splits loaded");
        }
        spec.validate(*ctx.splits);
        ExperimentResult result;
        result.cell_id = cell_id.empty() ? tag + "-seed" + std::to_string(seed) : std::move(cell_id);
        result.kind = train_override ? "ablation" : "strategy";
        result.seed = seed;
        result.test_split = spec.test_split;
        result.invalid_policy = ctx.invalid_policy;

        const DatasetSplit& train_split = train_override ? *train_override : require_split(*ctx.splits, spec.train_split);
        const DatasetSplit& test = require_split(*ctx.splits, spec.test_split);
        result.coordinates = {{"strategy", tag},
                              {"train", spec.train_split},
                              {"train_size", train_split.size()},
                              {"finetune", spec.finetune_split ? json(*spec.finetune_split) : json(nullptr)},
                              {"test", spec.test_split}};

        ClassifierConfig cfg = ClassifierConfig::from_json(spec.train_overrides, ctx.base_config);
        cfg.seed = seed;
        cfg.num_labels = 2;
        spdlog::info("[{}] training on {} ({} records)", result.cell_id, spec.train_split, train_split.size());
        auto ckpt = train(cfg, train_split, "en-sarcasm");
        if (spec.finetune_split) {
            const auto& ft = require_split(*ctx.splits, *spec.finetune_split);
            ClassifierConfig ft_cfg = ClassifierConfig::from_json(spec.finetune_overrides, cfg);
            ft_cfg.seed = seed;
            spdlog::info("[{}] fine-tuning on {} ({} records)", result.cell_id, *spec.finetune_split, ft.size());
            auto tuned = sequential_fine_tune(ckpt, ft, ft_cfg, *spec.finetune_split);
            ckpt = is_sentiment(spec.id) ? reattach_classifier(tuned, ckpt) : std::move(tuned);
        }
        result.predictions = predict(ckpt, test.records, tag, spec.test_split);
        result.metrics = compute_metrics(*result.predictions, test, ctx.invalid_policy);
        if (result.metrics->auprc) {
            result.pr = pr_curve(scored_golds(*result.predictions, test));
        }
        result.ok = true;
        const fs::path cell_dir = ctx.runs_dir / sanitize(result.cell_id);
        if (ctx.save_checkpoints) {
            save_checkpoint(cell_dir / "checkpoint", ckpt);
            result.artifacts["checkpoint"] = (cell_dir / "checkpoint").string();
        }
        persist_cell(cell_dir, result);
        spdlog::info("[{}] accuracy {:.5f} macro-F1 {:.4f}", result.cell_id, result.metrics->accuracy,
                     result.metrics->macro_f1);
        return result;
    });
}

std::string llm_cell_id(const std::string& model, PromptMode mode, Language lang) {
    return "llm-" + sanitize(model) + "-" + std::string(to_string(mode)) + "-" + std::string(to_string(lang));
}

std::vector<ExperimentResult> run_llm_grid(const std::vector<LlmModel>& models, const std::vector<PromptMode>& modes,
                                           const std::vector<std::string>& test_splits, const LlmGridContext& ctx) {
    std::vector<ExperimentResult> out;
    if (models.empty()) {
        return out;
    }
    if (ctx.splits == nullptr || ctx.client == nullptr || ctx.cache == nullptr) {
        throw UsageError("LLM grid needs splits, a client and a cache");
    }
    for (const auto& model : models) {
        for (const auto mode : modes) {
            for (const auto& split_name : test_splits) {
                ExperimentResult r;
                r.kind = "llm";
                r.seed = ctx.seed;
                r.test_split = split_name;
                r.invalid_policy = ctx.invalid_policy;
                Language lang = Language::English;
                try {
                    const auto& test = require_split(*ctx.splits, split_name);
                    if (!test.records.empty()) {
                        lang = test.records.front().lang;
                    }
                    r.cell_id = llm_cell_id(model.id, mode, lang);
                    r.coordinates = {{"model", model.id},
                                     {"model_label", model.label.empty() ? model.id : model.label},
                                     {"mode", to_string(mode)},
                                     {"lang", to_string(lang)},
                                     {"test", split_name}};
                    const std::string body =
                        ctx.prompt_body.empty() ? std::string(PromptTemplate::default_classification_body())
                                                : ctx.prompt_body;
                    PromptTemplate tmpl = PromptTemplate::zero_shot(body);
                    if (mode == PromptMode::FewShot) {
                        const auto pool_name = ctx.fewshot_pools.find(std::string(to_string(lang)));
                        if (pool_name == ctx.fewshot_pools.end()) {
                            throw UsageError("no few-shot exemplar pool configured for language '" +
                                             std::string(to_string(lang)) + "'");
                        }
                        const auto& pool = require_split(*ctx.splits, pool_name->second);
                        tmpl = PromptTemplate::few_shot(
                            build_fewshot_exemplars(pool, ctx.fewshot_k_per_class, ctx.seed, test), body);
                    }
                    spdlog::info("[{}] classifying {} sentences", r.cell_id, test.size());
                    auto outcome = classify_dataset(*ctx.client, model.id, tmpl, test, *ctx.cache, ctx.options);
                    r.predictions = std::move(outcome.predictions);
                    r.predictions->dataset_id = split_name;
                    const fs::path cell_dir = ctx.runs_dir / r.cell_id;
                    fs::create_directories(cell_dir);
                    write_text_file(cell_dir / "run_report.json", outcome.report.to_json().dump(2) + "\n");
                    r.artifacts["run_report"] = (cell_dir / "run_report.json").string();
                    if (!test.records.empty() && outcome.report.error == test.size()) {
                        r.error = "every request failed (" + std::to_string(outcome.report.error) + " errors)";
                    } else {
                        r.metrics = compute_metrics(*r.predictions, test, ctx.invalid_policy);
                        r.ok = true;
                    }
                    persist_cell(cell_dir, r);
                } catch (const std::exception& e) {
                    if (r.cell_id.empty()) {
                        r.cell_id = "llm-" + sanitize(model.id) + "-" + std::string(to_string(mode)) + "-" +
                                    sanitize(split_name);
                        r.coordinates = {{"model", model.id},
                                         {"model_label", model.label.empty() ? model.id : model.label},
                                         {"mode", to_string(mode)},
                                         {"test", split_name}};
                    }
                    r.ok = false;
                    r.metrics.reset();
                    r.error = e.what();
                    spdlog::error("[{}] cell failed: {}", r.cell_id, r.error);
                    try {
                        persist_cell(ctx.runs_dir / r.cell_id, r);
                    } catch (const std::exception& e2) {
                        spdlog::error("[{}] could not persist failed cell: {}", r.cell_id, e2.what());
                    }
                }
                if (r.ok && r.invalid_policy == InvalidPolicy::CountIncorrect && r.metrics && r.metrics->invalid > 0) {
                    spdlog::warn("[{}] {} invalid outputs counted as incorrect", r.cell_id, r.metrics->invalid);
                }
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

json AblationPoint::to_json() const {
    return json{{"strategy", strategy}, {"train_size", train_size}, {"accuracy", accuracy}, {"macro_f1", macro_f1}};
}

std::vector<std::size_t> default_ablation_sizes() { return {1000, 2000, 5000, 10000, 15000, 18760}; }

std::vector<DatasetSplit> nested_balanced_subsets(const DatasetSplit& split, const std::vector<std::size_t>& sizes,
                                                  std::uint64_t seed) {
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw UsageError("ablation sizes must be sorted ascending");
    }
    const auto labels = labels_for(split.task);
    std::vector<std::vector<std::size_t>> members(labels.size());
    for (std::size_t i = 0; i < split.records.size(); ++i) {
        members[static_cast<std::size_t>(label_index(split.records[i].label))].push_back(i);
    }
    for (std::size_t c = 0; c < labels.size(); ++c) {
        Rng rng(mix_seed(mix_seed(seed, kAblationStream), c));
        shuffle(std::span(members[c]), rng);
    }
    std::vector<DatasetSplit> out;
    for (auto size : sizes) {
        if (size == 0 || size > split.size()) {
            throw UsageError("ablation size " + std::to_string(size) + " is outside 1.." +
                             std::to_string(split.size()));
        }
        std::vector<std::size_t> chosen;
        for (std::size_t c = 0; c < labels.size(); ++c) {
            const std::size_t want = size / labels.size() + (c < size % labels.size() ? 1 : 0);
            if (want > members[c].size()) {
                throw UsageError("ablation size " + std::to_string(size) + " needs " + std::to_string(want) + " '" +
                                 std::string(to_string(labels[c])) + "' records, only " +
                                 std::to_string(members[c].size()) + " available");
            }
            chosen.insert(chosen.end(), members[c].begin(), members[c].begin() + static_cast<std::ptrdiff_t>(want));
        }
        std::sort(chosen.begin(), chosen.end());
        std::vector<LabeledSentence> records;
        records.reserve(chosen.size());
        for (auto i : chosen) {
            records.push_back(split.records[i]);
        }
        out.push_back(DatasetSplit::make(split.name, split.task, std::move(records)));
    }
    return out;
}

std::vector<AblationPoint> run_size_ablation(const StrategySpec& spec, const std::vector<std::size_t>& sizes,
                                             std::uint64_t seed, const StrategyContext& ctx) {
    if (ctx.splits == nullptr) {
        throw UsageError("no splits loaded");
    }
    const std::string tag(to_string(spec.id));
    const auto subsets = annotate(tag, [&] {
        return nested_balanced_subsets(require_split(*ctx.splits, spec.train_split), sizes, seed);
    });
    std::vector<AblationPoint> out;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        const auto cell = "ablation-" + tag + "-n" + std::to_string(sizes[i]) + "-seed" + std::to_string(seed);
        const auto r = run_strategy(spec, seed, ctx, subsets[i], cell);
        out.push_back({sizes[i], r.metrics->accuracy, r.metrics->macro_f1, tag});
    }
    return out;
}

}  // namespace sarc
