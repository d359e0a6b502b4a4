#include "sarcbench/app.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "sarcbench/classifier.hpp"
#include "sarcbench/config.hpp"
#include "sarcbench/corpus.hpp"
#include "sarcbench/errors.hpp"
#include "sarcbench/experiments.hpp"
#include "sarcbench/generation.hpp"
#include "sarcbench/llm_eval.hpp"
#include "sarcbench/metrics.hpp"
#include "sarcbench/rng.hpp"
#include "sarcbench/synthgen.hpp"

namespace sarc {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string log_level = "info";
    int threads = 0;
};

struct Runtime {
    json cfg;
    std::uint64_t seed = 0;
    fs::path runs_root;
};

void setup_logging(const std::string& level) {
    static const auto logger = [] {
        auto l = spdlog::stderr_color_mt("sarcbench");
        spdlog::set_default_logger(l);
        return l;
    }();
    const auto lvl = spdlog::level::from_str(level);
    if (lvl == spdlog::level::off && level != "off") {
        throw UsageError("unknown log level '" + level + "'");
    }
    logger->set_level(lvl);
}

Runtime make_runtime(const GlobalOptions& g) {
    Runtime rt;
    rt.cfg = resolve_config(g.config.empty() ? std::nullopt : std::optional<fs::path>(g.config), g.overrides, g.seed);
    rt.seed = rt.cfg.at("seed").get<std::uint64_t>();
    rt.runs_root = config_path(rt.cfg, "/runs_dir") / rt.cfg.at("experiment_id").get<std::string>();
    spdlog::info("resolved config: {}", rt.cfg.dump());
    spdlog::info("seed: {}", rt.seed);
    return rt;
}

SplitPlan parse_plan(const json& j) {
    SplitPlan plan;
    for (const auto& entry : j) {
        SplitTarget t{parse_split_name(entry.at("split").get<std::string>()), {}};
        for (const auto& [label, n] : entry.at("counts").items()) {
            const auto l = parse_task_label(label);
            if (!l) {
                throw UsageError("split plan names unknown label '" + label + "'");
            }
            t.per_class[*l] = n.get<std::size_t>();
        }
        plan.push_back(std::move(t));
    }
    return plan;
}

std::optional<SplitPlan> plan_from(const json& data, const char* key) {
    if (!data.contains(key) || data[key].is_null()) {
        return std::nullopt;
    }
    try {
        return parse_plan(data[key]);
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad ") + key + ": " + e.what());
    }
}

bool has_path(const json& cfg, const std::string& pointer) {
    const json::json_pointer p(pointer);
    return cfg.contains(p) && cfg.at(p).is_string() && !cfg.at(p).get<std::string>().empty();
}

// Hinglish corpus from a dataset file, or built from a translation file.
std::optional<std::vector<LabeledSentence>> load_code_mixed(const json& cfg, const std::string& dataset_key,
                                                            const std::string& translations_key, Task task,
                                                            std::span<const LabeledSentence> sources) {
    if (has_path(cfg, "/data/" + dataset_key)) {
        return load_dataset(config_path(cfg, "/data/" + dataset_key), task);
    }
    if (has_path(cfg, "/data/" + translations_key) && fs::exists(config_path(cfg, "/data/" + translations_key))) {
        const auto tr = load_translations(config_path(cfg, "/data/" + translations_key));
        std::vector<std::string> missing;
        auto out = code_mixed_dataset(tr, sources, &missing);
        spdlog::info("{}: {} usable translations", translations_key, out.size());
        return out;
    }
    return std::nullopt;
}

int cmd_prepare_data(const Runtime& rt) {
    const auto& data = rt.cfg.at("data");
    SplitRegistry registry;
    json manifest = json::object();

    const auto sarcasm = load_sarcasm_headlines(config_path(rt.cfg, "/data/sarcasm_en"));
    spdlog::info("loaded {} sarcasm records", sarcasm.size());
    const auto balanced =
        data.value("balance_sarcasm", true) ? balanced_undersample(sarcasm, rt.seed) : sarcasm;
    const auto sarcasm_splits =
        make_sarcasm_splits(balanced, rt.seed, plan_from(data, "sarcasm_plan").value_or(default_sarcasm_plan()));
    manifest["sarcasm"] = split_manifest(sarcasm_splits);
    const std::map<SplitName, std::string> en_names{{SplitName::Train, split_names::kEnSarcasmTrain},
                                                    {SplitName::FineTuneEnglish, split_names::kEnSarcasmFineTune},
                                                    {SplitName::Test, split_names::kEnSarcasmTest}};
    for (const auto& [name, split] : sarcasm_splits) {
        if (en_names.contains(name)) {
            registry.emplace(en_names.at(name), split);
        }
    }
    if (auto cm = load_code_mixed(rt.cfg, "sarcasm_hinglish", "sarcasm_translations", Task::Sarcasm, sarcasm)) {
        if (sarcasm_splits.contains(SplitName::FineTuneEnglish)) {
            registry.emplace(split_names::kCmSarcasmFineTune,
                             parallel_split(sarcasm_splits.at(SplitName::FineTuneEnglish), SplitName::FineTuneHinglish,
                                            *cm));
        }
        if (sarcasm_splits.contains(SplitName::Test)) {
            registry.emplace(split_names::kCmSarcasmTest,
                             parallel_split(sarcasm_splits.at(SplitName::Test), SplitName::Test, *cm));
        }
    } else {
        spdlog::warn("no Hinglish sarcasm data yet; run translate, then prepare-data again");
    }

    if (has_path(rt.cfg, "/data/sentiment_en")) {
        const auto sentiment = load_sentiment_tweets(config_path(rt.cfg, "/data/sentiment_en"));
        spdlog::info("loaded {} sentiment records", sentiment.size());
        const auto splits =
            make_splits(sentiment, plan_from(data, "sentiment_plan").value_or(default_sentiment_plan()), rt.seed);
        manifest["sentiment"] = split_manifest(splits);
        if (splits.contains(SplitName::FineTuneEnglish)) {
            const auto& en = splits.at(SplitName::FineTuneEnglish);
            registry.emplace(split_names::kEnSentimentFineTune, en);
            if (auto cm = load_code_mixed(rt.cfg, "sentiment_hinglish", "sentiment_translations", Task::Sentiment,
                                          sentiment)) {
                registry.emplace(split_names::kCmSentimentFineTune,
                                 parallel_split(en, SplitName::FineTuneHinglish, *cm));
            } else {
                spdlog::warn("no Hinglish sentiment data yet; run translate, then prepare-data again");
            }
        }
    }

    const auto dir = config_path(rt.cfg, "/data/splits_dir");
    save_split_registry(dir, registry);
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& [name, split] : registry) {
        std::string counts;
        for (const auto& [label, n] : split.class_counts) {
            counts += fmt::format(" {}={}", to_string(label), n);
        }
        spdlog::info("{}: {} records ({} )", name, split.size(), counts);
    }
    spdlog::info("split registry written to {}", dir.string());
    return 0;
}

HttpClientConfig http_config(const json& section) {
    HttpClientConfig c;
    c.endpoint = section.at("endpoint").get<std::string>();
    if (c.endpoint.empty()) {
        throw UsageError("no endpoint configured");
    }
    c.response_key = section.value("response_key", c.response_key);
    c.extra_body = section.value("extra_body", json::object());
    c.credential_env = section.value("credential_env", std::string());
    c.timeout_seconds = section.value("timeout_seconds", c.timeout_seconds);
    return c;
}

int cmd_translate(const Runtime& rt, std::vector<std::string> corpora, const std::string& manual_csv) {
    const auto& section = rt.cfg.at("translation");
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    if (corpora.empty()) {
        corpora.push_back("sarcasm");
        if (registry.contains(split_names::kEnSentimentFineTune)) {
            corpora.push_back("sentiment");
        }
    }
    std::map<std::string, std::string> manual;
    if (!manual_csv.empty()) {
        const auto rows = parse_csv(read_text_file(manual_csv));
        if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "id" || rows[0][1] != "text") {
            throw DataError(manual_csv + ": expected header 'id,text'");
        }
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() >= 2) {
                manual[rows[i][0]] = rows[i][1];
            }
        }
    }
    HttpGenerationClient http(http_config(section));
    CountingClient client(http);
    TranslationCache cache(config_path(rt.cfg, "/translation/cache"));
    TranslationOptions options;
    options.model = section.at("model").get<std::string>();
    options.max_retries = section.value("max_retries", options.max_retries);
    options.parallelism = section.value("parallelism", options.parallelism);
    if (section.contains("refusal_phrases") && !section["refusal_phrases"].is_null()) {
        options.refusal_phrases = section["refusal_phrases"].get<std::vector<std::string>>();
    }
    const std::string header = section.value("prompt_header", std::string()).empty()
                                   ? std::string(default_translation_header())
                                   : section["prompt_header"].get<std::string>();
    std::size_t failures = 0;
    for (const auto& corpus : corpora) {
        std::vector<std::string> names;
        if (corpus == "sarcasm") {
            names = {split_names::kEnSarcasmFineTune, split_names::kEnSarcasmTest};
        } else if (corpus == "sentiment") {
            names = {split_names::kEnSentimentFineTune};
        } else {
            throw UsageError("unknown corpus '" + corpus + "' (expected sarcasm or sentiment)");
        }
        TranslationBatchRequest request;
        request.prompt_header = header;
        request.batch_size = section.value("batch_size", request.batch_size);
        for (const auto& n : names) {
            for (const auto& r : require_split(registry, n).records) {
                request.sentences.emplace_back(r.id, r.text);
            }
        }
        auto records = translate_corpus(client, request, options, cache);
        for (auto& r : records) {
            const auto it = manual.find(r.source_id);
            if (it != manual.end() && (r.status == TranslationStatus::Refused || r.status == TranslationStatus::Error)) {
                r = mark_manual(r, it->second);
                cache.store(TranslationCache::key_for(options.model, header, {r.source_id, r.source_text}), r);
            }
        }
        std::map<TranslationStatus, std::size_t> counts;
        for (const auto& r : records) {
            ++counts[r.status];
        }
        failures += counts[TranslationStatus::Error];
        code_mix_warnings(records);
        const auto out = config_path(rt.cfg, "/data/" + corpus + "_translations");
        save_translations(out, records);
        spdlog::info("{}: {} ok, {} refused, {} error, {} manual -> {}", corpus, counts[TranslationStatus::Ok],
                     counts[TranslationStatus::Refused], counts[TranslationStatus::Error],
                     counts[TranslationStatus::Manual], out.string());
    }
    spdlog::info("translation client calls: {}", client.calls());
    if (failures > 0) {
        throw ServiceError(std::to_string(failures) + " sentences failed to translate (transport errors); rerun to retry");
    }
    return 0;
}

std::vector<TranslationRecord> load_corpus_translations(const Runtime& rt, const std::string& corpus) {
    const auto path = config_path(rt.cfg, "/data/" + corpus + "_translations");
    if (!fs::exists(path)) {
        throw DataError("no translations for " + corpus + " at " + path.string());
    }
    return load_translations(path);
}

int cmd_audit_sample(const Runtime& rt, const std::string& out) {
    std::vector<TranslationRecord> sample;
    std::uint64_t stream = 0;
    for (const auto& [corpus, n] : rt.cfg.at("audit").at("quota").items()) {
        const auto records = load_corpus_translations(rt, corpus);
        auto part = sample_for_audit(records, n.get<std::size_t>(), mix_seed(rt.seed, stream++));
        spdlog::info("audit sample: {} from {}", part.size(), corpus);
        sample.insert(sample.end(), part.begin(), part.end());
    }
    write_text_file(out, audit_sheet_csv(sample));
    spdlog::info("audit sheet with {} rows written to {}", sample.size(), out);
    return 0;
}

int cmd_audit_score(const Runtime& rt, const std::string& annotations, const std::string& out) {
    const auto audits = load_audit_csv(annotations);
    std::vector<TranslationRecord> audited;
    for (const auto& [corpus, n] : rt.cfg.at("audit").at("quota").items()) {
        (void)n;
        const auto records = load_corpus_translations(rt, corpus);
        auto part = attach_audits(records, audits);
        audited.insert(audited.end(), part.begin(), part.end());
    }
    if (audited.size() != audits.size()) {
        throw DataError(std::to_string(audits.size() - audited.size()) +
                        " annotated ids do not match any translation record");
    }
    const auto stats = audit_statistics(audited);
    write_text_file(out, to_json(stats).dump(2) + "\n");
    spdlog::info("audit: n={} raw agreement {:.4f} unsatisfactory {:.4f} -> {}", stats.n, stats.raw_agreement,
                 stats.unsatisfactory_rate, out);
    return 0;
}

ClassifierConfig classifier_config(const Runtime& rt) {
    auto cfg = ClassifierConfig::from_json(rt.cfg.at("classifier"));
    if (!cfg.base_encoder_id.empty() && fs::path(cfg.base_encoder_id).is_relative()) {
        cfg.base_encoder_id = (config_base_dir(rt.cfg) / cfg.base_encoder_id).string();
    }
    cfg.seed = rt.seed;
    return cfg;
}

int cmd_train(const Runtime& rt, const std::string& split_name, const std::string& out, bool cv) {
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    const auto& split = require_split(registry, split_name);
    const auto cfg = classifier_config(rt);
    if (cv) {
        const auto k = rt.cfg.at("cv_folds").get<std::size_t>();
        const auto result = kfold_cross_validate(cfg, split, k);
        fs::create_directories(out);
        write_text_file(fs::path(out) / "cv.json", result.to_json().dump(2) + "\n");
        spdlog::info("{}-fold mean train accuracy {:.4f}, mean validation accuracy {:.4f}", k,
                     result.mean_train_accuracy, result.mean_validation_accuracy);
        return 0;
    }
    const auto ckpt = train(cfg, split, split_name);
    save_checkpoint(out, ckpt);
    spdlog::info("checkpoint written to {}", out);
    return 0;
}

int cmd_finetune(const Runtime& rt, const std::string& checkpoint, const std::string& split_name,
                 const std::string& out, const std::string& reattach_from) {
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    const auto source = load_checkpoint(checkpoint);
    const auto cfg = ClassifierConfig::from_json(rt.cfg.at("finetune"), classifier_config(rt));
    auto tuned = sequential_fine_tune(source, require_split(registry, split_name), cfg, split_name);
    if (!reattach_from.empty()) {
        tuned = reattach_classifier(tuned, load_checkpoint(reattach_from));
    }
    save_checkpoint(out, tuned);
    spdlog::info("checkpoint written to {} (provenance length {})", out, tuned.provenance.size());
    return 0;
}

StrategyContext strategy_context(const Runtime& rt, const SplitRegistry& registry) {
    StrategyContext ctx;
    ctx.splits = &registry;
    ctx.base_config = classifier_config(rt);
    ctx.runs_dir = rt.runs_root;
    ctx.save_checkpoints = rt.cfg.value("save_checkpoints", true);
    return ctx;
}

StrategySpec strategy_spec(const Runtime& rt, StrategyId id) {
    auto spec = StrategySpec::defaults(id);
    spec.finetune_overrides = rt.cfg.at("finetune");
    return spec;
}

std::vector<std::uint64_t> run_seeds(const Runtime& rt) {
    std::vector<std::uint64_t> seeds{rt.seed};
    for (const auto& s : rt.cfg.at("seeds")) {
        const auto v = s.get<std::uint64_t>();
        if (std::find(seeds.begin(), seeds.end(), v) == seeds.end()) {
            seeds.push_back(v);
        }
    }
    return seeds;
}

int cmd_eval_model(const Runtime& rt, const std::string& checkpoint, const std::string& split_name,
                   const std::string& out, std::vector<std::string> strategies) {
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    if (!checkpoint.empty()) {
        if (out.empty()) {
            throw UsageError("--out is required with --checkpoint");
        }
        const auto ckpt = load_checkpoint(checkpoint);
        const auto& test = require_split(registry, split_name);
        ExperimentResult r;
        r.cell_id = fs::path(out).filename().string();
        r.kind = "model";
        r.seed = rt.seed;
        r.test_split = split_name;
        r.coordinates = {{"checkpoint", checkpoint}, {"provenance", ckpt.provenance}, {"test", split_name}};
        r.predictions = predict(ckpt, test.records, {}, split_name);
        r.metrics = compute_metrics(*r.predictions, test, InvalidPolicy::CountIncorrect);
        if (r.metrics->auprc) {
            r.pr = pr_curve(scored_golds(*r.predictions, test));
        }
        r.ok = true;
        persist_cell(out, r);
        spdlog::info("accuracy {:.5f} macro-F1 {:.4f}", r.metrics->accuracy, r.metrics->macro_f1);
        return 0;
    }
    if (strategies.empty()) {
        strategies = rt.cfg.at("strategies").get<std::vector<std::string>>();
    }
    const auto ctx = strategy_context(rt, registry);
    for (const auto& s : strategies) {
        const auto spec = strategy_spec(rt, parse_strategy_id(s));
        for (const auto seed : run_seeds(rt)) {
            run_strategy(spec, seed, ctx);
        }
    }
    return 0;
}

std::vector<LlmModel> configured_models(const Runtime& rt) {
    std::vector<LlmModel> out;
    for (const auto& m : rt.cfg.at("llm").at("models")) {
        if (m.is_string()) {
            out.push_back({m.get<std::string>(), m.get<std::string>()});
        } else {
            out.push_back({m.at("id").get<std::string>(), m.value("label", m.at("id").get<std::string>())});
        }
    }
    return out;
}

int cmd_eval_llm(const Runtime& rt, const std::vector<std::string>& model_filter,
                 const std::vector<std::string>& mode_filter) {
    const auto& section = rt.cfg.at("llm");
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    auto models = configured_models(rt);
    if (!model_filter.empty()) {
        std::erase_if(models, [&](const LlmModel& m) {
            return std::find(model_filter.begin(), model_filter.end(), m.id) == model_filter.end();
        });
        if (models.empty()) {
            throw UsageError("--model matched none of the configured models");
        }
    }
    std::vector<PromptMode> modes;
    for (const auto& m : mode_filter.empty() ? section.at("modes").get<std::vector<std::string>>() : mode_filter) {
        modes.push_back(parse_prompt_mode(m));
    }
    HttpGenerationClient http(http_config(section));
    CountingClient client(http);
    PredictionCache cache(config_path(rt.cfg, "/llm/cache"));
    LlmGridContext ctx;
    ctx.splits = &registry;
    ctx.client = &client;
    ctx.cache = &cache;
    ctx.runs_dir = rt.runs_root;
    ctx.options.max_transport_retries = section.value("max_transport_retries", ctx.options.max_transport_retries);
    ctx.options.max_unparseable_retries = section.value("max_unparseable_retries", ctx.options.max_unparseable_retries);
    ctx.options.parallelism = section.value("parallelism", ctx.options.parallelism);
    ctx.invalid_policy = parse_invalid_policy(section.value("invalid_policy", std::string("incorrect")));
    ctx.prompt_body = section.value("prompt_body", std::string());
    ctx.fewshot_k_per_class = section.at("fewshot").value("k_per_class", ctx.fewshot_k_per_class);
    ctx.fewshot_pools = section.at("fewshot").at("pools").get<std::map<std::string, std::string>>();
    ctx.seed = rt.seed;
    const auto cells =
        run_llm_grid(models, modes, section.at("test_splits").get<std::vector<std::string>>(), ctx);
    const auto failed = std::count_if(cells.begin(), cells.end(), [](const ExperimentResult& c) { return !c.ok; });
    spdlog::info("LLM grid: {} cells, {} failed, {} client calls", cells.size(), failed, client.calls());
    if (!cells.empty() && static_cast<std::size_t>(failed) == cells.size()) {
        throw ServiceError("every LLM grid cell failed; is the inference server at " +
                           section.at("endpoint").get<std::string>() + " reachable?");
    }
    return 0;
}

fs::path locate_cell(const Runtime& rt, const std::string& name) {
    if (fs::exists(fs::path(name) / "cell.json")) {
        return name;
    }
    if (fs::exists(rt.runs_root / name / "cell.json")) {
        return rt.runs_root / name;
    }
    throw UsageError("no experiment cell at '" + name + "'");
}

int cmd_compare(const Runtime& rt, const std::string& a, const std::string& b) {
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    const auto dir_a = locate_cell(rt, a);
    const auto dir_b = locate_cell(rt, b);
    const auto ca = reload_cell(dir_a, registry);
    const auto cb = reload_cell(dir_b, registry);
    if (!ca.predictions || !cb.predictions) {
        throw DataError("both cells need stored predictions");
    }
    if (ca.test_split != cb.test_split) {
        spdlog::info("comparing across parallel test splits {} and {} (paired by sentence id)", ca.test_split,
                     cb.test_split);
    }
    const auto& golds = require_split(registry, ca.test_split);
    const auto& bs = rt.cfg.at("bootstrap");
    const auto result = paired_bootstrap(*ca.predictions, *cb.predictions, golds, bs.at("iterations").get<std::size_t>(),
                                         rt.seed, bs.at("resample_size").get<std::size_t>());
    json out = to_json(result);
    out["a"] = ca.cell_id;
    out["b"] = cb.cell_id;
    out["seed"] = rt.seed;
    std::cout << out.dump(2) << std::endl;
    const auto dir = rt.runs_root / "comparisons";
    fs::create_directories(dir);
    write_text_file(dir / (ca.cell_id + "__" + cb.cell_id + ".json"), out.dump(2) + "\n");
    return 0;
}

int cmd_ablate(const Runtime& rt, std::vector<std::string> strategies) {
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    const auto& section = rt.cfg.at("ablation");
    if (strategies.empty()) {
        strategies = section.at("strategies").get<std::vector<std::string>>();
    }
    const auto sizes = section.at("sizes").get<std::vector<std::size_t>>();
    const auto ctx = strategy_context(rt, registry);
    for (const auto& s : strategies) {
        const auto points = run_size_ablation(strategy_spec(rt, parse_strategy_id(s)), sizes, rt.seed, ctx);
        for (const auto& p : points) {
            spdlog::info("{} n={}: accuracy {:.5f} macro-F1 {:.4f}", s, p.train_size, p.accuracy, p.macro_f1);
        }
    }
    return 0;
}

int cmd_report(const Runtime& rt) {
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    ReportInputs in;
    in.splits = &registry;
    in.models = configured_models(rt);
    if (!fs::exists(rt.runs_root)) {
        throw DataError("no runs under " + rt.runs_root.string());
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(rt.runs_root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "cell.json")) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<ExperimentResult> strategies;
    for (const auto& d : dirs) {
        auto r = reload_cell(d, registry);
        if (r.kind == "strategy") {
            strategies.push_back(std::move(r));
        } else if (r.kind == "llm") {
            in.llm_cells.push_back(std::move(r));
        } else if (r.kind == "ablation" && r.ok && r.metrics) {
            in.ablations.push_back({r.coordinates.at("train_size").get<std::size_t>(), r.metrics->accuracy,
                                    r.metrics->macro_f1, r.coordinates.at("strategy").get<std::string>()});
        }
    }
    // The configured seed's run leads each strategy group.
    std::stable_partition(strategies.begin(), strategies.end(),
                          [&](const ExperimentResult& r) { return r.seed == rt.seed; });
    in.strategies = std::move(strategies);
    std::sort(in.ablations.begin(), in.ablations.end(), [](const AblationPoint& x, const AblationPoint& y) {
        return std::tie(x.strategy, x.train_size) < std::tie(y.strategy, y.train_size);
    });
    const auto cmp_dir = rt.runs_root / "comparisons";
    if (fs::exists(cmp_dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(cmp_dir)) {
            if (entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            in.comparisons.push_back(json::parse(read_text_file(f)));
        }
    }
    if (has_path(rt.cfg, "/report/reference_targets")) {
        in.reference_targets = json::parse(read_text_file(config_path(rt.cfg, "/report/reference_targets")));
    }
    const fs::path out = has_path(rt.cfg, "/report/out_dir") ? config_path(rt.cfg, "/report/out_dir")
                                                              : rt.runs_root / "report";
    const auto files = emit_report(in, out);
    spdlog::info("report: {} files written to {}", files.size(), out.string());
    return 0;
}

int cmd_init_encoder(const Runtime& rt, const std::string& out, nn::EncoderConfig ec) {
    const auto registry = load_split_registry(config_path(rt.cfg, "/data/splits_dir"));
    std::vector<std::string> texts;
    for (const auto& [name, split] : registry) {
        for (const auto& r : split.records) {
            texts.push_back(r.text);
        }
    }
    init_encoder(out, ec, texts, rt.seed);
    spdlog::info("random encoder written to {}", out);
    return 0;
}

void print_error(std::string_view type, std::string_view message, int code) {
    std::cerr << json{{"error", type}, {"message", message}, {"exit_code", code}}.dump(-1, ' ', false,
                                                                                       json::error_handler_t::replace)
              << std::endl;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Sarcasm-detection benchmark toolkit for code-mixed Hinglish"};
    app.set_version_flag("--version", "sarcbench 1.0.0");
    GlobalOptions g;
    app.add_option("-c,--config", g.config, "Experiment config (JSON)");
    app.add_option("--set", g.overrides, "Override a config value: key.path=value (repeatable)");
    app.add_option("--seed", g.seed, "Override the config seed");
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");
    app.add_option("--threads", g.threads, "OpenMP thread count (0 = runtime default)");
    app.require_subcommand(1);

    auto* prepare = app.add_subcommand("prepare-data", "Balance the corpora and write the named splits");
    auto* translate = app.add_subcommand("translate", "Generate Hinglish translations with the translation LLM");
    std::vector<std::string> corpora;
    std::string manual;
    translate->add_option("--corpus", corpora, "sarcasm and/or sentiment (default: all prepared)");
    translate->add_option("--manual", manual, "CSV id,text of manual translations for refused/failed sentences");

    auto* audit = app.add_subcommand("audit", "Translation-quality audit");
    audit->require_subcommand(1);
    auto* audit_sample = audit->add_subcommand("sample", "Draw the audit sample and write an annotation sheet");
    std::string sheet_out;
    audit_sample->add_option("--out", sheet_out, "Annotation sheet CSV")->required();
    auto* audit_score = audit->add_subcommand("score", "Agreement statistics from a filled annotation sheet");
    std::string annotations;
    std::string audit_out;
    audit_score->add_option("--annotations", annotations, "CSV id,annotator_a,annotator_b,adjudicated")->required();
    audit_score->add_option("--out", audit_out, "Statistics JSON")->required();

    auto* train_cmd = app.add_subcommand("train", "Train the classifier on an English sarcasm split");
    std::string train_split = split_names::kEnSarcasmTrain;
    std::string train_out;
    bool cv = false;
    train_cmd->add_option("--split", train_split, "Training split name");
    train_cmd->add_option("--out", train_out, "Checkpoint (or cross-validation) directory")->required();
    train_cmd->add_flag("--cv", cv, "Run stratified k-fold cross-validation instead (k = cv_folds)");

    auto* finetune = app.add_subcommand("finetune", "Sequentially fine-tune a checkpoint on another split");
    std::string ft_checkpoint;
    std::string ft_split;
    std::string ft_out;
    std::string reattach;
    finetune->add_option("--checkpoint", ft_checkpoint, "Source checkpoint directory")->required();
    finetune->add_option("--split", ft_split, "Fine-tune split name")->required();
    finetune->add_option("--out", ft_out, "Output checkpoint directory")->required();
    finetune->add_option("--reattach-from", reattach, "Put this checkpoint's classifier layer back afterwards");

    auto* eval_model = app.add_subcommand("eval-model", "Evaluate a checkpoint, or run classifier strategies");
    std::string em_checkpoint;
    std::string em_split = split_names::kCmSarcasmTest;
    std::string em_out;
    std::vector<std::string> em_strategies;
    eval_model->add_option("--checkpoint", em_checkpoint, "Checkpoint directory to evaluate");
    eval_model->add_option("--split", em_split, "Test split name (with --checkpoint)");
    eval_model->add_option("--out", em_out, "Cell directory for predictions and metrics (with --checkpoint)");
    eval_model->add_option("--strategy", em_strategies, "Strategy ids to run (default: config strategies)");

    auto* eval_llm = app.add_subcommand("eval-llm", "Run the zero/few-shot LLM grid against the inference server");
    std::vector<std::string> llm_models;
    std::vector<std::string> llm_modes;
    eval_llm->add_option("--model", llm_models, "Restrict to these model ids");
    eval_llm->add_option("--mode", llm_modes, "Restrict to zero-shot and/or few-shot");

    auto* compare = app.add_subcommand("compare", "Paired bootstrap test between two experiment cells");
    std::string cmp_a;
    std::string cmp_b;
    compare->add_option("--a", cmp_a, "First cell (directory or cell id)")->required();
    compare->add_option("--b", cmp_b, "Second cell (directory or cell id)")->required();

    auto* ablate = app.add_subcommand("ablate", "Training-size ablation");
    std::vector<std::string> ab_strategies;
    ablate->add_option("--strategy", ab_strategies, "Strategy ids (default: config ablation.strategies)");

    auto* report = app.add_subcommand("report", "Tables, metrics, plots and exports from stored runs");

    auto* init_enc = app.add_subcommand("init-encoder", "Write a randomly initialised encoder with a corpus vocabulary");
    std::string enc_out;
    nn::EncoderConfig ec;
    ec.vocab_size = 8000;
    ec.dim = 64;
    ec.n_layers = 2;
    ec.n_heads = 4;
    ec.hidden_dim = 128;
    ec.max_position_embeddings = 128;
    init_enc->add_option("--out", enc_out, "Output directory")->required();
    init_enc->add_option("--vocab-size", ec.vocab_size, "Maximum vocabulary size");
    init_enc->add_option("--dim", ec.dim, "Hidden size");
    init_enc->add_option("--layers", ec.n_layers, "Transformer layers");
    init_enc->add_option("--heads", ec.n_heads, "Attention heads");
    init_enc->add_option("--hidden", ec.hidden_dim, "Feed-forward size");
    init_enc->add_option("--max-positions", ec.max_position_embeddings, "Maximum sequence length");

    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
    }
    for (auto* sub : {audit_sample, audit_score}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << std::endl;
        print_error("UsageError", e.what(), 1);
        return 1;
    }

    try {
        setup_logging(g.log_level);
        if (g.threads > 0) {
            omp_set_num_threads(g.threads);
        }
        const Runtime rt = make_runtime(g);
        if (*prepare) {
            return cmd_prepare_data(rt);
        }
        if (*translate) {
            return cmd_translate(rt, corpora, manual);
        }
        if (*audit_sample) {
            return cmd_audit_sample(rt, sheet_out);
        }
        if (*audit_score) {
            return cmd_audit_score(rt, annotations, audit_out);
        }
        if (*train_cmd) {
            return cmd_train(rt, train_split, train_out, cv);
        }
        if (*finetune) {
            return cmd_finetune(rt, ft_checkpoint, ft_split, ft_out, reattach);
        }
        if (*eval_model) {
            return cmd_eval_model(rt, em_checkpoint, em_split, em_out, em_strategies);
        }
        if (*eval_llm) {
            return cmd_eval_llm(rt, llm_models, llm_modes);
        }
        if (*compare) {
            return cmd_compare(rt, cmp_a, cmp_b);
        }
        if (*ablate) {
            return cmd_ablate(rt, ab_strategies);
        }
        if (*report) {
            return cmd_report(rt);
        }
        if (*init_enc) {
            return cmd_init_encoder(rt, enc_out, ec);
        }
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        print_error("UsageError", e.what(), 1);
        return 1;
    } catch (const DataError& e) {
        print_error("DataError", e.what(), 2);
        return 2;
    } catch (const ServiceError& e) {
        print_error("ServiceError", e.what(), 3);
        return 3;
    } catch (const json::exception& e) {
        print_error("DataError", e.what(), 2);
        return 2;
    } catch (const std::exception& e) {
        print_error("InternalError", e.what(), 2);
        return 2;
    }
}

}  // namespace sarc
