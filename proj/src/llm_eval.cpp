#include "sarcbench/llm_eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "sarcbench/errors.hpp"
#include "sarcbench/rng.hpp"

namespace sarc {

std::string_view to_string(PromptMode mode) { return mode == PromptMode::ZeroShot ? "zero-shot" : "few-shot"; }

PromptMode parse_prompt_mode(std::string_view text) {
    if (text == "zero-shot") {
        return PromptMode::ZeroShot;
    }
    if (text == "few-shot") {
        return PromptMode::FewShot;
    }
    throw UsageError("prompt mode must be 'zero-shot' or 'few-shot', got '" + std::string(text) + "'");
}

std::string_view PromptTemplate::default_classification_body() {
    return "You are a sarcasm detection model. You have to detect sarcasm in Hinglish sentences.\n"
           "Sentence: \"{sentence}\"\n"
           "Don't give any explanation and Respond ONLY with one label:\n"
           "- Sarcastic\n"
           "- Non-Sarcastic";
}

PromptTemplate PromptTemplate::zero_shot(std::string body) {
    PromptTemplate t{PromptMode::ZeroShot, std::move(body), {}};
    t.validate();
    return t;
}

PromptTemplate PromptTemplate::few_shot(std::vector<Exemplar> exemplars, std::string body) {
    PromptTemplate t{PromptMode::FewShot, std::move(body), std::move(exemplars)};
    t.validate();
    return t;
}

void PromptTemplate::validate() const {
    const auto first = body.find(kSentencePlaceholder);
    if (first == std::string::npos) {
        throw UsageError("prompt template lacks the {sentence} placeholder");
    }
    if (body.find(kSentencePlaceholder, first + kSentencePlaceholder.size()) != std::string::npos) {
        throw UsageError("prompt template contains more than one {sentence} placeholder");
    }
    if (mode == PromptMode::ZeroShot) {
        if (!exemplars.empty()) {
            throw UsageError("zero-shot template must not carry exemplars");
        }
        return;
    }
    if (exemplars.empty()) {
        throw UsageError("few-shot template needs exemplars");
    }
    std::map<TaskLabel, std::size_t> counts;
    for (const auto& e : exemplars) {
        if (task_of(e.label) != Task::Sarcasm) {
            throw UsageError("few-shot exemplars must carry sarcasm labels");
        }
        ++counts[e.label];
    }
    if (counts.size() != 2 || counts[TaskLabel::Sarcastic] != counts[TaskLabel::NonSarcastic]) {
        throw UsageError("few-shot exemplars must be class-balanced");
    }
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view sentence) {
    tmpl.validate();
    std::string body = tmpl.body;
    const auto pos = body.find(kSentencePlaceholder);
    std::string out;
    out.reserve(body.size() + sentence.size() + 64 * tmpl.exemplars.size());
    std::size_t line_start = body.rfind('\n', pos);
    line_start = line_start == std::string::npos ? 0 : line_start + 1;
    out.append(body, 0, line_start);
    for (const auto& e : tmpl.exemplars) {
        out += "Example: ";
        out += e.text;
        out += " → ";
        out += display_name(e.label);
        out += '\n';
    }
    out.append(body, line_start, pos - line_start);
    out += sentence;
    out.append(body, pos + kSentencePlaceholder.size());
    return out;
}

std::string_view to_string(ParsedLabel label) {
    switch (label) {
    case ParsedLabel::Sarcastic: return "sarcastic";
    case ParsedLabel::NonSarcastic: return "non-sarcastic";
    case ParsedLabel::Unparseable: return "unparseable";
    }
    return "unparseable";
}

ParsedLabel parse_label(std::string_view raw) {
    // Lower-case ASCII words; hyphens survive, everything else (including
    // non-ASCII bytes such as curly quotes) separates words.
    std::vector<std::string> words;
    std::string word;
    const auto flush = [&] {
        const auto b = word.find_first_not_of('-');
        const auto e = word.find_last_not_of('-');
        if (b != std::string::npos) {
            words.push_back(word.substr(b, e - b + 1));
        }
        word.clear();
    };
    for (char ch : raw) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && (std::isalnum(c) || c == '-')) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();

    bool saw_non = false;
    bool saw_sarcastic = false;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        if (w == "non-sarcastic" || w == "nonsarcastic") {
            saw_non = true;
        } else if (w == "non" && i + 1 < words.size() && words[i + 1] == "sarcastic") {
            saw_non = true;
            ++i;
        } else if (w == "sarcastic") {
            saw_sarcastic = true;
        }
    }
    if (saw_non == saw_sarcastic) {
        return ParsedLabel::Unparseable;
    }
    return saw_non ? ParsedLabel::NonSarcastic : ParsedLabel::Sarcastic;
}

PredictionCache::PredictionCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) {
        return;
    }
    for_each_jsonl(path_, [&](std::size_t line, const json& obj) {
        try {
            RawLLMResponse r{obj.at("model_id").get<std::string>(), obj.at("sentence_id").get<std::string>(),
                             obj.at("prompt_sha256").get<std::string>(), obj.at("text").get<std::string>(),
                             obj.value("latency_ms", std::int64_t{0})};
            Key key{r.model_id, r.prompt_sha256, r.sentence_id};
            entries_[std::move(key)] = std::move(r);
        } catch (const json::exception& e) {
            throw DataError(path_.string() + ":" + std::to_string(line) + ": bad cache entry: " + e.what());
        }
    });
}

std::optional<RawLLMResponse> PredictionCache::lookup(const std::string& model_id,
                                                      const std::string& prompt_sha256,
                                                      const std::string& sentence_id) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(Key{model_id, prompt_sha256, sentence_id});
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void PredictionCache::store(const RawLLMResponse& r) {
    std::lock_guard lock(mutex_);
    entries_[Key{r.model_id, r.prompt_sha256, r.sentence_id}] = r;
    if (path_.empty()) {
        return;
    }
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
        throw DataError("cannot append to cache " + path_.string());
    }
    const json row{{"model_id", r.model_id}, {"sentence_id", r.sentence_id}, {"prompt_sha256", r.prompt_sha256},
                   {"text", r.text}, {"latency_ms", r.latency_ms}};
    out << row.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

std::size_t PredictionCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

json ClassifyReport::to_json() const {
    return json{{"ok", ok}, {"unparseable", unparseable}, {"error", error},
                {"client_calls", client_calls}, {"cache_hits", cache_hits}, {"error_ids", error_ids}};
}

namespace {

struct SentenceOutcome {
    PredictionEntry entry;
    std::size_t calls = 0;
    bool cache_hit = false;
};

SentenceOutcome classify_one(TextGenerationClient& client, const std::string& model_id,
                             const PromptTemplate& tmpl, const LabeledSentence& sentence,
                             PredictionCache& cache, const ClassifyOptions& options) {
    SentenceOutcome out;
    out.entry.sentence_id = sentence.id;
    const std::string prompt = render_prompt(tmpl, sentence.text);
    const std::string hash = sha256_hex(prompt);

    const auto settle = [&](const std::string& text) {
        const ParsedLabel parsed = parse_label(text);
        if (parsed == ParsedLabel::Unparseable) {
            out.entry.status = PredictionStatus::Unparseable;
            out.entry.predicted.reset();
        } else {
            out.entry.status = PredictionStatus::Ok;
            out.entry.predicted =
                parsed == ParsedLabel::Sarcastic ? TaskLabel::Sarcastic : TaskLabel::NonSarcastic;
        }
        return parsed;
    };

    if (const auto hit = cache.lookup(model_id, hash, sentence.id)) {
        out.cache_hit = true;
        settle(hit->text);
        return out;
    }

    std::optional<GenerationResult> last_ok;
    for (int attempt = 0; attempt <= options.max_unparseable_retries; ++attempt) {
        GenerationResult result;
        for (int t = 0; t <= options.max_transport_retries; ++t) {
            ++out.calls;
            result = client.generate(model_id, prompt);
            if (result.ok) {
                break;
            }
            spdlog::debug("{}: {} attempt {} failed: {}", model_id, sentence.id, t + 1, result.error);
        }
        if (!result.ok) {
            if (last_ok) {
                break;  // keep the last parseable-or-not answer we did get
            }
            out.entry.status = PredictionStatus::Error;
            out.entry.predicted.reset();
            spdlog::debug("{}: {} failed after retries: {}", model_id, sentence.id, result.error);
            return out;
        }
        last_ok = result;
        if (settle(result.text) != ParsedLabel::Unparseable) {
            break;
        }
    }
    settle(last_ok->text);
    cache.store({model_id, sentence.id, hash, last_ok->text, last_ok->latency_ms});
    return out;
}

}  // namespace

ClassifyOutcome classify_dataset(TextGenerationClient& client, const std::string& model_id,
                                 const PromptTemplate& tmpl, const DatasetSplit& split, PredictionCache& cache,
                                 const ClassifyOptions& options) {
    if (split.task != Task::Sarcasm) {
        throw UsageError("classify_dataset expects a sarcasm split");
    }
    tmpl.validate();
    std::vector<SentenceOutcome> outcomes(split.records.size());
    const auto workers = static_cast<std::size_t>(std::max(1, options.parallelism));
    if (workers == 1) {
        for (std::size_t i = 0; i < split.records.size(); ++i) {
            outcomes[i] = classify_one(client, model_id, tmpl, split.records[i], cache, options);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, split.records.size()); ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < split.records.size(); i = next++) {
                    outcomes[i] = classify_one(client, model_id, tmpl, split.records[i], cache, options);
                }
            });
        }
    }

    ClassifyOutcome result;
    result.predictions.model_id = model_id;
    result.predictions.dataset_id = std::string(to_string(split.name));
    result.predictions.entries.reserve(outcomes.size());
    for (auto& o : outcomes) {
        result.report.client_calls += o.calls;
        result.report.cache_hits += o.cache_hit ? 1 : 0;
        switch (o.entry.status) {
        case PredictionStatus::Ok: ++result.report.ok; break;
        case PredictionStatus::Unparseable: ++result.report.unparseable; break;
        case PredictionStatus::Error:
            ++result.report.error;
            result.report.error_ids.push_back(o.entry.sentence_id);
            break;
        }
        result.predictions.entries.push_back(std::move(o.entry));
    }
    if (result.report.error > 0) {
        spdlog::warn("{}: {} of {} requests failed after retries", model_id, result.report.error, outcomes.size());
    }
    return result;
}

std::vector<Exemplar> build_fewshot_exemplars(const DatasetSplit& pool, std::size_t k_per_class,
                                              std::uint64_t seed, const DatasetSplit& test) {
    if (pool.task != Task::Sarcasm) {
        throw UsageError("few-shot exemplar pool must be a sarcasm split");
    }
    if (k_per_class == 0) {
        throw UsageError("k_per_class must be >= 1");
    }
    std::set<std::string_view> test_ids;
    for (const auto& r : test.records) {
        test_ids.insert(r.id);
    }
    for (const auto& r : pool.records) {
        if (test_ids.count(r.id)) {
            throw DataError("few-shot pool shares id '" + r.id + "' with the test split");
        }
    }
    std::map<TaskLabel, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < pool.records.size(); ++i) {
        by_label[pool.records[i].label].push_back(i);
    }
    const std::array order{TaskLabel::Sarcastic, TaskLabel::NonSarcastic};
    for (auto label : order) {
        auto& idx = by_label[label];
        if (idx.size() < k_per_class) {
            throw DataError("few-shot pool has " + std::to_string(idx.size()) + " " +
                            std::string(to_string(label)) + " records, need " + std::to_string(k_per_class));
        }
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
        shuffle(std::span(idx), rng);
    }
    std::vector<Exemplar> out;
    for (std::size_t k = 0; k < k_per_class; ++k) {
        for (auto label : order) {
            const auto& r = pool.records[by_label[label][k]];
            out.push_back({r.text, r.label});
        }
    }
    return out;
}

}  // namespace sarc
