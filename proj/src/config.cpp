#include "sarcbench/config.hpp"

#include "sarcbench/classifier.hpp"
#include "sarcbench/errors.hpp"
#include "sarcbench/experiments.hpp"

namespace sarc {

namespace fs = std::filesystem;

json default_config() {
    json strategies = json::array();
    for (auto id : {StrategyId::NoFt, StrategyId::FtEnSarc, StrategyId::FtCmSarc, StrategyId::FtEnSent,
                    StrategyId::FtCmSent}) {
        strategies.push_back(to_string(id));
    }
    json sizes = json::array();
    for (auto n : default_ablation_sizes()) {
        sizes.push_back(n);
    }
    return json{
        {"experiment_id", "default"},
        {"seed", 42},
        {"runs_dir", "runs"},
        {"base_dir", ""},
        {"data",
         {{"sarcasm_en", ""},
          {"sentiment_en", ""},
          {"sarcasm_hinglish", ""},
          {"sentiment_hinglish", ""},
          {"sarcasm_translations", ""},
          {"sentiment_translations", ""},
          {"splits_dir", "work/splits"},
          {"balance_sarcasm", true},
          {"sarcasm_plan", nullptr},
          {"sentiment_plan", nullptr}}},
        {"classifier", ClassifierConfig{}.to_json()},
        {"finetune", json::object()},
        {"strategies", strategies},
        {"seeds", json::array()},
        {"save_checkpoints", true},
        {"cv_folds", 5},
        {"llm",
         {{"endpoint", "http://127.0.0.1:11434/api/generate"},
          {"response_key", "response"},
          {"extra_body", {{"stream", false}, {"options", {{"temperature", 0}}}}},
          {"credential_env", ""},
          {"timeout_seconds", 120},
          {"models",
           json::array({{{"id", "llama3.1"}, {"label", "Llama 3.1"}},
                        {{"id", "mistral"}, {"label", "Mistral"}},
                        {{"id", "gemma3"}, {"label", "Gemma 3"}},
                        {{"id", "phi4"}, {"label", "Phi 4"}}})},
          {"modes", json::array({"zero-shot", "few-shot"})},
          {"test_splits", json::array({split_names::kEnSarcasmTest, split_names::kCmSarcasmTest})},
          {"cache", "work/llm_cache.jsonl"},
          {"invalid_policy", "incorrect"},
          {"prompt_body", ""},
          {"fewshot",
           {{"k_per_class", 2},
            {"pools", {{"en", split_names::kCmSarcasmFineTune}, {"hinglish", split_names::kCmSarcasmFineTune}}}}},
          {"max_transport_retries", 2},
          {"max_unparseable_retries", 2},
          {"parallelism", 1}}},
        {"translation",
         {{"endpoint", ""},
          {"model", "gemini-2.5-pro"},
          {"response_key", "response"},
          {"extra_body", json::object()},
          {"credential_env", "TRANSLATION_API_KEY"},
          {"timeout_seconds", 300},
          {"batch_size", 20},
          {"parallelism", 1},
          {"max_retries", 3},
          {"refusal_phrases", nullptr},
          {"prompt_header", ""},
          {"cache", "work/translation_cache.jsonl"}}},
        {"audit", {{"quota", {{"sarcasm", 175}, {"sentiment", 175}}}}},
        {"bootstrap", {{"iterations", 2344}, {"resample_size", 0}}},
        {"ablation", {{"strategies", json::array({"FT_CM_SARC", "FT_EN_SARC"})}, {"sizes", sizes}}},
        {"report", {{"reference_targets", ""}, {"out_dir", ""}}},
    };
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw UsageError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    std::string pointer;
    std::size_t start = 0;
    while (start <= key.size()) {
        const auto dot = key.find('.', start);
        const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw UsageError("override key '" + key + "' has an empty component");
        }
        pointer += "/" + part;
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    const json::json_pointer ptr(pointer);
    if (!config.contains(ptr.parent_pointer()) || !config.at(ptr.parent_pointer()).is_object()) {
        throw UsageError("override key '" + key + "' does not name a configuration section");
    }
    config[ptr] = value;
}

json resolve_config(const std::optional<fs::path>& path, const std::vector<std::string>& overrides,
                    std::optional<std::uint64_t> seed) {
    json config = default_config();
    if (path) {
        if (!fs::exists(*path)) {
            throw UsageError("config file " + path->string() + " does not exist");
        }
        const auto file = json::parse(read_text_file(*path), nullptr, false);
        if (file.is_discarded() || !file.is_object()) {
            throw UsageError("config file " + path->string() + " is not a JSON object");
        }
        for (const auto& [key, value] : file.items()) {
            if (!config.contains(key)) {
                throw UsageError("unknown config section '" + key + "'");
            }
        }
        config.merge_patch(file);
        if (config["base_dir"].get<std::string>().empty()) {
            config["base_dir"] = fs::absolute(*path).parent_path().string();
        }
    }
    for (const auto& o : overrides) {
        apply_override(config, o);
    }
    if (seed) {
        config["seed"] = *seed;
    }
    if (config["base_dir"].get<std::string>().empty()) {
        config["base_dir"] = fs::current_path().string();
    }
    return config;
}

fs::path config_base_dir(const json& config) { return fs::path(config.value("base_dir", std::string(""))); }

fs::path config_path(const json& config, const std::string& pointer) {
    const auto& v = config.at(json::json_pointer(pointer));
    if (!v.is_string() || v.get<std::string>().empty()) {
        throw UsageError("config value " + pointer + " must name a path");
    }
    const fs::path p(v.get<std::string>());
    return p.is_absolute() ? p : config_base_dir(config) / p;
}

}  // namespace sarc
