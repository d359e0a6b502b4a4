#include "sarcbench/synthgen.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "sarcbench/corpus.hpp"
#include "sarcbench/errors.hpp"
#include "sarcbench/rng.hpp"
#include "sarcbench/utf8.hpp"

namespace sarc {

std::string_view to_string(TranslationStatus status) {
    switch (status) {
    case TranslationStatus::Ok: return "ok";
    case TranslationStatus::Refused: return "refused";
    case TranslationStatus::Error: return "error";
    case TranslationStatus::Manual: return "manual";
    }
    throw std::logic_error("bad TranslationStatus");
}

TranslationStatus parse_translation_status(std::string_view text) {
    for (auto s : {TranslationStatus::Ok, TranslationStatus::Refused, TranslationStatus::Error,
                   TranslationStatus::Manual}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw DataError("unknown translation status '" + std::string(text) + "'");
}

std::string_view to_string(AuditVerdict verdict) {
    return verdict == AuditVerdict::Satisfactory ? "satisfactory" : "unsatisfactory";
}

std::optional<AuditVerdict> parse_audit_verdict(std::string_view text) {
    std::string lower;
    for (char c : utf8::trim(text)) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lower == "satisfactory") {
        return AuditVerdict::Satisfactory;
    }
    if (lower == "unsatisfactory" || lower == "un-satisfactory") {
        return AuditVerdict::Unsatisfactory;
    }
    return std::nullopt;
}

void TranslationRecord::validate() const {
    const bool has_text = translated_text.has_value();
    switch (status) {
    case TranslationStatus::Ok:
    case TranslationStatus::Manual:
        if (!has_text || utf8::trim(*translated_text).empty()) {
            throw DataError("translation '" + source_id + "' with status " + std::string(to_string(status)) +
                            " needs non-empty text");
        }
        break;
    case TranslationStatus::Refused:
    case TranslationStatus::Error:
        if (has_text) {
            throw DataError("translation '" + source_id + "' with status " + std::string(to_string(status)) +
                            " must not carry text");
        }
        break;
    }
    if (audit && audit->annotator_a && audit->annotator_b && !audit->adjudicated) {
        throw DataError("audit of '" + source_id + "' has both annotations but no adjudication");
    }
}

namespace {

json verdict_json(const std::optional<AuditVerdict>& v) { return v ? json(to_string(*v)) : json(nullptr); }

std::optional<AuditVerdict> verdict_from(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    auto v = parse_audit_verdict(it->get<std::string>());
    if (!v) {
        throw DataError("unknown audit verdict '" + it->get<std::string>() + "'");
    }
    return v;
}

}  // namespace

json to_json(const TranslationRecord& r) {
    json obj{{"source_id", r.source_id}, {"source_text", r.source_text}, {"status", to_string(r.status)}};
    obj["translated_text"] = r.translated_text ? json(*r.translated_text) : json(nullptr);
    if (r.audit) {
        obj["audit"] = json{{"annotator_a", verdict_json(r.audit->annotator_a)},
                            {"annotator_b", verdict_json(r.audit->annotator_b)},
                            {"adjudicated", verdict_json(r.audit->adjudicated)}};
    }
    return obj;
}

TranslationRecord translation_record_from_json(const json& obj) {
    TranslationRecord r;
    try {
        r.source_id = obj.at("source_id").get<std::string>();
        r.source_text = obj.at("source_text").get<std::string>();
        r.status = parse_translation_status(obj.at("status").get<std::string>());
        if (const auto it = obj.find("translated_text"); it != obj.end() && !it->is_null()) {
            r.translated_text = it->get<std::string>();
        }
        if (const auto it = obj.find("audit"); it != obj.end() && !it->is_null()) {
            r.audit = AuditEntry{verdict_from(*it, "annotator_a"), verdict_from(*it, "annotator_b"),
                                 verdict_from(*it, "adjudicated")};
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed translation record: ") + e.what());
    }
    r.validate();
    return r;
}

void save_translations(const std::filesystem::path& path, std::span<const TranslationRecord> records) {
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        rows.push_back(to_json(r));
    }
    write_text_file(path, to_jsonl(rows));
}

std::vector<TranslationRecord> load_translations(const std::filesystem::path& path) {
    std::vector<TranslationRecord> out;
    for_each_jsonl(path, [&](std::size_t line, const json& obj) {
        try {
            out.push_back(translation_record_from_json(obj));
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

void TranslationBatchRequest::validate() const {
    if (batch_size == 0) {
        throw UsageError("translation batch_size must be >= 1");
    }
    if (sentences.empty()) {
        throw UsageError("translation request has no sentences");
    }
}

std::string_view default_translation_header() {
    return "Translate the following sentences into Hindi-English code-mixed sentences. "
           "Use Hindi/Devanagari script for words written using Devanagari font, if any, in the original text. "
           "Example: ‘Weekend plans got cancelled.’\n"
           "→ ‘Weekend plans cancel हो गए’";
}

std::string build_translation_prompt(std::span<const SourceSentence> sentences, std::string_view header) {
    if (sentences.empty()) {
        throw UsageError("build_translation_prompt needs at least one sentence");
    }
    std::string out(header);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        out += '\n';
        out += std::to_string(i + 1);
        out += ". ";
        out += sentences[i].second;
    }
    return out;
}

std::vector<std::string> default_refusal_phrases() {
    return {"i cannot", "i can't", "i can’t", "i am unable", "i'm unable", "i’m unable",
            "unable to translate", "cannot fulfill", "can't help with", "not able to translate", "i won't"};
}

namespace {

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

// Drops one layer of matching wrapping quotes (straight or curly).
std::string strip_wrapping_quotes(std::string text) {
    static const std::pair<std::string_view, std::string_view> pairs[] = {
        {"\"", "\""}, {"'", "'"}, {"‘", "’"}, {"“", "”"}, {"‘", "'"}};
    for (const auto& [open, close] : pairs) {
        if (text.size() >= open.size() + close.size() && text.starts_with(open) && text.ends_with(close)) {
            return utf8::trim(std::string_view(text).substr(open.size(), text.size() - open.size() - close.size()));
        }
    }
    return text;
}

bool has_refusal(std::string_view text, const std::vector<std::string>& phrases) {
    const std::string lower = to_lower_ascii(text);
    return std::any_of(phrases.begin(), phrases.end(),
                       [&](const std::string& p) { return lower.find(to_lower_ascii(p)) != std::string::npos; });
}

std::vector<TranslationRecord> translate_chunk(TextGenerationClient& client, std::span<const SourceSentence> chunk,
                                               std::string_view header, const TranslationOptions& options) {
    const std::string prompt = build_translation_prompt(chunk, header);
    GenerationResult result;
    for (int attempt = 0; attempt <= std::max(0, options.max_retries); ++attempt) {
        result = client.generate(options.model, prompt);
        if (result.ok) {
            break;
        }
        spdlog::warn("translation batch starting at '{}' attempt {} failed: {}", chunk.front().first, attempt + 1,
                     result.error);
    }
    std::vector<TranslationRecord> out;
    out.reserve(chunk.size());
    const auto lines = result.ok ? parse_numbered_response(result.text) : std::map<std::size_t, std::string>{};
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        TranslationRecord r;
        r.source_id = chunk[i].first;
        r.source_text = chunk[i].second;
        if (!result.ok) {
            r.status = TranslationStatus::Error;
        } else if (const auto it = lines.find(i + 1);
                   it == lines.end() || it->second.empty() || has_refusal(it->second, options.refusal_phrases)) {
            r.status = TranslationStatus::Refused;
        } else {
            r.status = TranslationStatus::Ok;
            r.translated_text = it->second;
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

std::map<std::size_t, std::string> parse_numbered_response(std::string_view response) {
    std::map<std::size_t, std::string> out;
    std::size_t start = 0;
    while (start <= response.size()) {
        auto end = response.find('\n', start);
        if (end == std::string_view::npos) {
            end = response.size();
        }
        std::string_view line = response.substr(start, end - start);
        start = end + 1;
        std::size_t i = 0;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '*')) {
            ++i;
        }
        const std::size_t digits_begin = i;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i == digits_begin || i - digits_begin > 6 || i >= line.size()) {
            continue;
        }
        if (line[i] != '.' && line[i] != ')' && line[i] != ':') {
            continue;
        }
        const auto n = static_cast<std::size_t>(std::stoul(std::string(line.substr(digits_begin, i - digits_begin))));
        std::size_t body = i + 1;
        while (body < line.size() && line[body] == '*') {
            ++body;
        }
        std::string text = strip_wrapping_quotes(utf8::trim(line.substr(body)));
        out.emplace(n, std::move(text));  // first occurrence wins
        if (end == response.size()) {
            break;
        }
    }
    return out;
}

std::vector<TranslationRecord> translate_batch(TextGenerationClient& client, const TranslationBatchRequest& request,
                                               const TranslationOptions& options) {
    request.validate();
    std::vector<TranslationRecord> out;
    out.reserve(request.sentences.size());
    const std::span<const SourceSentence> all(request.sentences);
    for (std::size_t begin = 0; begin < all.size(); begin += request.batch_size) {
        const auto chunk = all.subspan(begin, std::min(request.batch_size, all.size() - begin));
        auto records = translate_chunk(client, chunk, request.prompt_header, options);
        std::move(records.begin(), records.end(), std::back_inserter(out));
    }
    return out;
}

TranslationCache::TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) {
        return;
    }
    for_each_jsonl(path_, [&](std::size_t line, const json& obj) {
        try {
            entries_[obj.at("key").get<std::string>()] = translation_record_from_json(obj.at("record"));
        } catch (const std::exception& e) {
            throw DataError(path_.string() + ":" + std::to_string(line) + ": bad cache entry: " + e.what());
        }
    });
}

std::string TranslationCache::key_for(const std::string& model, std::string_view header, const SourceSentence& s) {
    std::string material = model;
    material.push_back('\0');
    material += header;
    material.push_back('\0');
    material += s.first;
    material.push_back('\0');
    material += s.second;
    return sha256_hex(material);
}

std::optional<TranslationRecord> TranslationCache::lookup(const std::string& key) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void TranslationCache::store(const std::string& key, const TranslationRecord& record) {
    if (record.status == TranslationStatus::Error) {
        return;
    }
    std::lock_guard lock(mutex_);
    entries_[key] = record;
    if (path_.empty()) {
        return;
    }
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
        throw DataError("cannot append to translation cache " + path_.string());
    }
    out << json{{"key", key}, {"record", to_json(record)}}.dump(-1, ' ', false, json::error_handler_t::replace)
        << '\n';
}

std::size_t TranslationCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::vector<TranslationRecord> translate_corpus(TextGenerationClient& client, const TranslationBatchRequest& request,
                                                const TranslationOptions& options, TranslationCache& cache) {
    request.validate();
    const auto& sentences = request.sentences;
    std::vector<std::optional<TranslationRecord>> slots(sentences.size());
    std::vector<std::string> keys(sentences.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        keys[i] = TranslationCache::key_for(options.model, request.prompt_header, sentences[i]);
        slots[i] = cache.lookup(keys[i]);
        if (!slots[i]) {
            pending.push_back(i);
        }
    }

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t b = 0; b < pending.size(); b += request.batch_size) {
        const auto e = std::min(b + request.batch_size, pending.size());
        batches.emplace_back(pending.begin() + static_cast<std::ptrdiff_t>(b),
                             pending.begin() + static_cast<std::ptrdiff_t>(e));
    }

    const auto run_batch = [&](const std::vector<std::size_t>& idx) {
        std::vector<SourceSentence> chunk;
        chunk.reserve(idx.size());
        for (auto i : idx) {
            chunk.push_back(sentences[i]);
        }
        auto records = translate_chunk(client, chunk, request.prompt_header, options);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            cache.store(keys[idx[k]], records[k]);
            slots[idx[k]] = std::move(records[k]);
        }
    };

    const auto workers = static_cast<std::size_t>(std::max(1, options.parallelism));
    if (workers == 1 || batches.size() <= 1) {
        for (const auto& b : batches) {
            run_batch(b);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, batches.size()); ++w) {
            pool.emplace_back([&] {
                for (std::size_t b = next++; b < batches.size(); b = next++) {
                    run_batch(batches[b]);
                }
            });
        }
    }

    std::vector<TranslationRecord> out;
    out.reserve(slots.size());
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    for (const auto& id : code_mix_warnings(out)) {
        spdlog::warn("translation '{}' has no Devanagari token; kept, but check the code-mixing", id);
    }
    return out;
}

std::vector<std::string> code_mix_warnings(std::span<const TranslationRecord> records) {
    std::vector<std::string> ids;
    for (const auto& r : records) {
        if (r.status == TranslationStatus::Ok && r.translated_text &&
            script_profile(*r.translated_text).devanagari_tokens == 0) {
            ids.push_back(r.source_id);
        }
    }
    return ids;
}

TranslationRecord mark_manual(const TranslationRecord& record, std::string text) {
    if (record.status != TranslationStatus::Refused && record.status != TranslationStatus::Error) {
        throw UsageError("mark_manual: record '" + record.source_id + "' has status " +
                         std::string(to_string(record.status)) + "; only refused/error records take manual text");
    }
    TranslationRecord out = record;
    out.status = TranslationStatus::Manual;
    out.translated_text = std::move(text);
    out.validate();
    return out;
}

std::vector<TranslationRecord> sample_for_audit(std::span<const TranslationRecord> records, std::size_t n,
                                                std::uint64_t seed) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].translated_text) {
            eligible.push_back(i);
        }
    }
    if (n > eligible.size()) {
        throw DataError("audit sample of " + std::to_string(n) + " requested but only " +
                        std::to_string(eligible.size()) + " translations exist");
    }
    Rng rng(seed);
    shuffle(std::span(eligible), rng);
    eligible.resize(n);
    std::sort(eligible.begin(), eligible.end());
    std::vector<TranslationRecord> out;
    out.reserve(n);
    for (auto i : eligible) {
        out.push_back(records[i]);
    }
    return out;
}

json to_json(const AuditStatistics& stats) {
    return json{{"n", stats.n}, {"raw_agreement", stats.raw_agreement},
                {"unsatisfactory_rate", stats.unsatisfactory_rate}};
}

AuditStatistics audit_statistics(std::span<const TranslationRecord> records) {
    if (records.empty()) {
        throw DataError("audit_statistics over an empty sample");
    }
    std::vector<std::string> incomplete;
    std::size_t agree = 0;
    std::size_t unsatisfactory = 0;
    for (const auto& r : records) {
        if (!r.audit || !r.audit->annotator_a || !r.audit->annotator_b || !r.audit->adjudicated) {
            incomplete.push_back(r.source_id);
            continue;
        }
        agree += *r.audit->annotator_a == *r.audit->annotator_b ? 1 : 0;
        unsatisfactory += *r.audit->adjudicated == AuditVerdict::Unsatisfactory ? 1 : 0;
    }
    if (!incomplete.empty()) {
        std::string msg = "missing annotations for:";
        for (const auto& id : incomplete) {
            msg += " " + id;
        }
        throw DataError(msg);
    }
    const auto n = static_cast<double>(records.size());
    return {records.size(), static_cast<double>(agree) / n, static_cast<double>(unsatisfactory) / n};
}

std::map<std::string, AuditEntry> load_audit_csv(const std::filesystem::path& path) {
    const auto rows = parse_csv(read_text_file(path));
    if (rows.empty()) {
        throw DataError(path.string() + ": empty audit CSV");
    }
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        col[utf8::trim(rows[0][i])] = i;
    }
    for (const char* required : {"id", "annotator_a", "annotator_b", "adjudicated"}) {
        if (!col.count(required)) {
            throw DataError(path.string() + ": audit CSV lacks column '" + required + "'");
        }
    }
    std::map<std::string, AuditEntry> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto cell = [&](const char* name) -> std::string {
            const auto i = col[name];
            return i < row.size() ? utf8::trim(row[i]) : std::string{};
        };
        const auto verdict = [&](const char* name) -> std::optional<AuditVerdict> {
            const std::string v = cell(name);
            if (v.empty()) {
                return std::nullopt;
            }
            auto parsed = parse_audit_verdict(v);
            if (!parsed) {
                throw DataError(path.string() + ": row " + std::to_string(r + 1) + ": unknown verdict '" + v + "'");
            }
            return parsed;
        };
        const std::string id = cell("id");
        if (id.empty()) {
            continue;
        }
        AuditEntry e{verdict("annotator_a"), verdict("annotator_b"), verdict("adjudicated")};
        if (!e.adjudicated && e.annotator_a && e.annotator_b && *e.annotator_a == *e.annotator_b) {
            e.adjudicated = e.annotator_a;
        }
        if (!out.emplace(id, e).second) {
            throw DataError(path.string() + ": duplicate audit id '" + id + "'");
        }
    }
    return out;
}

std::string audit_sheet_csv(std::span<const TranslationRecord> sample) {
    std::string out = "id,source_text,translated_text,annotator_a,annotator_b,adjudicated\n";
    for (const auto& r : sample) {
        out += csv_escape(r.source_id) + "," + csv_escape(r.source_text) + "," +
               csv_escape(r.translated_text.value_or("")) + ",,,\n";
    }
    return out;
}

std::vector<TranslationRecord> attach_audits(std::span<const TranslationRecord> records,
                                             const std::map<std::string, AuditEntry>& audits) {
    std::vector<TranslationRecord> out;
    for (const auto& r : records) {
        const auto it = audits.find(r.source_id);
        if (it == audits.end()) {
            continue;
        }
        TranslationRecord copy = r;
        copy.audit = it->second;
        out.push_back(std::move(copy));
    }
    return out;
}

std::vector<LabeledSentence> code_mixed_dataset(std::span<const TranslationRecord> translations,
                                                std::span<const LabeledSentence> sources,
                                                std::vector<std::string>* missing) {
    std::map<std::string_view, const TranslationRecord*> by_id;
    for (const auto& t : translations) {
        by_id[t.source_id] = &t;
    }
    std::vector<LabeledSentence> out;
    for (const auto& src : sources) {
        const auto it = by_id.find(src.id);
        const bool usable = it != by_id.end() && it->second->translated_text &&
                            (it->second->status == TranslationStatus::Ok || it->second->status == TranslationStatus::Manual);
        if (!usable) {
            if (missing != nullptr) {
                missing->push_back(src.id);
            }
            continue;
        }
        LabeledSentence s = src;
        s.text = *it->second->translated_text;
        s.lang = Language::Hinglish;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace sarc
