#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sarcbench/corpus.hpp"
#include "sarcbench/generation.hpp"
#include "sarcbench/io.hpp"

namespace sarc {

enum class TranslationStatus { Ok, Refused, Error, Manual };
enum class AuditVerdict { Satisfactory, Unsatisfactory };

std::string_view to_string(TranslationStatus status);
TranslationStatus parse_translation_status(std::string_view text);
std::string_view to_string(AuditVerdict verdict);
std::optional<AuditVerdict> parse_audit_verdict(std::string_view text);

struct AuditEntry {
    std::optional<AuditVerdict> annotator_a;
    std::optional<AuditVerdict> annotator_b;
    std::optional<AuditVerdict> adjudicated;

    bool operator==(const AuditEntry&) const = default;
};

struct TranslationRecord {
    std::string source_id;
    std::string source_text;
    std::optional<std::string> translated_text;
    TranslationStatus status = TranslationStatus::Error;
    std::optional<AuditEntry> audit;

    // Ok/Manual carry non-empty text; Refused/Error carry none.
    void validate() const;
    bool operator==(const TranslationRecord&) const = default;
};

json to_json(const TranslationRecord& r);
TranslationRecord translation_record_from_json(const json& obj);
void save_translations(const std::filesystem::path& path, std::span<const TranslationRecord> records);
std::vector<TranslationRecord> load_translations(const std::filesystem::path& path);

using SourceSentence = std::pair<std::string, std::string>;  // (id, text)

struct TranslationBatchRequest {
    std::vector<SourceSentence> sentences;
    std::string prompt_header;
    std::size_t batch_size = 20;

    void validate() const;
};

std::string_view default_translation_header();

// Header followed by "\n1. <text>\n2. <text>...". Empty input is a UsageError.
std::string build_translation_prompt(std::span<const SourceSentence> sentences,
                                     std::string_view header = default_translation_header());

std::vector<std::string> default_refusal_phrases();

struct TranslationOptions {
    std::string model;
    int max_retries = 3;  // extra attempts after a transport failure
    std::vector<std::string> refusal_phrases = default_refusal_phrases();
    int parallelism = 1;  // concurrent batch requests
};

// Numbered lines "<n>. text" / "<n>) text" / "<n>: text" keyed by n.
std::map<std::size_t, std::string> parse_numbered_response(std::string_view response);

// One client call per batch_size chunk (plus retries). Records come back in
// input order, one per sentence; failures never abort the batch.
std::vector<TranslationRecord> translate_batch(TextGenerationClient& client, const TranslationBatchRequest& request,
                                               const TranslationOptions& options);

// JSONL cache of settled (Ok/Refused/Manual) records. Keyed by model, prompt
// header and source sentence; Error records are never cached.
class TranslationCache {
public:
    TranslationCache() = default;
    explicit TranslationCache(std::filesystem::path path);

    std::optional<TranslationRecord> lookup(const std::string& key) const;
    void store(const std::string& key, const TranslationRecord& record);
    std::size_t size() const;

    static std::string key_for(const std::string& model, std::string_view header, const SourceSentence& s);

private:
    std::filesystem::path path_;
    std::map<std::string, TranslationRecord> entries_;
    mutable std::mutex mutex_;
};

// translate_batch over the uncached sentences, batches dispatched up to
// options.parallelism at a time. Output follows input order.
std::vector<TranslationRecord> translate_corpus(TextGenerationClient& client, const TranslationBatchRequest& request,
                                                const TranslationOptions& options, TranslationCache& cache);

// Ids of Ok records whose translation has no Devanagari token (logged as warnings).
std::vector<std::string> code_mix_warnings(std::span<const TranslationRecord> records);

TranslationRecord mark_manual(const TranslationRecord& record, std::string text);

// Uniform sample without replacement among records that have a translation;
// returned in corpus order.
std::vector<TranslationRecord> sample_for_audit(std::span<const TranslationRecord> records, std::size_t n,
                                                std::uint64_t seed);

struct AuditStatistics {
    std::size_t n = 0;
    double raw_agreement = 0.0;
    double unsatisfactory_rate = 0.0;
};

json to_json(const AuditStatistics& stats);

AuditStatistics audit_statistics(std::span<const TranslationRecord> records);

// CSV with header columns id, annotator_a, annotator_b, adjudicated (extra
// columns ignored). An empty adjudicated cell is filled with the shared
// verdict when both annotators agree.
std::map<std::string, AuditEntry> load_audit_csv(const std::filesystem::path& path);

// Annotation sheet for a sample: id, source_text, translated_text and empty verdict columns.
std::string audit_sheet_csv(std::span<const TranslationRecord> sample);

// Attaches audit entries by id; records without an entry are dropped.
std::vector<TranslationRecord> attach_audits(std::span<const TranslationRecord> records,
                                             const std::map<std::string, AuditEntry>& audits);

// Hinglish counterparts of `sources` built from Ok/Manual translations, in
// source order. Labels and ids come from the source records; sources without a
// usable translation are skipped and their ids appended to `missing`.
std::vector<LabeledSentence> code_mixed_dataset(std::span<const TranslationRecord> translations,
                                                std::span<const LabeledSentence> sources,
                                                std::vector<std::string>* missing = nullptr);

}  // namespace sarc
